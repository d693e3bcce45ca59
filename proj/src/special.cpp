#include "gomp/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gomp::special {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxIter = 500;
constexpr double kEps = 1e-16;

// log(1 - exp(log_x)) for log_x <= 0, without cancellation.
double log1m_exp(double log_x) {
    if (log_x >= 0.0) return kNegInf;
    if (log_x > -0.6931471805599453)  // exp(log_x) > 1/2
        return std::log(-std::expm1(log_x));
    return std::log1p(-std::exp(log_x));
}

// Series for P(s,x), valid for x < s+1. Returns log of the O(1) sum;
// the exponential prefactor is applied by the caller in log space.
double gamma_series_log_sum(double s, double x) {
    double ap = s;
    double del = 1.0 / s;
    double sum = del;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return std::log(sum);
}

// Lentz continued fraction for Q(s,x), valid for x >= s+1.
double gamma_cf_log(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        double an = -static_cast<double>(i) * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return std::log(h);
}

// Lentz continued fraction for the incomplete beta (Numerical Recipes form).
double beta_cf_log(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return std::log(h);
}

}  // namespace

double log_reg_inc_gamma_lower(double s, double x) {
    if (!(s > 0.0) || !(x >= 0.0) || !std::isfinite(s) || !std::isfinite(x))
        throw std::domain_error("log_reg_inc_gamma_lower: require s > 0, x >= 0");
    if (x == 0.0) return kNegInf;
    double prefactor = s * std::log(x) - x - std::lgamma(s);
    if (x < s + 1.0) {
        return prefactor + gamma_series_log_sum(s, x);
    }
    double log_q = prefactor + gamma_cf_log(s, x);
    return log1m_exp(log_q);
}

double log_reg_inc_gamma_upper(double s, double x) {
    if (!(s > 0.0) || !(x >= 0.0) || !std::isfinite(s) || !std::isfinite(x))
        throw std::domain_error("log_reg_inc_gamma_upper: require s > 0, x >= 0");
    if (x == 0.0) return 0.0;
    double prefactor = s * std::log(x) - x - std::lgamma(s);
    if (x >= s + 1.0) {
        return prefactor + gamma_cf_log(s, x);
    }
    double log_p = prefactor + gamma_series_log_sum(s, x);
    return log1m_exp(log_p);
}

double log_reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0) || !(x <= 1.0))
        throw std::domain_error("log_reg_inc_beta: require a,b > 0 and x in [0,1]");
    if (x == 0.0) return kNegInf;
    if (x == 1.0) return 0.0;
    double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return log_front + beta_cf_log(a, b, x) - std::log(a);
    }
    double log_complement = log_front + beta_cf_log(b, a, 1.0 - x) - std::log(b);
    return log1m_exp(log_complement);
}

double log_chi2_upper(double x, double df) {
    return log_reg_inc_gamma_upper(df / 2.0, x / 2.0);
}

double log_t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw std::domain_error("log_t_two_sided: df must be positive");
    if (std::isinf(t)) return kNegInf;
    double t2 = t * t;
    return log_reg_inc_beta(df / 2.0, 0.5, df / (df + t2));
}

double log_f_upper(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0) || !(f >= 0.0))
        throw std::domain_error("log_f_upper: require d1,d2 > 0 and f >= 0");
    return log_reg_inc_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double chi2_quantile(double p, double df) {
    if (!(p > 0.0) || !(p < 1.0) || !(df > 0.0))
        throw std::domain_error("chi2_quantile: require 0 < p < 1 and df > 0");
    double lo = 0.0, hi = df;
    auto cdf = [df](double x) { return std::exp(log_reg_inc_gamma_lower(df / 2.0, x / 2.0)); };
    while (cdf(hi) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace gomp::special
