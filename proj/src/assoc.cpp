#include "gomp/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gomp/special.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gomp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd midranks(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
    Eigen::VectorXd ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j < n && v[order[j]] == v[order[i]]) ++j;
        double r = 0.5 * (i + j - 1) + 1.0;
        for (Eigen::Index k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

AssocScore correlation_score(const Eigen::VectorXd& r, const Eigen::VectorXd& x) {
    const Eigen::Index n = r.size();
    if (n < 3) throw std::invalid_argument("correlation test needs n >= 3");
    double rm = r.mean(), xm = x.mean();
    Eigen::ArrayXd rc = r.array() - rm, xc = x.array() - xm;
    double sx = std::sqrt(xc.square().sum()), sr = std::sqrt(rc.square().sum());
    AssocScore s;
    s.df1 = 1;
    s.df2 = static_cast<int>(n - 2);
    if (sx == 0.0 || sr == 0.0) {
        s.statistic = 0.0;
        s.log_p = 0.0;  // constant input: association nil
        return s;
    }
    double rho = (rc * xc).sum() / (sx * sr);
    rho = std::clamp(rho, -1.0, 1.0);
    double denom = 1.0 - rho * rho;
    if (denom <= 0.0) {
        s.statistic = std::numeric_limits<double>::infinity() * (rho >= 0 ? 1.0 : -1.0);
        s.log_p = kNegInf;
        return s;
    }
    double t = rho * std::sqrt((n - 2) / denom);
    s.statistic = t;
    s.log_p = special::log_t_two_sided(t, static_cast<double>(n - 2));
    return s;
}

}  // namespace

bool stronger(const AssocScore& a, const AssocScore& b) {
    if (a.log_p != b.log_p) return a.log_p < b.log_p;
    double ma = std::fabs(a.statistic), mb = std::fabs(b.statistic);
    if (ma != mb) return ma > mb;
    return a.feature_index < b.feature_index;
}

AssocScore pearson_assoc(const Eigen::VectorXd& r, const FeatureColumn& x) {
    return correlation_score(r, x.values);
}

AssocScore spearman_assoc(const Eigen::VectorXd& r, const FeatureColumn& x) {
    return correlation_score(midranks(r), midranks(x.values));
}

AssocScore anova_assoc(const Eigen::VectorXd& r, const FeatureColumn& x) {
    const Eigen::Index n = r.size();
    const int k = x.level_count;
    if (n <= k) throw std::invalid_argument("anova_assoc: needs n > level_count");

    std::vector<double> sum(k, 0.0);
    std::vector<int> cnt(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        int g = static_cast<int>(x.values[i]);
        sum[g] += r[i];
        ++cnt[g];
    }
    double grand = r.mean();
    double ssb = 0.0;
    for (int g = 0; g < k; ++g)
        if (cnt[g] > 0) {
            double m = sum[g] / cnt[g];
            ssb += cnt[g] * (m - grand) * (m - grand);
        }
    double ssw = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int g = static_cast<int>(x.values[i]);
        double m = sum[g] / cnt[g];
        ssw += (r[i] - m) * (r[i] - m);
    }

    AssocScore s;
    s.df1 = k - 1;
    s.df2 = static_cast<int>(n - k);
    if (ssw <= 0.0) {
        if (ssb <= 0.0) {
            s.statistic = 0.0;
            s.log_p = 0.0;
            return s;
        }
        s.statistic = std::numeric_limits<double>::infinity();
        s.log_p = kNegInf;
        return s;
    }
    double f = (ssb / s.df1) / (ssw / s.df2);
    s.statistic = f;
    s.log_p = special::log_f_upper(f, s.df1, s.df2);
    return s;
}

AssocScore assoc_feature(const Eigen::VectorXd& r, const Dataset& d, int feature,
                         ContinuousAssoc cont) {
    const FeatureColumn& f = d.features[feature];
    AssocScore s;
    if (f.kind == FeatureKind::Continuous)
        s = cont == ContinuousAssoc::Pearson ? pearson_assoc(r, f) : spearman_assoc(r, f);
    else
        s = anova_assoc(r, f);
    s.feature_index = feature;
    return s;
}

std::optional<AssocScore> scan_candidates_serial(const Eigen::VectorXd& r, const Dataset& d,
                                                 const std::vector<char>& excluded,
                                                 ContinuousAssoc cont) {
    std::optional<AssocScore> best;
    for (int j = 0; j < d.p(); ++j) {
        if (excluded[j] || d.features[j].excluded) continue;
        AssocScore s = assoc_feature(r, d, j, cont);
        if (!best || stronger(s, *best)) best = s;
    }
    return best;
}

std::optional<AssocScore> scan_candidates(const Eigen::VectorXd& r, const Dataset& d,
                                          const std::vector<char>& excluded,
                                          ContinuousAssoc cont) {
    const int p = d.p();
    std::optional<AssocScore> best;
#ifdef _OPENMP
#pragma omp parallel
    {
        std::optional<AssocScore> local;
#pragma omp for schedule(static) nowait
        for (int j = 0; j < p; ++j) {
            if (excluded[j] || d.features[j].excluded) continue;
            AssocScore s = assoc_feature(r, d, j, cont);
            if (!local || stronger(s, *local)) local = s;
        }
#pragma omp critical
        {
            if (local && (!best || stronger(*local, *best))) best = local;
        }
    }
#else
    best = scan_candidates_serial(r, d, excluded, cont);
#endif
    return best;
}

}  // namespace gomp
