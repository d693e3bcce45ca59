#include "gomp/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace gomp {

namespace {

constexpr double kBetaCap = 30.0;  // separation guard on standardized data
constexpr double kPivotRatio = 1e-10;

double gaussian_loglik(double rss, double n) {
    double sigma2 = std::max(rss / n, 1e-300);
    return -0.5 * n * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
}

// Least squares with column-pivot rank detection. Columns whose pivot falls
// below kPivotRatio of the leading pivot are dropped and reported.
struct LsSolve {
    Eigen::VectorXd beta;
    std::vector<int> dropped;
    double rss = 0.0;
};

LsSolve solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    LsSolve out;
    const Eigen::Index p = X.cols();
    if (p == 0) {
        out.beta.resize(0);
        out.rss = y.squaredNorm();
        return out;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const auto& R = qr.matrixR();
    double lead = std::fabs(R(0, 0));
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < std::min(X.rows(), p); ++k) {
        if (std::fabs(R(k, k)) > kPivotRatio * lead)
            ++rank;
        else
            break;
    }
    out.beta = Eigen::VectorXd::Zero(p);
    const auto& perm = qr.colsPermutation();
    if (rank == p) {
        out.beta = qr.solve(y);
    } else {
        std::vector<int> keep(rank);
        for (Eigen::Index k = 0; k < rank; ++k) keep[k] = perm.indices()[k];
        for (Eigen::Index k = rank; k < p; ++k) out.dropped.push_back(perm.indices()[k]);
        std::sort(out.dropped.begin(), out.dropped.end());
        Eigen::MatrixXd Xk(X.rows(), rank);
        for (Eigen::Index k = 0; k < rank; ++k) Xk.col(k) = X.col(keep[k]);
        Eigen::VectorXd bk = Xk.householderQr().solve(y);
        for (Eigen::Index k = 0; k < rank; ++k) out.beta[keep[k]] = bk[k];
    }
    out.rss = (y - X * out.beta).squaredNorm();
    return out;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Xi(X.rows(), X.cols() + 1);
    Xi.col(0).setOnes();
    Xi.rightCols(X.cols()) = X;
    return Xi;
}

}  // namespace

ResidualKind default_residual(Family f) {
    return f == Family::Cox ? ResidualKind::Martingale : ResidualKind::Raw;
}

DesignInfo build_design(const Dataset& d, const std::vector<int>& selected) {
    const Eigen::Index n = d.n();
    Eigen::Index cols = 0;
    for (int j : selected) {
        const FeatureColumn& f = d.features.at(j);
        cols += f.kind == FeatureKind::Continuous ? 1 : f.level_count - 1;
    }
    DesignInfo out;
    out.X.resize(n, cols);
    out.col_feature.reserve(cols);
    Eigen::Index c = 0;
    for (int j : selected) {
        const FeatureColumn& f = d.features.at(j);
        if (f.kind == FeatureKind::Continuous) {
            out.X.col(c) = f.values;
            out.col_feature.push_back(j);
            ++c;
        } else {
            for (int lvl = 1; lvl < f.level_count; ++lvl) {
                for (Eigen::Index i = 0; i < n; ++i)
                    out.X(i, c) = f.values[i] == lvl ? 1.0 : 0.0;
                out.col_feature.push_back(j);
                ++c;
            }
        }
    }
    return out;
}

FittedModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, bool intercept) {
    const double n = static_cast<double>(y.size());
    FittedModel m;
    m.family = Family::Linear;
    m.has_intercept = intercept;
    Eigen::MatrixXd design = intercept ? with_intercept(X) : X;
    LsSolve ls = solve_least_squares(design, y);
    m.beta = ls.beta;
    m.rss = ls.rss;
    m.fitted = design.cols() > 0 ? Eigen::VectorXd(design * ls.beta)
                                 : Eigen::VectorXd::Zero(y.size());
    m.log_likelihood = gaussian_loglik(ls.rss, n);
    m.df = static_cast<int>(design.cols() - ls.dropped.size());
    for (int c : ls.dropped) m.dropped_cols.push_back(intercept ? c - 1 : c);
    m.iterations = 1;
    return m;
}

double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(y.size(), beta[0]);
    if (X.cols() > 0) eta += X * beta.tail(X.cols());
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        // y*eta - log(1+e^eta), stably
        double e = eta[i];
        ll += y[i] * e - (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e)));
    }
    return ll;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(y.size(), beta[0]);
    if (X.cols() > 0) eta += X * beta.tail(X.cols());
    Eigen::VectorXd p = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    Eigen::VectorXd resid = y - p;
    Eigen::VectorXd g(beta.size());
    g[0] = resid.sum();
    if (X.cols() > 0) g.tail(X.cols()) = X.transpose() * resid;
    return g;
}

FittedModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         int max_iter, double tol) {
    const Eigen::Index n = y.size();
    double n1 = y.sum(), n0 = n - n1;
    if (n1 == 0 || n0 == 0)
        throw std::invalid_argument("fit_logistic: both classes must be present");

    FittedModel m;
    m.family = Family::Logistic;
    m.has_intercept = true;
    const Eigen::Index p = X.cols();
    Eigen::MatrixXd design = with_intercept(X);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    beta[0] = std::log(n1 / n0);
    double ll = logistic_loglik(X, y, beta);

    int it = 0;
    bool separated = false;
    for (; it < max_iter && p > 0; ++it) {
        Eigen::VectorXd eta = design * beta;
        Eigen::VectorXd prob = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        Eigen::VectorXd w = (prob.array() * (1.0 - prob.array())).max(1e-10).matrix();
        Eigen::VectorXd z = eta + ((y - prob).array() / w.array()).matrix();
        Eigen::MatrixXd wx = w.asDiagonal() * design;
        Eigen::MatrixXd xtwx = design.transpose() * wx;
        xtwx.diagonal().array() += 1e-12;
        Eigen::VectorXd next = xtwx.ldlt().solve(design.transpose() * (w.asDiagonal() * z));
        if (next.cwiseAbs().maxCoeff() > kBetaCap) {
            // separation: keep the last stable iterate, scaled under the cap
            double cap = beta.cwiseAbs().maxCoeff();
            if (cap > kBetaCap) beta *= kBetaCap / cap;
            separated = true;
            ++it;
            break;
        }
        double next_ll = logistic_loglik(X, y, next);
        double change = std::fabs(next_ll - ll) / (std::fabs(ll) + 1.0);
        beta = next;
        ll = next_ll;
        if (change < tol) {
            ++it;
            break;
        }
    }

    m.beta = beta;
    m.log_likelihood = logistic_loglik(X, y, beta);
    Eigen::VectorXd eta = design * beta;
    m.fitted = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    m.df = static_cast<int>(p + 1);
    m.iterations = it;
    m.converged = !separated && (p == 0 || it < max_iter);
    return m;
}

CoxEtaStats cox_eta_stats(const Eigen::VectorXd& eta, const Eigen::VectorXd& time,
                          const Eigen::VectorXd& event) {
    const Eigen::Index n = time.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return time[a] > time[b]; });

    CoxEtaStats s;
    s.grad = Eigen::VectorXd::Zero(n);
    s.hess_diag = Eigen::VectorXd::Zero(n);
    s.cumhaz = Eigen::VectorXd::Zero(n);

    // First pass walks times descending, growing the risk-set sum S0; Breslow
    // ties share the full risk set including the tied block.
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n);  // sum over event times <= t_i of d/S0
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n);  // same with 1/S0^2
    double s0 = 0.0;
    struct Block { Eigen::Index lo, hi; double term1, term2; };
    std::vector<Block> blocks;  // descending time order
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        double t = time[order[i]];
        int d = 0;
        double sum_eta = 0.0;
        while (j < n && time[order[j]] == t) {
            s0 += std::exp(eta[order[j]]);
            if (event[order[j]] == 1.0) {
                d += 1;
                sum_eta += eta[order[j]];
            }
            ++j;
        }
        Block blk{i, j, 0.0, 0.0};
        if (d > 0) {
            s.loglik += sum_eta - d * std::log(s0);
            blk.term1 = d / s0;
            blk.term2 = d / (s0 * s0);
        }
        blocks.push_back(blk);
        i = j;
    }
    // Second pass in ascending time accumulates the baseline-hazard sums, so a
    // sample's c1/c2 cover exactly the event times <= its own time.
    double acc1 = 0.0, acc2 = 0.0;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        acc1 += it->term1;
        acc2 += it->term2;
        for (Eigen::Index k = it->lo; k < it->hi; ++k) {
            c1[order[k]] = acc1;
            c2[order[k]] = acc2;
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        double ee = std::exp(eta[k]);
        s.cumhaz[k] = c1[k];
        s.grad[k] = event[k] - ee * c1[k];
        s.hess_diag[k] = ee * c1[k] - ee * ee * c2[k];
    }
    return s;
}

double cox_partial_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                          const Eigen::VectorXd& time, const Eigen::VectorXd& event) {
    Eigen::VectorXd eta = X.cols() > 0 ? Eigen::VectorXd(X * beta)
                                       : Eigen::VectorXd::Zero(time.size());
    return cox_eta_stats(eta, time, event).loglik;
}

Eigen::VectorXd cox_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                          const Eigen::VectorXd& time, const Eigen::VectorXd& event) {
    Eigen::VectorXd eta = X.cols() > 0 ? Eigen::VectorXd(X * beta)
                                       : Eigen::VectorXd::Zero(time.size());
    return X.transpose() * cox_eta_stats(eta, time, event).grad;
}

namespace {

// Full Newton derivatives of the Breslow partial log-likelihood.
struct CoxDerivs {
    double ll;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;  // negative Hessian (positive semidefinite)
};

CoxDerivs cox_beta_derivs(const Eigen::MatrixXd& X, const Eigen::VectorXd& eta,
                          const Eigen::VectorXd& time, const Eigen::VectorXd& event) {
    const Eigen::Index n = time.size(), p = X.cols();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return time[a] > time[b]; });

    CoxDerivs d{0.0, Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, p)};
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        double t = time[order[i]];
        int nevents = 0;
        while (j < n && time[order[j]] == t) {
            Eigen::Index k = order[j];
            double w = std::exp(eta[k]);
            s0 += w;
            s1 += w * X.row(k).transpose();
            s2 += w * X.row(k).transpose() * X.row(k);
            ++j;
        }
        for (Eigen::Index q = i; q < j; ++q) {
            Eigen::Index k = order[q];
            if (event[k] != 1.0) continue;
            ++nevents;
            d.ll += eta[k];
            d.grad += X.row(k).transpose();
        }
        if (nevents > 0) {
            Eigen::VectorXd mu = s1 / s0;
            d.ll -= nevents * std::log(s0);
            d.grad -= nevents * mu;
            d.hess += nevents * (s2 / s0 - mu * mu.transpose());
        }
        i = j;
    }
    return d;
}

}  // namespace

FittedModel fit_cox(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                    const Eigen::VectorXd& event, int max_iter, double tol) {
    if (event.sum() == 0.0)
        throw std::invalid_argument("fit_cox: no observed events, model undefined");

    const Eigen::Index p = X.cols();
    FittedModel m;
    m.family = Family::Cox;
    m.has_intercept = false;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(time.size());
    CoxDerivs d = cox_beta_derivs(X, eta, time, event);
    double ll = d.ll;
    int it = 0;
    bool capped = false;
    for (; it < max_iter && p > 0; ++it) {
        Eigen::MatrixXd h = d.hess;
        h.diagonal().array() += 1e-10;
        Eigen::VectorXd step = h.ldlt().solve(d.grad);
        double scale = 1.0;
        Eigen::VectorXd next;
        double next_ll;
        for (int half = 0; half < 30; ++half) {
            next = beta + scale * step;
            next_ll = cox_partial_loglik(X, next, time, event);
            if (next_ll >= ll - 1e-12) break;
            scale *= 0.5;
        }
        if (next.cwiseAbs().maxCoeff() > kBetaCap) {
            double cap = beta.cwiseAbs().maxCoeff();
            if (cap > kBetaCap) beta *= kBetaCap / cap;
            capped = true;
            ++it;
            break;
        }
        double change = std::fabs(next_ll - ll) / (std::fabs(ll) + 1.0);
        beta = next;
        ll = next_ll;
        eta = X * beta;
        d = cox_beta_derivs(X, eta, time, event);
        if (change < tol) {
            ++it;
            break;
        }
    }

    m.beta = beta;
    m.fitted = p > 0 ? Eigen::VectorXd(X * beta) : Eigen::VectorXd::Zero(time.size());
    m.log_likelihood = cox_partial_loglik(X, beta, time, event);
    m.df = static_cast<int>(p);
    m.iterations = it;
    m.converged = !capped && (p == 0 || it < max_iter);
    return m;
}

FittedModel fit_family(Family family, const Eigen::MatrixXd& X, const Outcome& outcome) {
    switch (family) {
        case Family::Linear:
            return fit_linear(X, outcome.y);
        case Family::Logistic:
            return fit_logistic(X, outcome.y);
        case Family::Cox:
            return fit_cox(X, outcome.time, outcome.event);
    }
    throw std::logic_error("unreachable");
}

Eigen::VectorXd residuals(const FittedModel& m, const Eigen::MatrixXd& X,
                          const Outcome& outcome, ResidualKind kind) {
    const Eigen::Index n = outcome.n();
    switch (m.family) {
        case Family::Linear: {
            if (kind == ResidualKind::Martingale)
                throw std::invalid_argument("martingale residuals need a Cox model");
            Eigen::VectorXd raw = outcome.y - m.fitted;
            if (kind == ResidualKind::Raw || kind == ResidualKind::Deviance) return raw;
            double sigma = std::sqrt(std::max(m.rss / n, 1e-300));
            return raw / sigma;  // Pearson
        }
        case Family::Logistic: {
            if (kind == ResidualKind::Martingale)
                throw std::invalid_argument("martingale residuals need a Cox model");
            Eigen::VectorXd out(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                double y = outcome.y[i], p = std::clamp(m.fitted[i], 1e-12, 1.0 - 1e-12);
                double raw = y - p;
                if (kind == ResidualKind::Raw) {
                    out[i] = raw;
                } else if (kind == ResidualKind::Pearson) {
                    out[i] = raw / std::sqrt(p * (1.0 - p));
                } else {
                    double dev = -2.0 * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
                    out[i] = (raw >= 0 ? 1.0 : -1.0) * std::sqrt(std::max(dev, 0.0));
                }
            }
            return out;
        }
        case Family::Cox: {
            if (kind != ResidualKind::Martingale)
                throw std::invalid_argument("Cox models expose martingale residuals");
            (void)X;
            return cox_eta_stats(m.fitted, outcome.time, outcome.event).grad;
        }
    }
    throw std::logic_error("unreachable");
}

double log_likelihood_ratio(const FittedModel& m_new, const FittedModel& m_old) {
    if (m_new.family != m_old.family)
        throw std::invalid_argument("log_likelihood_ratio: family mismatch");
    return std::max(0.0, 2.0 * (m_new.log_likelihood - m_old.log_likelihood));
}

}  // namespace gomp
