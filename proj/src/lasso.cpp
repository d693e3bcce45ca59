#include "gomp/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace gomp {

namespace {

constexpr double kTol = 1e-7;       // max coefficient change per sweep
constexpr int kMaxSweeps = 100000;
constexpr double kBetaCap = 30.0;   // separation guard

std::vector<int> candidate_features(const Dataset& d) {
    std::vector<int> idx;
    for (int j = 0; j < d.p(); ++j)
        if (!d.features[j].excluded) idx.push_back(j);
    return idx;
}

int feature_support(const Eigen::VectorXd& beta, const std::vector<int>& col_feature) {
    std::set<int> s;
    for (Eigen::Index c = 0; c < beta.size(); ++c)
        if (beta[c] != 0.0) s.insert(col_feature[c]);
    return static_cast<int>(s.size());
}

// One weighted-quadratic coordinate-descent solve:
//   minimize (1/2) sum_i w_i (z_i - b0 - X beta)_i^2 + penalty * sum_j |beta_j|
// with the intercept unpenalized (or absent). Warm-started in place.
void cd_quadratic(const Eigen::MatrixXd& X, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& z, double penalty, bool intercept,
                  double& b0, Eigen::VectorXd& beta) {
    const Eigen::Index p = X.cols();
    Eigen::VectorXd denom(p);
    for (Eigen::Index j = 0; j < p; ++j)
        denom[j] = (w.array() * X.col(j).array().square()).sum();
    double wsum = w.sum();

    Eigen::VectorXd r = z - X * beta;
    if (intercept) r.array() -= b0;

    auto update_intercept = [&]() {
        if (!intercept) return 0.0;
        double shift = (w.array() * r.array()).sum() / wsum;
        b0 += shift;
        r.array() -= shift;
        return std::fabs(shift);
    };
    auto update_coord = [&](Eigen::Index j) {
        if (denom[j] <= 0.0) return 0.0;
        double zj = (w.array() * X.col(j).array() * r.array()).sum() + denom[j] * beta[j];
        double next = soft_threshold(zj, penalty) / denom[j];
        double delta = next - beta[j];
        if (delta != 0.0) {
            r -= delta * X.col(j);
            beta[j] = next;
        }
        return std::fabs(delta);
    };

    std::vector<Eigen::Index> active;
    int sweeps = 0;
    while (sweeps < kMaxSweeps) {
        // full sweep doubles as the KKT check: any coordinate that should
        // enter does so here
        double change = update_intercept();
        for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, update_coord(j));
        ++sweeps;
        if (change < kTol) break;

        active.clear();
        for (Eigen::Index j = 0; j < p; ++j)
            if (beta[j] != 0.0) active.push_back(j);
        while (sweeps < kMaxSweeps) {
            double ch = update_intercept();
            for (Eigen::Index j : active) ch = std::max(ch, update_coord(j));
            ++sweeps;
            if (ch < kTol) break;
        }
    }
}

struct IrlsState {
    Eigen::VectorXd w;
    Eigen::VectorXd z;
};

}  // namespace

double soft_threshold(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

std::vector<double> lambda_grid(double lambda_max, int count, double ratio) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = lambda_max * std::pow(ratio, count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
    return g;
}

LambdaPath lasso_linear(const Dataset& d, std::vector<double> lambdas, int n_lambda) {
    const Eigen::VectorXd& y = d.outcome.y;
    DesignInfo design = build_design(d, candidate_features(d));
    const Eigen::MatrixXd& X = design.X;
    const Eigen::Index n = y.size(), p = X.cols();

    double ybar = y.mean();
    if (lambdas.empty()) {
        double lmax = 0.0;
        for (Eigen::Index j = 0; j < p; ++j)
            lmax = std::max(lmax, 2.0 * std::fabs(X.col(j).dot((y.array() - ybar).matrix())));
        // tiny margin so the path head is exactly zero despite summation-order noise
        lambdas = lambda_grid(lmax * (1.0 + 1e-9), n_lambda, n < p ? 1e-2 : 1e-3);
    }

    LambdaPath path;
    path.family = Family::Linear;
    path.col_feature = design.col_feature;
    path.lambdas = lambdas;
    path.coefficients.setZero(lambdas.size(), p);
    path.intercepts.assign(lambdas.size(), 0.0);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    double b0 = ybar;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    for (size_t l = 0; l < lambdas.size(); ++l) {
        // objective sum (y - b0 - Xb)^2 + lambda |b|_1 == (1/2)-weighted
        // quadratic with w = 2, penalty lambda; equivalently w = 1 and lambda/2
        cd_quadratic(X, w, y, lambdas[l] / 2.0, true, b0, beta);
        path.coefficients.row(l) = beta;
        path.intercepts[l] = b0;
        path.support_sizes.push_back(feature_support(beta, path.col_feature));
    }
    return path;
}

namespace {

IrlsState logistic_irls_state(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              double b0, const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = (X * beta).array() + b0;
    Eigen::VectorXd prob = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    IrlsState s;
    s.w = (prob.array() * (1.0 - prob.array())).max(1e-5).matrix();
    s.z = eta + ((y - prob).array() / s.w.array()).matrix();
    return s;
}

IrlsState cox_irls_state(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                         const Eigen::VectorXd& time, const Eigen::VectorXd& event) {
    Eigen::VectorXd eta = X.cols() > 0 ? Eigen::VectorXd(X * beta)
                                       : Eigen::VectorXd::Zero(time.size());
    CoxEtaStats st = cox_eta_stats(eta, time, event);
    IrlsState s;
    s.w = st.hess_diag.cwiseMax(1e-5);
    s.z = eta + (st.grad.array() / s.w.array()).matrix();
    return s;
}

LambdaPath lasso_irls(Family family, const Dataset& d, std::vector<double> lambdas,
                      int n_lambda) {
    DesignInfo design = build_design(d, candidate_features(d));
    const Eigen::MatrixXd& X = design.X;
    const Eigen::Index n = d.n(), p = X.cols();
    const bool intercept = family == Family::Logistic;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    double b0 = 0.0;
    if (family == Family::Logistic) {
        double n1 = d.outcome.y.sum();
        b0 = std::log(n1 / (n - n1));
    }

    if (lambdas.empty()) {
        // |gradient of the unpenalized loss| at the null fit
        Eigen::VectorXd g0;
        if (family == Family::Logistic) {
            double ybar = d.outcome.y.mean();
            g0 = X.transpose() * (d.outcome.y.array() - ybar).matrix();
        } else {
            CoxEtaStats st = cox_eta_stats(Eigen::VectorXd::Zero(n), d.outcome.time,
                                           d.outcome.event);
            g0 = X.transpose() * st.grad;
        }
        double lmax = g0.cwiseAbs().maxCoeff();
        lambdas = lambda_grid(lmax * (1.0 + 1e-9), n_lambda, n < p ? 1e-2 : 1e-3);
    }

    LambdaPath path;
    path.family = family;
    path.col_feature = design.col_feature;
    path.coefficients.setZero(lambdas.size(), p);
    path.intercepts.assign(lambdas.size(), 0.0);

    for (size_t l = 0; l < lambdas.size(); ++l) {
        for (int outer = 0; outer < 100; ++outer) {
            Eigen::VectorXd prev = beta;
            double prev_b0 = b0;
            IrlsState s = family == Family::Logistic
                              ? logistic_irls_state(X, d.outcome.y, b0, beta)
                              : cox_irls_state(X, beta, d.outcome.time, d.outcome.event);
            cd_quadratic(X, s.w, s.z, lambdas[l], intercept, b0, beta);
            double change = (beta - prev).cwiseAbs().maxCoeff();
            if (intercept) change = std::max(change, std::fabs(b0 - prev_b0));
            if (change < kTol) break;
        }
        if (beta.cwiseAbs().maxCoeff() > kBetaCap) {
            path.truncated = true;
            break;
        }
        path.lambdas.push_back(lambdas[l]);
        path.coefficients.row(l) = beta;
        path.intercepts[l] = b0;
        path.support_sizes.push_back(feature_support(beta, path.col_feature));
    }
    path.coefficients.conservativeResize(path.lambdas.size(), p);
    path.intercepts.resize(path.lambdas.size());
    return path;
}

}  // namespace

LambdaPath lasso_logistic(const Dataset& d, std::vector<double> lambdas, int n_lambda) {
    if (d.outcome.kind != OutcomeKind::Binary)
        throw std::invalid_argument("lasso_logistic: binary outcome required");
    return lasso_irls(Family::Logistic, d, std::move(lambdas), n_lambda);
}

LambdaPath lasso_cox(const Dataset& d, std::vector<double> lambdas, int n_lambda) {
    if (d.outcome.kind != OutcomeKind::Survival)
        throw std::invalid_argument("lasso_cox: survival outcome required");
    if (d.outcome.event.sum() == 0.0)
        throw std::invalid_argument("lasso_cox: no observed events");
    return lasso_irls(Family::Cox, d, std::move(lambdas), n_lambda);
}

LambdaPath lasso_path(Family family, const Dataset& d, std::vector<double> lambdas,
                      int n_lambda) {
    switch (family) {
        case Family::Linear: return lasso_linear(d, std::move(lambdas), n_lambda);
        case Family::Logistic: return lasso_logistic(d, std::move(lambdas), n_lambda);
        case Family::Cox: return lasso_cox(d, std::move(lambdas), n_lambda);
    }
    throw std::logic_error("unreachable");
}

int match_support_size(const LambdaPath& path, int target) {
    int best = 0;
    int best_diff = std::abs(path.support_sizes[0] - target);
    for (int l = 1; l < path.n_lambda(); ++l) {
        int diff = std::abs(path.support_sizes[l] - target);
        if (diff < best_diff) {
            best = l;
            best_diff = diff;
        }
    }
    return best;
}

Eigen::VectorXd path_linear_predictor(const LambdaPath& path, const Eigen::MatrixXd& X,
                                      int index) {
    Eigen::VectorXd eta = X * path.coefficients.row(index).transpose();
    eta.array() += path.intercepts[index];
    return eta;
}

}  // namespace gomp
