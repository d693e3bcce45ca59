#pragma once

#include <Eigen/Dense>

#include "gomp/dataset.hpp"

namespace gomp {

enum class Family { Linear, Logistic, Cox };
enum class ResidualKind { Raw, Pearson, Deviance, Martingale };

ResidualKind default_residual(Family f);

struct FittedModel {
    Family family = Family::Linear;
    // Intercept first when has_intercept, then one entry per design column.
    // Columns dropped for rank deficiency keep a zero coefficient.
    Eigen::VectorXd beta;
    double log_likelihood = 0.0;
    int df = 0;
    // yhat for Linear, probabilities for Logistic, linear predictor for Cox.
    Eigen::VectorXd fitted;
    bool converged = true;
    int iterations = 0;
    bool has_intercept = false;
    std::vector<int> dropped_cols;
    double rss = 0.0;  // Linear only
};

// Design submatrix for a selected feature subset. Categorical features expand
// to one-hot dummies with the reference level (code 0) dropped; dummies are
// not rescaled. col_feature maps each design column back to its feature index.
struct DesignInfo {
    Eigen::MatrixXd X;
    std::vector<int> col_feature;
};
DesignInfo build_design(const Dataset& d, const std::vector<int>& selected);

FittedModel fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       bool intercept = true);
FittedModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         int max_iter = 100, double tol = 1e-8);
FittedModel fit_cox(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                    const Eigen::VectorXd& event, int max_iter = 100, double tol = 1e-8);

// Dispatch on family; the outcome supplies y or time/event.
FittedModel fit_family(Family family, const Eigen::MatrixXd& X, const Outcome& outcome);

Eigen::VectorXd residuals(const FittedModel& m, const Eigen::MatrixXd& X,
                          const Outcome& outcome, ResidualKind kind);

// 2*(ll_new - ll_old), clamped at 0 for float noise on identical fits.
double log_likelihood_ratio(const FittedModel& m_new, const FittedModel& m_old);

// --- likelihood internals, shared with the lasso solvers and tests ---

// beta includes the intercept as its first entry.
double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta);
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& beta);

// Per-sample Breslow quantities at a given linear predictor.
// grad is d(pll)/d(eta_i) = event_i - exp(eta_i) * cumhaz_i, which is also the
// martingale residual vector; hess_diag is the (positive) diagonal of the
// negative Hessian of the partial log-likelihood w.r.t. eta.
struct CoxEtaStats {
    double loglik = 0.0;
    Eigen::VectorXd grad;
    Eigen::VectorXd hess_diag;
    Eigen::VectorXd cumhaz;  // Breslow baseline cumulative hazard at each sample's time
};
CoxEtaStats cox_eta_stats(const Eigen::VectorXd& eta, const Eigen::VectorXd& time,
                          const Eigen::VectorXd& event);

double cox_partial_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                          const Eigen::VectorXd& time, const Eigen::VectorXd& event);
Eigen::VectorXd cox_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                          const Eigen::VectorXd& time, const Eigen::VectorXd& event);

}  // namespace gomp
