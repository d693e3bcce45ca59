#pragma once

#include <optional>
#include <vector>

#include "gomp/models.hpp"

namespace gomp {

enum class StopRuleKind {
    LikelihoodRatioThreshold,  // chi-squared critical value, quoted at 1 df
    AdjustedR2Increment,       // Linear only
    BicDrop,
    ResidualNorm,
    MaxFeatures,
};

struct StoppingRule {
    StopRuleKind kind = StopRuleKind::LikelihoodRatioThreshold;
    double value = 3.84;
    // Optional conjunction with a feature-count cap, applied before each step.
    std::optional<int> max_features;

    static StoppingRule lr_threshold(double t) { return {StopRuleKind::LikelihoodRatioThreshold, t, {}}; }
    static StoppingRule adj_r2(double gain) { return {StopRuleKind::AdjustedR2Increment, gain, {}}; }
    static StoppingRule bic_drop(double drop) { return {StopRuleKind::BicDrop, drop, {}}; }
    static StoppingRule residual_norm(double eps) { return {StopRuleKind::ResidualNorm, eps, {}}; }
    static StoppingRule max_features_rule(int k) {
        StoppingRule r{StopRuleKind::MaxFeatures, 0.0, k};
        return r;
    }
};

double bic(const FittedModel& m, Eigen::Index n);

// 1 - (1 - R^2)(n-1)/(n-df), from the Gaussian-MLE RSS.
double adjusted_r2(const FittedModel& linear, const Eigen::VectorXd& y);

// Single entry point for the loop guard. With m_prev == nullptr this is the
// pre-selection check (residual norm / feature cap; statistical rules always
// continue). With m_prev set it judges whether the last addition was worth it;
// delta_df is the number of coefficients the step added. Multi-df steps are
// compared at the same significance level as the 1-df threshold.
bool should_continue(const StoppingRule& rule, const FittedModel* m, const FittedModel* m_prev,
                     const Eigen::VectorXd& r, const Eigen::VectorXd& y, Eigen::Index n,
                     int n_selected, int delta_df);

// The hyper-parameter grids: chi-squared critical values between the 0.95 and
// 0.99 quantiles at 1 df, and equidistant adjusted-R2 gains in [0.0005, 0.005].
std::vector<double> lr_threshold_grid(int count = 10);
std::vector<double> adj_r2_grid(int count = 10);

}  // namespace gomp
