#include "gomp/stopping.hpp"

#include <cmath>
#include <stdexcept>

#include "gomp/special.hpp"

namespace gomp {

double bic(const FittedModel& m, Eigen::Index n) {
    return -2.0 * m.log_likelihood + m.df * std::log(static_cast<double>(n));
}

double adjusted_r2(const FittedModel& linear, const Eigen::VectorXd& y) {
    if (linear.family != Family::Linear)
        throw std::invalid_argument("adjusted_r2: Linear family only");
    const double n = static_cast<double>(y.size());
    double tss = (y.array() - y.mean()).square().sum();
    if (tss <= 0.0) return 0.0;
    double r2 = 1.0 - linear.rss / tss;
    return 1.0 - (1.0 - r2) * (n - 1.0) / (n - linear.df);
}

bool should_continue(const StoppingRule& rule, const FittedModel* m, const FittedModel* m_prev,
                     const Eigen::VectorXd& r, const Eigen::VectorXd& y, Eigen::Index n,
                     int n_selected, int delta_df) {
    if (rule.max_features && n_selected >= *rule.max_features) return false;
    if (rule.kind == StopRuleKind::MaxFeatures && !rule.max_features &&
        n_selected >= static_cast<int>(rule.value))
        return false;

    if (m_prev == nullptr) {
        // pre-selection guard
        // MaxFeatures is fully handled by the cap above.
        if (rule.kind == StopRuleKind::ResidualNorm) return r.squaredNorm() > rule.value;
        return true;
    }

    switch (rule.kind) {
        case StopRuleKind::LikelihoodRatioThreshold: {
            double lr = log_likelihood_ratio(*m, *m_prev);
            if (delta_df <= 1)
                return lr > rule.value;
            // Judge multi-dummy steps at the significance level the 1-df
            // threshold encodes, via log p-values.
            return special::log_chi2_upper(lr, delta_df) <
                   special::log_chi2_upper(rule.value, 1.0);
        }
        case StopRuleKind::AdjustedR2Increment: {
            if (m->family != Family::Linear)
                throw std::invalid_argument("AdjustedR2Increment applies to Linear only");
            return adjusted_r2(*m, y) - adjusted_r2(*m_prev, y) > rule.value;
        }
        case StopRuleKind::BicDrop:
            return bic(*m_prev, n) - bic(*m, n) > rule.value;
        case StopRuleKind::ResidualNorm:
        case StopRuleKind::MaxFeatures:
            return true;  // handled pre-selection
    }
    throw std::logic_error("unreachable");
}

std::vector<double> lr_threshold_grid(int count) {
    double lo = special::chi2_quantile(0.95, 1.0);
    double hi = special::chi2_quantile(0.99, 1.0);
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = lo + (hi - lo) * (count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
    return g;
}

std::vector<double> adj_r2_grid(int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = 0.0005 + (0.005 - 0.0005) * (count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
    return g;
}

}  // namespace gomp
