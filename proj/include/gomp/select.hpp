#pragma once

#include <cstdint>
#include <vector>

#include "gomp/assoc.hpp"
#include "gomp/models.hpp"
#include "gomp/stopping.hpp"

namespace gomp {

enum class StopReason { RuleStop, Exhausted, ResidualSmall, MaxFeatures };
const char* stop_reason_name(StopReason r);

struct StepRecord {
    int feature_index = -1;
    double log_p = 0.0;         // association that picked the feature
    double statistic = 0.0;
    double lr_stat = 0.0;       // vs the previous model
    double bic_value = 0.0;
    double prev_bic = 0.0;
    double adj_r2 = 0.0;        // Linear only
    double prev_adj_r2 = 0.0;
    double residual_norm2 = 0.0;       // after the refit
    double prev_residual_norm2 = 0.0;  // before the step
    int delta_df = 1;
    bool converged = true;
};

struct SelectionResult {
    std::vector<int> selected;
    std::vector<StepRecord> steps;
    FittedModel final_model;
    StopReason stop_reason = StopReason::RuleStop;
    std::uint64_t config_fingerprint = 0;
    // instrumentation for the p*(s+1) work bound
    long model_fits = 0;
    long assoc_evaluations = 0;
};

struct GompConfig {
    Family family = Family::Linear;
    ResidualKind residual_kind = ResidualKind::Raw;
    ContinuousAssoc assoc = ContinuousAssoc::Pearson;
    StoppingRule rule;
    bool parallel_scan = true;
};

std::uint64_t fingerprint(const GompConfig& c);

// Algorithm: greedy max-|<r, X_i>| selection with least-squares refits on
// standardized continuous data, stopping when ||r||^2 <= epsilon.
SelectionResult omp_classic(const Dataset& standardized, double epsilon);

// The generalized engine: model family f, residual extractor, log-p
// association scan, and a statistical stopping rule. A step that fails the
// stopping test is rolled back, so a selection can be empty.
SelectionResult gomp_select(const Dataset& d, const GompConfig& config);

// One result per grid value of config.rule.value. Default: a single run at the
// loosest value, truncated per stricter value (equivalent for forward
// selection since the step sequence does not depend on the threshold);
// independent_runs forces one full run per value instead.
std::vector<SelectionResult> gomp_path(const Dataset& d, const GompConfig& config,
                                       const std::vector<double>& grid,
                                       bool independent_runs = false);

}  // namespace gomp
