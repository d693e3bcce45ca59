#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gomp/dataset.hpp"
#include "gomp/lasso.hpp"
#include "gomp/select.hpp"

namespace gomp {

enum class MetricKind { Auc, Mse, CIndex };
MetricKind default_metric(OutcomeKind kind);
const char* metric_name(MetricKind m);

// Fold ids in [0, k), sizes within one of each other; with stratification the
// per-fold class ratios stay within one sample of the global ratio.
std::vector<int> kfold_split(Eigen::Index n, int k, const std::vector<int>* stratify_labels,
                             std::uint64_t seed);

Dataset subset_rows(const Dataset& d, const std::vector<int>& rows);

// Rescale continuous columns by previously recorded (train-side) statistics
// and copy the excluded flags.
void apply_standardization(const StandardizationRecord& rec, Dataset& d);

struct CvMethodConfig {
    bool use_gomp = true;  // false: plain LASSO path
    Family family = Family::Linear;
    ResidualKind residual_kind = ResidualKind::Raw;
    ContinuousAssoc assoc = ContinuousAssoc::Pearson;
    // gOMP arm
    StopRuleKind rule_kind = StopRuleKind::LikelihoodRatioThreshold;
    std::vector<double> stop_grid;  // one configuration per value
    int relambda = 0;  // >0: re-regularize the selected set over this many lambdas
    // LASSO arm
    int lambda_count = 100;
};

struct CvReport {
    std::vector<int> fold_assignments;
    Eigen::MatrixXd P;  // n x M out-of-fold predictions
    std::vector<std::string> config_labels;
    std::vector<double> per_config_metric;  // natural orientation
    MetricKind metric = MetricKind::Mse;
    int best_config = 0;
    double naive_best_metric = 0.0;
    double bbc_metric = 0.0;
    // per fold, per configuration (gOMP arm; empty lists for LASSO)
    std::vector<std::vector<std::vector<int>>> selected_sets;
    std::vector<int> flagged_folds;  // test folds with a single class
};

CvReport run_cv(const Dataset& d, const CvMethodConfig& config, int k, std::uint64_t seed,
                int bbc_iters = 1000, bool stratify = true);

// Bootstrap bias correction over a prediction matrix: returns
// (naive best metric, corrected metric), both in natural orientation.
std::pair<double, double> bbc(const Eigen::MatrixXd& P, const Outcome& outcome,
                              MetricKind metric, int B, std::uint64_t seed);

}  // namespace gomp
