#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace gomp {

// Deterministic per-unit seed derived from (master seed, unit index), so
// parallel and serial schedules agree.
std::uint64_t sub_seed(std::uint64_t master, std::uint64_t unit);

// Mann-Whitney AUC; ties count 1/2. Throws if a class is missing.
double auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& y);

// Harrell's concordance. Comparable pair: time_i < time_j with event_i = 1;
// risk ties count 1/2. Throws when no pair is comparable.
double c_index(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
               const Eigen::VectorXd& event);

struct SelectionQuality {
    double tpr = 0.0;
    double fdr = 0.0;
};
SelectionQuality selection_quality(const std::vector<int>& selected,
                                   const std::vector<int>& true_set);

// Paired sign-permutation test on mean(diffs), two-sided with +1 smoothing,
// averaged over n_repeat repetitions.
double sign_permutation_test(const Eigen::VectorXd& diffs, int n_perm = 999,
                             int n_repeat = 1000, std::uint64_t seed = 0);

}  // namespace gomp
