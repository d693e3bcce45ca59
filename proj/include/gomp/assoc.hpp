#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gomp/dataset.hpp"

namespace gomp {

enum class ContinuousAssoc { Pearson, Spearman };

struct AssocScore {
    int feature_index = -1;
    double log_p = 0.0;    // natural log; -inf is the "beyond precision" sentinel
    double statistic = 0.0;
    int df1 = 0, df2 = 0;
};

// Strict weak order on association strength: smaller log_p first, then larger
// |statistic| (resolves -inf sentinel ties), then lower feature index. Makes
// every scan reduction associative and thread-count independent.
bool stronger(const AssocScore& a, const AssocScore& b);

// Correlation test against the exact t reference with df = n-2.
AssocScore pearson_assoc(const Eigen::VectorXd& r, const FeatureColumn& x);
// Pearson on midrank-transformed data.
AssocScore spearman_assoc(const Eigen::VectorXd& r, const FeatureColumn& x);
// One-way ANOVA of r grouped by the levels of a categorical feature.
AssocScore anova_assoc(const Eigen::VectorXd& r, const FeatureColumn& x);

// Per-feature dispatch: Pearson/Spearman for continuous, ANOVA for categorical.
AssocScore assoc_feature(const Eigen::VectorXd& r, const Dataset& d, int feature,
                         ContinuousAssoc cont);

// Best association over all candidate features not excluded and not selected.
// Returns nullopt when no candidates remain. The OpenMP variant partitions
// candidates across threads; both produce identical results.
std::optional<AssocScore> scan_candidates_serial(const Eigen::VectorXd& r, const Dataset& d,
                                                 const std::vector<char>& excluded,
                                                 ContinuousAssoc cont = ContinuousAssoc::Pearson);
std::optional<AssocScore> scan_candidates(const Eigen::VectorXd& r, const Dataset& d,
                                          const std::vector<char>& excluded,
                                          ContinuousAssoc cont = ContinuousAssoc::Pearson);

}  // namespace gomp
