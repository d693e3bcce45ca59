#pragma once

#include <cstdint>
#include <vector>

#include "gomp/dataset.hpp"

namespace gomp {

enum class BinaryMechanism {
    LogisticLink,    // Bernoulli(logistic(eta)), eta rescaled to Var = 4
    LatentThreshold  // y = 1{eta + noise > median}
};

struct SimSpec {
    Eigen::Index n = 500;
    int p = 2000;
    int n_true = 10;
    double snr = 32.5;
    OutcomeKind outcome_kind = OutcomeKind::Continuous;  // Continuous or Binary
    double categorical_fraction = 0.0;  // discretized at the 33%/66% quantiles
    BinaryMechanism binary_mechanism = BinaryMechanism::LogisticLink;
    std::uint64_t seed = 0;
};

struct SimData {
    Dataset data;
    std::vector<int> true_support;  // sorted feature indices
};

// i.i.d. standard normal features; a uniformly drawn support of size n_true
// with coefficients uniform on +/-[0.5, 1.5]; Gaussian noise scaled so that
// Var(signal)/Var(noise) = snr. A categorical_fraction of the columns is
// discretized into three levels on left-closed quantile intervals.
SimData generate(const SimSpec& spec);

}  // namespace gomp
