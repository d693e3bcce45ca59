#include "gomp/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gomp/metrics.hpp"

namespace gomp {

namespace {

// nearest-rank quantile on a copy
double quantile(Eigen::VectorXd v, double q) {
    std::sort(v.data(), v.data() + v.size());
    Eigen::Index idx = static_cast<Eigen::Index>(q * (v.size() - 1));
    return v[idx];
}

}  // namespace

SimData generate(const SimSpec& spec) {
    if (spec.n_true > spec.p || spec.snr <= 0)
        throw std::invalid_argument("generate: invalid SimSpec");
    if (spec.outcome_kind == OutcomeKind::Survival)
        throw std::invalid_argument("generate: survival outcomes are not simulated");

    const Eigen::Index n = spec.n;
    const int p = spec.p;
    std::mt19937_64 rng(sub_seed(spec.seed, 0x73696dull));
    std::normal_distribution<double> gauss(0.0, 1.0);

    SimData out;
    out.data.features.resize(p);
    for (int j = 0; j < p; ++j) {
        FeatureColumn& f = out.data.features[j];
        f.name = "x" + std::to_string(j);
        f.kind = FeatureKind::Continuous;
        f.values.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) f.values[i] = gauss(rng);
    }

    // support drawn uniformly without replacement
    {
        std::vector<int> idx(p);
        std::iota(idx.begin(), idx.end(), 0);
        for (int t = 0; t < spec.n_true; ++t) {
            std::uniform_int_distribution<int> pick(t, p - 1);
            std::swap(idx[t], idx[pick(rng)]);
        }
        out.true_support.assign(idx.begin(), idx.begin() + spec.n_true);
        std::sort(out.true_support.begin(), out.true_support.end());
    }

    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::bernoulli_distribution flip(0.5);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    for (int j : out.true_support) {
        double beta = mag(rng) * (flip(rng) ? 1.0 : -1.0);
        eta += beta * out.data.features[j].values;
    }

    if (spec.outcome_kind == OutcomeKind::Continuous) {
        double var_eta = (eta.array() - eta.mean()).square().sum() / (n - 1);
        double sigma = spec.n_true > 0 ? std::sqrt(var_eta / spec.snr) : 1.0;
        out.data.outcome.kind = OutcomeKind::Continuous;
        out.data.outcome.y.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            out.data.outcome.y[i] = eta[i] + sigma * gauss(rng);
    } else {
        out.data.outcome.kind = OutcomeKind::Binary;
        out.data.outcome.y.resize(n);
        if (spec.binary_mechanism == BinaryMechanism::LogisticLink) {
            // strong but not separable signal: eta standardized to Var = 4
            double mean = eta.mean();
            double sd = spec.n_true > 0
                            ? std::sqrt((eta.array() - mean).square().sum() / (n - 1))
                            : 1.0;
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (Eigen::Index i = 0; i < n; ++i) {
                double z = spec.n_true > 0 ? 2.0 * (eta[i] - mean) / sd : 0.0;
                double prob = 1.0 / (1.0 + std::exp(-z));
                out.data.outcome.y[i] = unif(rng) < prob ? 1.0 : 0.0;
            }
        } else {
            Eigen::VectorXd latent(n);
            double var_eta = spec.n_true > 0
                                 ? (eta.array() - eta.mean()).square().sum() / (n - 1)
                                 : 0.0;
            double sigma = spec.n_true > 0 ? std::sqrt(var_eta / spec.snr) : 1.0;
            for (Eigen::Index i = 0; i < n; ++i) latent[i] = eta[i] + sigma * gauss(rng);
            double med = quantile(latent, 0.5);
            for (Eigen::Index i = 0; i < n; ++i)
                out.data.outcome.y[i] = latent[i] > med ? 1.0 : 0.0;
        }
    }

    if (spec.categorical_fraction > 0.0) {
        int n_cat = static_cast<int>(std::lround(spec.categorical_fraction * p));
        std::vector<int> idx(p);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (int t = 0; t < n_cat; ++t) {
            FeatureColumn& f = out.data.features[idx[t]];
            double q33 = quantile(f.values, 0.33);
            double q66 = quantile(f.values, 0.66);
            // left-closed intervals: a value equal to a cut point goes up
            for (Eigen::Index i = 0; i < n; ++i)
                f.values[i] = f.values[i] < q33 ? 0.0 : (f.values[i] < q66 ? 1.0 : 2.0);
            f.kind = FeatureKind::Categorical;
            f.level_count = 3;
            f.level_labels = {"0", "1", "2"};
        }
    }

    return out;
}

}  // namespace gomp
