#include "gomp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace gomp {

std::uint64_t sub_seed(std::uint64_t master, std::uint64_t unit) {
    // splitmix64 round over the combined value
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (unit + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double auc(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
    const Eigen::Index n = scores.size();
    double npos = labels.sum(), nneg = n - npos;
    if (npos == 0 || nneg == 0)
        throw std::invalid_argument("auc: both classes required");

    // rank-sum with midranks for score ties
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double midrank = 0.5 * (i + j - 1) + 1.0;
        for (Eigen::Index k = i; k < j; ++k)
            if (labels[order[k]] == 1.0) rank_sum_pos += midrank;
        i = j;
    }
    return (rank_sum_pos - npos * (npos + 1.0) / 2.0) / (npos * nneg);
}

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& y) {
    return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

double c_index(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
               const Eigen::VectorXd& event) {
    const Eigen::Index n = risk.size();
    double comparable = 0.0, concordant = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (event[i] != 1.0) continue;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (time[i] >= time[j] || i == j) continue;
            comparable += 1.0;
            if (risk[i] > risk[j])
                concordant += 1.0;
            else if (risk[i] == risk[j])
                concordant += 0.5;
        }
    }
    if (comparable == 0.0)
        throw std::invalid_argument("c_index: no comparable pairs");
    return concordant / comparable;
}

SelectionQuality selection_quality(const std::vector<int>& selected,
                                   const std::vector<int>& true_set) {
    SelectionQuality q;
    if (true_set.empty() && selected.empty()) return q;
    long hits = 0;
    for (int s : selected)
        if (std::find(true_set.begin(), true_set.end(), s) != true_set.end()) ++hits;
    q.tpr = true_set.empty() ? 0.0 : static_cast<double>(hits) / true_set.size();
    q.fdr = static_cast<double>(selected.size() - hits) /
            std::max<std::size_t>(selected.size(), 1);
    return q;
}

double sign_permutation_test(const Eigen::VectorXd& diffs, int n_perm, int n_repeat,
                             std::uint64_t seed) {
    const Eigen::Index n = diffs.size();
    if (n == 0) throw std::invalid_argument("sign_permutation_test: empty diffs");
    double observed = std::fabs(diffs.mean());
    if (observed == 0.0 && diffs.cwiseAbs().maxCoeff() == 0.0) return 1.0;

    double p_sum = 0.0;
    for (int rep = 0; rep < n_repeat; ++rep) {
        std::mt19937_64 rng(sub_seed(seed, rep));
        int exceed = 0;
        for (int perm = 0; perm < n_perm; ++perm) {
            double s = 0.0;
            std::uint64_t bits = 0;
            int have = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (have == 0) {
                    bits = rng();
                    have = 64;
                }
                s += (bits & 1) ? diffs[i] : -diffs[i];
                bits >>= 1;
                --have;
            }
            if (std::fabs(s / n) >= observed) ++exceed;
        }
        p_sum += static_cast<double>(1 + exceed) / (n_perm + 1);
    }
    return p_sum / n_repeat;
}

}  // namespace gomp
