#include "gomp/cv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gomp/metrics.hpp"

namespace gomp {

namespace {

std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<int> non_excluded(const Dataset& d) {
    std::vector<int> idx;
    for (int j = 0; j < d.p(); ++j)
        if (!d.features[j].excluded) idx.push_back(j);
    return idx;
}

double metric_on_rows(MetricKind m, const Eigen::VectorXd& col, const Outcome& outcome,
                      const std::vector<int>& rows) {
    const int nr = static_cast<int>(rows.size());
    Eigen::VectorXd pred(nr);
    for (int i = 0; i < nr; ++i) pred[i] = col[rows[i]];
    switch (m) {
        case MetricKind::Auc: {
            Eigen::VectorXd y(nr);
            for (int i = 0; i < nr; ++i) y[i] = outcome.y[rows[i]];
            return auc(pred, y);
        }
        case MetricKind::Mse: {
            Eigen::VectorXd y(nr);
            for (int i = 0; i < nr; ++i) y[i] = outcome.y[rows[i]];
            return mse(pred, y);
        }
        case MetricKind::CIndex: {
            Eigen::VectorXd t(nr), e(nr);
            for (int i = 0; i < nr; ++i) {
                t[i] = outcome.time[rows[i]];
                e[i] = outcome.event[rows[i]];
            }
            return c_index(pred, t, e);
        }
    }
    throw std::logic_error("unreachable");
}

double oriented(MetricKind m, double v) { return m == MetricKind::Mse ? -v : v; }

Eigen::VectorXd predict_model(const FittedModel& model, const Eigen::MatrixXd& X) {
    Eigen::VectorXd eta;
    if (model.has_intercept) {
        eta = Eigen::VectorXd::Constant(X.rows(), model.beta.size() > 0 ? model.beta[0] : 0.0);
        if (X.cols() > 0) eta += X * model.beta.tail(X.cols());
    } else {
        eta = X.cols() > 0 ? Eigen::VectorXd(X * model.beta)
                           : Eigen::VectorXd::Zero(X.rows());
    }
    if (model.family == Family::Logistic)
        return (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    return eta;
}

}  // namespace

MetricKind default_metric(OutcomeKind kind) {
    switch (kind) {
        case OutcomeKind::Binary: return MetricKind::Auc;
        case OutcomeKind::Continuous: return MetricKind::Mse;
        case OutcomeKind::Survival: return MetricKind::CIndex;
    }
    throw std::logic_error("unreachable");
}

const char* metric_name(MetricKind m) {
    switch (m) {
        case MetricKind::Auc: return "auc";
        case MetricKind::Mse: return "mse";
        case MetricKind::CIndex: return "c-index";
    }
    return "?";
}

std::vector<int> kfold_split(Eigen::Index n, int k, const std::vector<int>* stratify_labels,
                             std::uint64_t seed) {
    if (k < 2 || k > n) throw std::invalid_argument("kfold_split: need 2 <= k <= n");
    std::vector<int> assignment(n, -1);
    std::mt19937_64 rng(sub_seed(seed, 0x6b666f6c64ull));

    if (stratify_labels == nullptr) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index i = 0; i < n; ++i) assignment[order[i]] = static_cast<int>(i % k);
        return assignment;
    }

    // round-robin within each class keeps per-fold ratios within one sample
    std::map<int, std::vector<int>> by_class;
    for (Eigen::Index i = 0; i < n; ++i) by_class[(*stratify_labels)[i]].push_back(static_cast<int>(i));
    int next_fold = 0;
    for (auto& [cls, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        for (int i : idx) {
            assignment[i] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    return assignment;
}

Dataset subset_rows(const Dataset& d, const std::vector<int>& rows) {
    Dataset out;
    const int nr = static_cast<int>(rows.size());
    out.features.reserve(d.features.size());
    for (const auto& f : d.features) {
        FeatureColumn g = f;
        g.values.resize(nr);
        for (int i = 0; i < nr; ++i) g.values[i] = f.values[rows[i]];
        out.features.push_back(std::move(g));
    }
    out.outcome.kind = d.outcome.kind;
    if (d.outcome.kind == OutcomeKind::Survival) {
        out.outcome.time.resize(nr);
        out.outcome.event.resize(nr);
        for (int i = 0; i < nr; ++i) {
            out.outcome.time[i] = d.outcome.time[rows[i]];
            out.outcome.event[i] = d.outcome.event[rows[i]];
        }
    } else {
        out.outcome.y.resize(nr);
        for (int i = 0; i < nr; ++i) out.outcome.y[i] = d.outcome.y[rows[i]];
    }
    return out;
}

void apply_standardization(const StandardizationRecord& rec, Dataset& d) {
    for (size_t j = 0; j < d.features.size(); ++j) {
        FeatureColumn& f = d.features[j];
        if (f.kind != FeatureKind::Continuous) continue;
        f.values = (f.values.array() - rec.mean[j]) / rec.norm[j];
    }
    for (int j : rec.excluded) d.features[j].excluded = true;
}

std::pair<double, double> bbc(const Eigen::MatrixXd& P, const Outcome& outcome,
                              MetricKind metric, int B, std::uint64_t seed) {
    const int n = static_cast<int>(P.rows());
    const int m = static_cast<int>(P.cols());
    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    double naive_best = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < m; ++c)
        naive_best = std::max(naive_best, oriented(metric, metric_on_rows(metric, P.col(c), outcome, all_rows)));

    long redraws = 0;
    const long redraw_cap = 10L * B;
    double corrected_sum = 0.0;
    int done = 0;
    std::uint64_t draw = 0;
    while (done < B) {
        std::mt19937_64 rng(sub_seed(seed, draw++));
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::vector<int> in_rows(n);
        std::vector<char> drawn(n, 0);
        for (int i = 0; i < n; ++i) {
            in_rows[i] = pick(rng);
            drawn[in_rows[i]] = 1;
        }
        std::vector<int> out_rows;
        for (int i = 0; i < n; ++i)
            if (!drawn[i]) out_rows.push_back(i);

        try {
            int best = 0;
            double best_val = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < m; ++c) {
                double v = oriented(metric, metric_on_rows(metric, P.col(c), outcome, in_rows));
                if (v > best_val) {
                    best_val = v;
                    best = c;
                }
            }
            if (out_rows.empty()) throw std::invalid_argument("empty out-of-sample");
            corrected_sum += metric_on_rows(metric, P.col(best), outcome, out_rows);
            ++done;
        } catch (const std::invalid_argument&) {
            if (++redraws > redraw_cap)
                throw std::runtime_error("bbc: too many degenerate bootstrap replicates");
        }
    }
    double naive_natural = metric == MetricKind::Mse ? -naive_best : naive_best;
    return {naive_natural, corrected_sum / B};
}

CvReport run_cv(const Dataset& d, const CvMethodConfig& config, int k, std::uint64_t seed,
                int bbc_iters, bool stratify) {
    const Eigen::Index n = d.n();
    CvReport rep;
    rep.metric = default_metric(d.outcome.kind);

    std::vector<int> labels;
    const std::vector<int>* labels_ptr = nullptr;
    if (stratify && d.outcome.kind != OutcomeKind::Continuous) {
        labels.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            labels[i] = static_cast<int>(d.outcome.kind == OutcomeKind::Binary
                                             ? d.outcome.y[i]
                                             : d.outcome.event[i]);
        labels_ptr = &labels;
    }
    rep.fold_assignments = kfold_split(n, k, labels_ptr, seed);

    // Configuration labels and column count
    const bool gomp_arm = config.use_gomp;
    int M;
    std::vector<double> shared_lambdas;  // LASSO arm: one grid across folds
    if (gomp_arm) {
        M = static_cast<int>(config.stop_grid.size()) * std::max(1, config.relambda);
        for (double v : config.stop_grid) {
            std::string base = "gomp[" + fmt_value(v) + "]";
            if (config.relambda > 0)
                for (int l = 0; l < config.relambda; ++l)
                    rep.config_labels.push_back(base + "+lambda#" + std::to_string(l));
            else
                rep.config_labels.push_back(base);
        }
    } else {
        Standardized full = standardize(d);
        LambdaPath probe = lasso_path(config.family, full.data, {}, config.lambda_count);
        shared_lambdas = probe.lambdas;
        M = static_cast<int>(shared_lambdas.size());
        for (double l : shared_lambdas)
            rep.config_labels.push_back("lasso[" + fmt_value(l) + "]");
    }

    rep.P.setZero(n, M);
    rep.selected_sets.assign(k, {});

    for (int fold = 0; fold < k; ++fold) {
        std::vector<int> train_rows, test_rows;
        for (Eigen::Index i = 0; i < n; ++i)
            (rep.fold_assignments[i] == fold ? test_rows : train_rows).push_back(static_cast<int>(i));

        Dataset train_raw = subset_rows(d, train_rows);
        Standardized train = standardize(train_raw);
        Dataset test = subset_rows(d, test_rows);
        apply_standardization(train.record, test);

        if (d.outcome.kind == OutcomeKind::Binary) {
            double s = test.outcome.y.sum();
            if (s == 0 || s == static_cast<double>(test_rows.size()))
                rep.flagged_folds.push_back(fold);
        }

        // For prediction we keep the outcome on its raw scale: models carry an
        // intercept (Linear/Logistic), so only the features are standardized.
        Dataset train_data = train.data;
        if (train.record.outcome_standardized) {
            train_data.outcome.y = train_raw.outcome.y;
        }

        int col = 0;
        if (gomp_arm) {
            GompConfig gc;
            gc.family = config.family;
            gc.residual_kind = config.residual_kind;
            gc.assoc = config.assoc;
            gc.rule.kind = config.rule_kind;
            auto results = gomp_path(train_data, gc, config.stop_grid);
            auto& fold_sets = rep.selected_sets[fold];
            for (const auto& sel : results) {
                fold_sets.push_back(sel.selected);
                DesignInfo test_design = build_design(test, sel.selected);
                if (config.relambda == 0) {
                    Eigen::VectorXd pred = predict_model(sel.final_model, test_design.X);
                    for (size_t i = 0; i < test_rows.size(); ++i)
                        rep.P(test_rows[i], col) = pred[i];
                    ++col;
                } else {
                    // re-regularize the selected set along a short lambda path
                    Dataset train_sel = train_data;
                    std::vector<char> keep(train_sel.features.size(), 0);
                    for (int j : sel.selected) keep[j] = 1;
                    for (size_t j = 0; j < keep.size(); ++j)
                        if (!keep[j]) train_sel.features[j].excluded = true;
                    LambdaPath lp = lasso_path(config.family, train_sel, {}, config.relambda);
                    Dataset test_sel = test;
                    for (size_t j = 0; j < keep.size(); ++j)
                        if (!keep[j]) test_sel.features[j].excluded = true;
                    DesignInfo tx = build_design(test_sel, non_excluded(train_sel));
                    for (int l = 0; l < config.relambda; ++l) {
                        int use = std::min(l, lp.n_lambda() - 1);  // truncated paths repeat tail
                        Eigen::VectorXd eta = lp.n_lambda() > 0
                                                  ? path_linear_predictor(lp, tx.X, use)
                                                  : Eigen::VectorXd::Zero(tx.X.rows());
                        Eigen::VectorXd pred =
                            config.family == Family::Logistic
                                ? Eigen::VectorXd((1.0 / (1.0 + (-eta.array()).exp())).matrix())
                                : eta;
                        for (size_t i = 0; i < test_rows.size(); ++i)
                            rep.P(test_rows[i], col) = pred[i];
                        ++col;
                    }
                }
            }
        } else {
            LambdaPath lp = lasso_path(config.family, train_data, shared_lambdas,
                                       config.lambda_count);
            DesignInfo tx = build_design(test, non_excluded(train_data));
            for (int l = 0; l < M; ++l) {
                int use = std::min(l, lp.n_lambda() - 1);
                Eigen::VectorXd eta = path_linear_predictor(lp, tx.X, use);
                Eigen::VectorXd pred =
                    config.family == Family::Logistic
                        ? Eigen::VectorXd((1.0 / (1.0 + (-eta.array()).exp())).matrix())
                        : eta;
                for (size_t i = 0; i < test_rows.size(); ++i)
                    rep.P(test_rows[i], col) = pred[i];
                ++col;
            }
        }
    }

    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    rep.per_config_metric.resize(M);
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < M; ++c) {
        rep.per_config_metric[c] = metric_on_rows(rep.metric, rep.P.col(c), d.outcome, all_rows);
        double v = oriented(rep.metric, rep.per_config_metric[c]);
        if (v > best_val) {
            best_val = v;
            best = c;
        }
    }
    rep.best_config = best;
    rep.naive_best_metric = rep.per_config_metric[best];
    auto [naive, corrected] = bbc(rep.P, d.outcome, rep.metric, bbc_iters, sub_seed(seed, 0xbbcull));
    rep.bbc_metric = corrected;
    (void)naive;
    return rep;
}

}  // namespace gomp
