#include "gomp/select.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "gomp/special.hpp"

namespace gomp {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_double(std::uint64_t h, double d) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    return fnv1a(h, bits);
}

// Re-evaluates a recorded step's acceptance under a different rule value;
// this is what makes single-run grid truncation exact.
bool step_accepted(StopRuleKind kind, double value, const StepRecord& st) {
    switch (kind) {
        case StopRuleKind::LikelihoodRatioThreshold:
            if (st.delta_df <= 1) return st.lr_stat > value;
            return special::log_chi2_upper(st.lr_stat, st.delta_df) <
                   special::log_chi2_upper(value, 1.0);
        case StopRuleKind::AdjustedR2Increment:
            return st.adj_r2 - st.prev_adj_r2 > value;
        case StopRuleKind::BicDrop:
            return st.prev_bic - st.bic_value > value;
        case StopRuleKind::ResidualNorm:
            return st.prev_residual_norm2 > value;
        case StopRuleKind::MaxFeatures:
            return true;
    }
    return true;
}

}  // namespace

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::RuleStop: return "rule";
        case StopReason::Exhausted: return "exhausted";
        case StopReason::ResidualSmall: return "residual-small";
        case StopReason::MaxFeatures: return "max-features";
    }
    return "?";
}

std::uint64_t fingerprint(const GompConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    h = fnv1a(h, static_cast<std::uint64_t>(c.family));
    h = fnv1a(h, static_cast<std::uint64_t>(c.residual_kind));
    h = fnv1a(h, static_cast<std::uint64_t>(c.assoc));
    h = fnv1a(h, static_cast<std::uint64_t>(c.rule.kind));
    h = hash_double(h, c.rule.value);
    h = fnv1a(h, c.rule.max_features ? static_cast<std::uint64_t>(*c.rule.max_features) : 0);
    return h;
}

SelectionResult omp_classic(const Dataset& d, double epsilon) {
    if (!(epsilon > 0)) throw std::invalid_argument("omp_classic: epsilon must be > 0");
    for (const auto& f : d.features)
        if (f.kind != FeatureKind::Continuous)
            throw std::invalid_argument("omp_classic: continuous features only");
    if (d.outcome.kind != OutcomeKind::Continuous)
        throw std::invalid_argument("omp_classic: continuous outcome only");

    const Eigen::VectorXd& y = d.outcome.y;
    const int p = d.p();
    SelectionResult res;
    std::vector<char> taken(p, 0);
    int candidates = 0;
    for (int j = 0; j < p; ++j) {
        taken[j] = d.features[j].excluded ? 1 : 0;
        if (!taken[j]) ++candidates;
    }

    Eigen::VectorXd r = y;
    res.model_fits = 1;  // the trivial empty fit r = y
    const Eigen::Index max_steps = std::min<Eigen::Index>(d.n() - 2, p);

    while (r.squaredNorm() > epsilon && candidates > 0 &&
           static_cast<Eigen::Index>(res.selected.size()) < max_steps) {
        int best = -1;
        double best_ip = -1.0;
        for (int j = 0; j < p; ++j) {
            if (taken[j]) continue;
            double ip = std::fabs(r.dot(d.features[j].values));
            if (ip > best_ip) {
                best_ip = ip;
                best = j;
            }
        }
        res.assoc_evaluations += candidates;

        StepRecord st;
        st.feature_index = best;
        st.statistic = best_ip;
        st.prev_residual_norm2 = r.squaredNorm();
        res.selected.push_back(best);
        taken[best] = 1;
        --candidates;

        DesignInfo design = build_design(d, res.selected);
        FittedModel m = fit_linear(design.X, y, /*intercept=*/false);
        ++res.model_fits;
        r = y - m.fitted;
        st.residual_norm2 = r.squaredNorm();
        st.converged = m.converged;
        res.steps.push_back(st);
        res.final_model = std::move(m);
    }
    res.stop_reason = candidates == 0 ? StopReason::Exhausted : StopReason::ResidualSmall;
    if (res.selected.empty()) {
        res.final_model = fit_linear(Eigen::MatrixXd(d.n(), 0), y, false);
    }
    return res;
}

SelectionResult gomp_select(const Dataset& d, const GompConfig& config) {
    const Eigen::Index n = d.n();
    const int p = d.p();
    const Eigen::VectorXd& y = d.outcome.y;

    SelectionResult res;
    res.config_fingerprint = fingerprint(config);

    std::vector<char> taken(p, 0);
    int candidates = 0;
    for (int j = 0; j < p; ++j) {
        taken[j] = d.features[j].excluded ? 1 : 0;
        if (!taken[j]) ++candidates;
    }

    DesignInfo design = build_design(d, {});
    FittedModel model = fit_family(config.family, design.X, d.outcome);
    ++res.model_fits;
    Eigen::VectorXd r = residuals(model, design.X, d.outcome, config.residual_kind);

    const Eigen::Index max_steps = std::min<Eigen::Index>(n - 2, p);
    res.stop_reason = StopReason::RuleStop;

    while (true) {
        int n_sel = static_cast<int>(res.selected.size());
        if (n_sel >= max_steps) {
            res.stop_reason = StopReason::MaxFeatures;
            break;
        }
        if (!should_continue(config.rule, &model, nullptr, r, y, n, n_sel, 0)) {
            res.stop_reason = config.rule.kind == StopRuleKind::ResidualNorm
                                  ? StopReason::ResidualSmall
                                  : StopReason::MaxFeatures;
            break;
        }
        if (candidates == 0) {
            res.stop_reason = StopReason::Exhausted;
            break;
        }

        auto best = config.parallel_scan ? scan_candidates(r, d, taken, config.assoc)
                                         : scan_candidates_serial(r, d, taken, config.assoc);
        res.assoc_evaluations += candidates;
        if (!best) {
            res.stop_reason = StopReason::Exhausted;
            break;
        }

        std::vector<int> trial = res.selected;
        trial.push_back(best->feature_index);
        DesignInfo trial_design = build_design(d, trial);
        FittedModel trial_model = fit_family(config.family, trial_design.X, d.outcome);

        // A feature whose every design column got pivot-dropped is aliased
        // with the current selection; remove it from candidacy and rescan.
        int new_cols = static_cast<int>(trial_design.col_feature.size()) -
                       static_cast<int>(design.col_feature.size());
        int dropped_new = 0;
        for (int c : trial_model.dropped_cols)
            if (c >= static_cast<int>(design.col_feature.size())) ++dropped_new;
        if (new_cols > 0 && dropped_new >= new_cols) {
            taken[best->feature_index] = 1;
            --candidates;
            continue;
        }

        StepRecord st;
        st.feature_index = best->feature_index;
        st.log_p = best->log_p;
        st.statistic = best->statistic;
        st.delta_df = trial_model.df - model.df;
        st.lr_stat = log_likelihood_ratio(trial_model, model);
        st.bic_value = bic(trial_model, n);
        st.prev_bic = bic(model, n);
        st.converged = trial_model.converged;
        st.prev_residual_norm2 = r.squaredNorm();
        if (config.family == Family::Linear) {
            st.adj_r2 = adjusted_r2(trial_model, y);
            st.prev_adj_r2 = adjusted_r2(model, y);
        }

        if (!should_continue(config.rule, &trial_model, &model, r, y, n,
                             static_cast<int>(trial.size()), st.delta_df)) {
            res.stop_reason = StopReason::RuleStop;
            break;
        }

        taken[best->feature_index] = 1;
        --candidates;
        // counts retained fits only: the null fit plus one per accepted step,
        // so the |S|+1 work bound is checkable on the counter directly
        ++res.model_fits;
        res.selected = std::move(trial);
        design = std::move(trial_design);
        model = std::move(trial_model);
        r = residuals(model, design.X, d.outcome, config.residual_kind);
        st.residual_norm2 = r.squaredNorm();
        res.steps.push_back(st);
    }

    res.final_model = std::move(model);
    return res;
}

std::vector<SelectionResult> gomp_path(const Dataset& d, const GompConfig& config,
                                       const std::vector<double>& grid,
                                       bool independent_runs) {
    if (grid.empty()) throw std::invalid_argument("gomp_path: empty grid");

    std::vector<SelectionResult> out;
    out.reserve(grid.size());
    if (independent_runs) {
        for (double v : grid) {
            GompConfig c = config;
            c.rule.value = v;
            out.push_back(gomp_select(d, c));
        }
        return out;
    }

    // Looser value = smaller for every statistical rule here (ResidualNorm too:
    // smaller epsilon runs longer). Run once at the loosest, truncate per value.
    double loosest = *std::min_element(grid.begin(), grid.end());
    GompConfig base = config;
    base.rule.value = loosest;
    SelectionResult full = gomp_select(d, base);

    for (double v : grid) {
        size_t keep = 0;
        while (keep < full.steps.size() &&
               step_accepted(config.rule.kind, v, full.steps[keep]))
            ++keep;
        SelectionResult r;
        GompConfig c = config;
        c.rule.value = v;
        r.config_fingerprint = fingerprint(c);
        r.selected.assign(full.selected.begin(), full.selected.begin() + keep);
        r.steps.assign(full.steps.begin(), full.steps.begin() + keep);
        r.stop_reason = keep == full.steps.size() ? full.stop_reason : StopReason::RuleStop;
        r.model_fits = full.model_fits;
        r.assoc_evaluations = full.assoc_evaluations;
        if (keep == full.steps.size()) {
            r.final_model = full.final_model;
        } else {
            DesignInfo design = build_design(d, r.selected);
            r.final_model = fit_family(config.family, design.X, d.outcome);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace gomp
