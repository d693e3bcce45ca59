// gompsel: greedy residual-guided feature selection with LASSO baselines.
// Subcommands: simulate | select | cv | bench.

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "gomp/cv.hpp"
#include "gomp/dataset.hpp"
#include "gomp/lasso.hpp"
#include "gomp/metrics.hpp"
#include "gomp/select.hpp"
#include "gomp/simgen.hpp"

using json = nlohmann::ordered_json;
using namespace gomp;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 2 usage, 3 data, 4 numerical
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::string input, schema_path, out_dir = ".";
    std::string outcome_kind, method = "gomp", family, residuals = "default";
    std::string stop_rule = "lr";
    std::vector<double> stop_grid;
    int lambda_count = 100;
    int folds = 0;  // 0 = by outcome kind
    bool stratify = false;
    int bbc_iters = 1000;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("GOMP_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return omp_get_max_threads();
}

OutcomeKind parse_outcome_kind(const std::string& s) {
    if (s == "continuous") return OutcomeKind::Continuous;
    if (s == "binary") return OutcomeKind::Binary;
    if (s == "survival") return OutcomeKind::Survival;
    throw UsageError("unknown outcome kind: " + s);
}

const char* outcome_kind_name(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Continuous: return "continuous";
        case OutcomeKind::Binary: return "binary";
        case OutcomeKind::Survival: return "survival";
    }
    return "?";
}

Family family_for(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Continuous: return Family::Linear;
        case OutcomeKind::Binary: return Family::Logistic;
        case OutcomeKind::Survival: return Family::Cox;
    }
    throw UsageError("bad outcome kind");
}

Family parse_family(const std::string& s, OutcomeKind kind) {
    Family f;
    if (s.empty() || s == "auto") return family_for(kind);
    else if (s == "linear") f = Family::Linear;
    else if (s == "logistic") f = Family::Logistic;
    else if (s == "cox") f = Family::Cox;
    else throw UsageError("unknown family: " + s);
    if (f != family_for(kind))
        throw UsageError("family '" + s + "' does not match the " +
                         std::string(outcome_kind_name(kind)) + " outcome");
    return f;
}

const char* family_name(Family f) {
    switch (f) {
        case Family::Linear: return "linear";
        case Family::Logistic: return "logistic";
        case Family::Cox: return "cox";
    }
    return "?";
}

ResidualKind parse_residuals(const std::string& s, Family f) {
    if (s == "default") return default_residual(f);
    ResidualKind k;
    if (s == "raw") k = ResidualKind::Raw;
    else if (s == "pearson") k = ResidualKind::Pearson;
    else if (s == "deviance") k = ResidualKind::Deviance;
    else if (s == "martingale") k = ResidualKind::Martingale;
    else throw UsageError("unknown residual kind: " + s);
    if (k == ResidualKind::Martingale && f != Family::Cox)
        throw UsageError("martingale residuals require the cox family");
    if (f == Family::Linear && k != ResidualKind::Raw)
        throw UsageError("the linear family uses raw residuals");
    return k;
}

const char* residuals_name(ResidualKind k) {
    switch (k) {
        case ResidualKind::Raw: return "raw";
        case ResidualKind::Pearson: return "pearson";
        case ResidualKind::Deviance: return "deviance";
        case ResidualKind::Martingale: return "martingale";
    }
    return "?";
}

StopRuleKind parse_stop_rule(const std::string& s) {
    if (s == "lr") return StopRuleKind::LikelihoodRatioThreshold;
    if (s == "adjr2") return StopRuleKind::AdjustedR2Increment;
    if (s == "bic") return StopRuleKind::BicDrop;
    if (s == "residual") return StopRuleKind::ResidualNorm;
    if (s == "max-features") return StopRuleKind::MaxFeatures;
    throw UsageError("unknown stop rule: " + s);
}

std::vector<double> default_grid(StopRuleKind kind) {
    switch (kind) {
        case StopRuleKind::LikelihoodRatioThreshold: return lr_threshold_grid();
        case StopRuleKind::AdjustedR2Increment: return adj_r2_grid();
        case StopRuleKind::BicDrop: return {0.0};
        case StopRuleKind::ResidualNorm: return {1e-6};
        case StopRuleKind::MaxFeatures: return {10.0};
    }
    return {};
}

Dataset load_input(const CommonOpts& o, OutcomeKind* kind_out) {
    if (o.input.empty()) throw UsageError("--input is required");
    if (!std::filesystem::exists(o.input)) throw DataError("input not found: " + o.input);
    Schema schema;
    if (!o.schema_path.empty()) {
        if (!std::filesystem::exists(o.schema_path))
            throw DataError("schema not found: " + o.schema_path);
        schema = load_schema_json(o.schema_path);
    } else {
        throw UsageError("--schema is required");
    }
    if (!o.outcome_kind.empty()) schema.outcome_kind = parse_outcome_kind(o.outcome_kind);
    Dataset d = load_csv(o.input, schema);
    if (kind_out) *kind_out = d.outcome.kind;
    return d;
}

// Standardize features; keep the outcome on its raw scale (models carry
// intercepts, and predictions should live in outcome units).
Dataset prepare(const Dataset& raw) {
    Standardized s = standardize(raw);
    Dataset d = std::move(s.data);
    if (s.record.outcome_standardized) d.outcome.y = raw.outcome.y;
    return d;
}

json run_config_json(const std::string& command, const CommonOpts& o) {
    json rc;
    rc["command"] = command;
    rc["input"] = o.input;
    rc["schema"] = o.schema_path;
    rc["outcome_kind"] = o.outcome_kind;
    rc["method"] = o.method;
    rc["family"] = o.family;
    rc["residuals"] = o.residuals;
    rc["stop_rule"] = o.stop_rule;
    rc["stop_grid"] = o.stop_grid;
    rc["lambda_count"] = o.lambda_count;
    rc["folds"] = o.folds;
    rc["stratify"] = o.stratify;
    rc["bbc_iters"] = o.bbc_iters;
    rc["seed"] = o.seed;
    rc["out"] = o.out_dir;
    return rc;
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

double to_log10(double natural_log) { return natural_log * M_LOG10E; }

json selection_json(const SelectionResult& res) {
    json j;
    j["selected"] = res.selected;
    j["stop_reason"] = stop_reason_name(res.stop_reason);
    j["config_fingerprint"] = res.config_fingerprint;
    j["model_fits"] = res.model_fits;
    j["assoc_evaluations"] = res.assoc_evaluations;
    j["final_log_likelihood"] = res.final_model.log_likelihood;
    j["final_df"] = res.final_model.df;
    j["converged"] = res.final_model.converged;
    json steps = json::array();
    for (const auto& st : res.steps) {
        json s;
        s["feature"] = st.feature_index;
        s["log10_p"] = to_log10(st.log_p);
        s["statistic"] = st.statistic;
        s["lr_stat"] = st.lr_stat;
        s["bic"] = st.bic_value;
        s["delta_df"] = st.delta_df;
        s["residual_norm2"] = st.residual_norm2;
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    return j;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const CommonOpts& o, Eigen::Index n, int p, int n_true, double snr,
                 double cat_fraction, const std::string& mechanism, bool sweep_n) {
    if (!o.seed_set) throw UsageError("--seed is required for simulate");
    std::filesystem::create_directories(o.out_dir);

    std::vector<Eigen::Index> sizes;
    if (sweep_n)
        for (Eigen::Index s = 100; s <= 1000; s += 100) sizes.push_back(s);
    else
        sizes.push_back(n);

    for (size_t i = 0; i < sizes.size(); ++i) {
        SimSpec spec;
        spec.n = sizes[i];
        spec.p = p;
        spec.n_true = n_true;
        spec.snr = snr;
        spec.categorical_fraction = cat_fraction;
        spec.outcome_kind =
            o.outcome_kind.empty() ? OutcomeKind::Continuous : parse_outcome_kind(o.outcome_kind);
        if (mechanism == "latent") spec.binary_mechanism = BinaryMechanism::LatentThreshold;
        else if (mechanism != "logistic") throw UsageError("unknown mechanism: " + mechanism);
        spec.seed = sub_seed(o.seed, i);
        SimData sim = generate(spec);

        std::string tag = sweep_n ? "_n" + std::to_string(sizes[i]) : "";
        std::filesystem::path base(o.out_dir);
        write_csv(sim.data, (base / ("dataset" + tag + ".csv")).string());
        write_schema_json(sim.data, (base / ("schema" + tag + ".json")).string());

        json truth;
        truth["version"] = kVersion;
        truth["seed"] = o.seed;
        truth["sub_seed"] = spec.seed;
        truth["n"] = static_cast<long>(spec.n);
        truth["p"] = spec.p;
        truth["n_true"] = spec.n_true;
        truth["snr"] = spec.snr;
        truth["outcome_kind"] = outcome_kind_name(spec.outcome_kind);
        truth["true_support"] = sim.true_support;
        write_json(truth, base / ("truth" + tag + ".json"));
    }
    return 0;
}

// ------------------------------------------------------------------ select

int cmd_select(const CommonOpts& o) {
    OutcomeKind kind;
    Dataset raw = load_input(o, &kind);
    Dataset d = prepare(raw);

    json out;
    out["version"] = kVersion;
    out["run_config"] = run_config_json("select", o);
    out["seed"] = o.seed;

    if (o.method == "lasso") {
        Family fam = parse_family(o.family, kind);
        LambdaPath path = lasso_path(fam, d, {}, o.lambda_count);
        json pj;
        pj["family"] = family_name(fam);
        pj["lambdas"] = path.lambdas;
        pj["support_sizes"] = path.support_sizes;
        pj["truncated"] = path.truncated;
        out["lasso_path"] = std::move(pj);
    } else if (o.method == "omp-classic") {
        if (kind != OutcomeKind::Continuous)
            throw UsageError("omp-classic requires a continuous outcome");
        double eps = o.stop_grid.empty() ? 1e-6 : o.stop_grid.front();
        // classic mode works on the fully standardized scale
        SelectionResult res = omp_classic(standardize(raw).data, eps);
        out["selection"] = selection_json(res);
    } else if (o.method == "gomp") {
        GompConfig cfg;
        cfg.family = parse_family(o.family, kind);
        cfg.residual_kind = parse_residuals(o.residuals, cfg.family);
        cfg.rule.kind = parse_stop_rule(o.stop_rule);
        std::vector<double> grid =
            o.stop_grid.empty() ? std::vector<double>{default_grid(cfg.rule.kind).front()}
                                : o.stop_grid;
        if (cfg.rule.kind == StopRuleKind::MaxFeatures) {
            cfg.rule.max_features = static_cast<int>(grid.front());
            out["selection"] = selection_json(gomp_select(d, cfg));
        } else if (grid.size() == 1) {
            cfg.rule.value = grid.front();
            out["selection"] = selection_json(gomp_select(d, cfg));
        } else {
            cfg.rule.value = grid.front();
            json arr = json::array();
            for (const auto& res : gomp_path(d, cfg, grid)) arr.push_back(selection_json(res));
            out["selections"] = std::move(arr);
            out["stop_grid"] = grid;
        }
    } else {
        throw UsageError("unknown method: " + o.method);
    }

    std::filesystem::create_directories(o.out_dir);
    write_json(out, std::filesystem::path(o.out_dir) / "selection.json");
    return 0;
}

// ---------------------------------------------------------------------- cv

int cmd_cv(const CommonOpts& o) {
    if (!o.seed_set) throw UsageError("--seed is required for cv");
    OutcomeKind kind;
    Dataset d = load_input(o, &kind);

    CvMethodConfig mc;
    mc.family = parse_family(o.family, kind);
    mc.residual_kind = parse_residuals(o.residuals, mc.family);
    if (o.method == "gomp") {
        mc.use_gomp = true;
        mc.rule_kind = parse_stop_rule(o.stop_rule);
        mc.stop_grid = o.stop_grid.empty() ? default_grid(mc.rule_kind) : o.stop_grid;
    } else if (o.method == "lasso") {
        mc.use_gomp = false;
        mc.lambda_count = o.lambda_count;
    } else {
        throw UsageError("cv supports methods gomp and lasso");
    }

    int folds = o.folds;
    if (folds == 0) folds = kind == OutcomeKind::Survival ? 8 : 10;

    CvReport rep = run_cv(d, mc, folds, o.seed, o.bbc_iters, o.stratify);

    json out;
    out["version"] = kVersion;
    out["run_config"] = run_config_json("cv", o);
    out["seed"] = o.seed;
    out["folds"] = folds;
    out["metric"] = metric_name(rep.metric);
    out["config_labels"] = rep.config_labels;
    out["per_config_metric"] = rep.per_config_metric;
    out["best_config"] = rep.best_config;
    out["naive_best_metric"] = rep.naive_best_metric;
    out["bbc_metric"] = rep.bbc_metric;
    out["flagged_folds"] = rep.flagged_folds;
    json sizes = json::array();
    for (const auto& fold_sets : rep.selected_sets) {
        json fs = json::array();
        for (const auto& sel : fold_sets) fs.push_back(sel.size());
        sizes.push_back(std::move(fs));
    }
    out["selected_set_sizes"] = std::move(sizes);
    out["fold_assignments"] = rep.fold_assignments;

    std::filesystem::create_directories(o.out_dir);
    write_json(out, std::filesystem::path(o.out_dir) / "cv.json");
    return 0;
}

// -------------------------------------------------------------------- bench

int cmd_bench(const CommonOpts& o, std::vector<Eigen::Index> n_list, int p, int n_true,
              double snr) {
    if (!o.seed_set) throw UsageError("--seed is required for bench");
    if (n_list.empty()) n_list = {100, 200, 300, 400, 500};

    json report;
    report["version"] = kVersion;
    report["run_config"] = run_config_json("bench", o);
    report["seed"] = o.seed;
    json rows = json::array();
    json timing_rows = json::array();
    std::string csv = "dataset,n,p,method,support_size,tpr,fdr,mse\n";

    Eigen::VectorXd metric_diffs(static_cast<Eigen::Index>(n_list.size()));
    for (size_t i = 0; i < n_list.size(); ++i) {
        SimSpec spec;
        spec.n = n_list[i];
        spec.p = p;
        spec.n_true = n_true;
        spec.snr = snr;
        spec.seed = sub_seed(o.seed, i);
        SimData sim = generate(spec);
        Dataset d = prepare(sim.data);

        GompConfig cfg;
        cfg.rule = StoppingRule::adj_r2(adj_r2_grid().back());
        auto t0 = std::chrono::steady_clock::now();
        SelectionResult gres = gomp_select(d, cfg);
        auto t1 = std::chrono::steady_clock::now();
        LambdaPath path = lasso_linear(d, {}, o.lambda_count);
        auto t2 = std::chrono::steady_clock::now();

        DesignInfo gdesign = build_design(d, gres.selected);
        FittedModel gfit = fit_linear(gdesign.X, d.outcome.y);
        double gomp_mse = mse(gfit.fitted, d.outcome.y);
        SelectionQuality gq = selection_quality(gres.selected, sim.true_support);

        // LASSO*: the path point matched to gOMP's support size
        int star = match_support_size(path, static_cast<int>(gres.selected.size()));
        std::vector<int> lsel;
        for (Eigen::Index c = 0; c < path.coefficients.cols(); ++c)
            if (path.coefficients(star, c) != 0.0 &&
                std::find(lsel.begin(), lsel.end(), path.col_feature[c]) == lsel.end())
                lsel.push_back(path.col_feature[c]);
        DesignInfo full = build_design(
            d, [&] {
                std::vector<int> all;
                for (int j = 0; j < d.p(); ++j)
                    if (!d.features[j].excluded) all.push_back(j);
                return all;
            }());
        Eigen::VectorXd lpred = path_linear_predictor(path, full.X, star);
        double lasso_mse = mse(lpred, d.outcome.y);
        SelectionQuality lq = selection_quality(lsel, sim.true_support);

        metric_diffs[static_cast<Eigen::Index>(i)] = gomp_mse - lasso_mse;

        auto fmt = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        csv += std::to_string(i) + "," + std::to_string(spec.n) + "," + std::to_string(p) +
               ",gomp," + std::to_string(gres.selected.size()) + "," + fmt(gq.tpr) + "," +
               fmt(gq.fdr) + "," + fmt(gomp_mse) + "\n";
        csv += std::to_string(i) + "," + std::to_string(spec.n) + "," + std::to_string(p) +
               ",lasso-star," + std::to_string(lsel.size()) + "," + fmt(lq.tpr) + "," +
               fmt(lq.fdr) + "," + fmt(lasso_mse) + "\n";

        json row;
        row["dataset"] = i;
        row["n"] = static_cast<long>(spec.n);
        row["p"] = p;
        row["gomp"] = {{"support_size", gres.selected.size()},
                       {"tpr", gq.tpr},
                       {"fdr", gq.fdr},
                       {"mse", gomp_mse},
                       {"model_fits", gres.model_fits},
                       {"assoc_evaluations", gres.assoc_evaluations}};
        row["lasso_star"] = {{"support_size", lsel.size()},
                             {"tpr", lq.tpr},
                             {"fdr", lq.fdr},
                             {"mse", lasso_mse},
                             {"lambda_index", star}};
        rows.push_back(std::move(row));

        double gomp_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        double lasso_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
        json trow;
        trow["dataset"] = i;
        trow["n"] = static_cast<long>(spec.n);
        trow["gomp_ms"] = gomp_ms;
        trow["lasso_ms"] = lasso_ms;
        trow["speedup_gomp_over_lasso"] = lasso_ms / gomp_ms;
        timing_rows.push_back(std::move(trow));
    }
    report["datasets"] = std::move(rows);
    report["paired_mse_diff_permutation_p"] =
        sign_permutation_test(metric_diffs, 999, 1000, sub_seed(o.seed, 0x7065726dull));

    std::filesystem::create_directories(o.out_dir);
    std::filesystem::path base(o.out_dir);
    write_json(report, base / "bench.json");
    {
        std::ofstream out(base / "bench.csv");
        if (!out) throw DataError("cannot write bench.csv");
        out << csv;
    }
    // Wall-clock numbers vary run to run, so they live in a sidecar file and
    // never touch the deterministic report.
    json timings;
    timings["version"] = kVersion;
    timings["wall_clock"] = std::move(timing_rows);
    write_json(timings, base / "bench_timings.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gompsel: generalized matching-pursuit feature selection"};
    app.require_subcommand(1);

    CommonOpts o;
    Eigen::Index sim_n = 500;
    int sim_p = 2000, sim_true = 10;
    double sim_snr = 32.5, sim_cat = 0.0;
    std::string sim_mechanism = "logistic";
    bool sweep_n = false;
    std::vector<Eigen::Index> bench_n;
    int bench_p = 500, bench_true = 5;
    double bench_snr = 32.5;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", o.input);
        sub->add_option("--schema", o.schema_path);
        sub->add_option("--outcome-kind", o.outcome_kind);
        sub->add_option("--method", o.method);
        sub->add_option("--family", o.family);
        sub->add_option("--residuals", o.residuals);
        sub->add_option("--stop-rule", o.stop_rule);
        sub->add_option("--stop-grid", o.stop_grid)->delimiter(',');
        sub->add_option("--lambda-count", o.lambda_count);
        sub->add_option("--folds", o.folds);
        sub->add_flag("--stratify", o.stratify);
        sub->add_option("--bbc-iters", o.bbc_iters);
        sub->add_option("--seed", o.seed)->each([&](const std::string&) { o.seed_set = true; });
        sub->add_option("--threads", o.threads);
        sub->add_option("--out", o.out_dir);
    };

    CLI::App* simulate = app.add_subcommand("simulate", "generate synthetic datasets");
    add_common(simulate);
    simulate->add_option("--n", sim_n);
    simulate->add_option("--p", sim_p);
    simulate->add_option("--n-true", sim_true);
    simulate->add_option("--snr", sim_snr);
    simulate->add_option("--categorical-fraction", sim_cat);
    simulate->add_option("--mechanism", sim_mechanism);
    simulate->add_flag("--sweep-n", sweep_n, "emit datasets for n = 100..1000 step 100");

    CLI::App* select = app.add_subcommand("select", "run selection on one dataset");
    add_common(select);

    CLI::App* cv = app.add_subcommand("cv", "cross-validated configuration tuning");
    add_common(cv);

    CLI::App* bench = app.add_subcommand("bench", "method comparison sweep");
    add_common(bench);
    bench->add_option("--n-list", bench_n)->delimiter(',');
    bench->add_option("--p", bench_p);
    bench->add_option("--n-true", bench_true);
    bench->add_option("--snr", bench_snr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        omp_set_num_threads(resolve_threads(o.threads));
        if (simulate->parsed())
            return cmd_simulate(o, sim_n, sim_p, sim_true, sim_snr, sim_cat, sim_mechanism,
                                sweep_n);
        if (select->parsed()) return cmd_select(o);
        if (cv->parsed()) return cmd_cv(o);
        if (bench->parsed()) return cmd_bench(o, bench_n, bench_p, bench_true, bench_snr);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const IngestionError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    }
    return 2;
}
