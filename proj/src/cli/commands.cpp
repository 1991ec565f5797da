#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "funcount/adaboost.hpp"
#include "funcount/cli.hpp"
#include "funcount/csv.hpp"
#include "funcount/error.hpp"
#include "funcount/fiteval.hpp"
#include "funcount/forest.hpp"
#include "funcount/gfpca.hpp"
#include "funcount/importance.hpp"
#include "funcount/ingest.hpp"
#include "funcount/logistic.hpp"
#include "funcount/metrics.hpp"
#include "funcount/narfd.hpp"
#include "funcount/pfpca.hpp"
#include "funcount/predictor_table.hpp"
#include "funcount/simulate.hpp"
#include "funcount/split.hpp"
#include "manifest.hpp"

namespace funcount {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Collects the files a command writes so the manifest can list them.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void write(const std::string& name, std::string_view contents) {
        csv::write_atomic(dir_ / name, contents);
        files_.emplace_back(name);
    }
    const fs::path& dir() const { return dir_; }
    const std::vector<fs::path>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
};

std::optional<double> parse_lambda(const std::string& text) {
    if (text == "auto") return std::nullopt;
    double value = 0.0;
    try {
        value = csv::parse_double(text, "--lambda");
    } catch (const Error&) {
        throw UsageError("--lambda must be 'auto' or a number");
    }
    if (!(value >= 0.0)) throw UsageError("--lambda must be >= 0");
    return value;
}

bool is_minute_level(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("ingest", fmt::format("cannot open '{}'", path.string()));
    std::string header;
    std::getline(in, header);
    const auto fields = csv::split_line(header);
    return std::find(fields.begin(), fields.end(), "min_0") != fields.end();
}

CountCurveSet load_curves(const fs::path& input, const std::string& wear) {
    if (is_minute_level(input)) {
        if (wear.empty()) throw UsageError("minute-level input needs --wear");
        return load_minute_accelerometry(input, wear);
    }
    return load_binned_accelerometry(input);
}

Decomposition fit_method(Method method, const CountCurveSet& curves, int k, int m, std::optional<double> lambda,
                         std::uint64_t seed) {
    switch (method) {
        case Method::GFPCA: {
            if (lambda) throw UsageError("gfpca picks its smoothing parameters by GCV; use --lambda auto");
            FpcaOptions o;
            o.n_components = k;
            o.n_basis = m;
            return fit_gfpca(curves, o);
        }
        case Method::PFPCA: {
            PfpcaOptions o;
            o.n_components = k;
            o.n_basis = m;
            o.lambda = lambda;
            return fit_pfpca(curves, o);
        }
        case Method::NARFD: {
            NarfdOptions o;
            o.n_components = k;
            o.n_basis = m;
            o.lambda = lambda;
            o.seed = seed;
            return fit_narfd(curves, o);
        }
    }
    throw UsageError("unknown method");
}

void write_fit_outputs(Outputs& out, const Decomposition& d, const CountCurveSet& curves) {
    const std::string slug(method_slug(d.method));
    out.write(fmt::format("decomposition_{}.json", slug), to_json(d).dump(2) + "\n");
    out.write(fmt::format("mae_{}.csv", slug), format_mae(d, mae_per_subject(d.fitted, curves.counts)));
    out.write(fmt::format("effects_{}.csv", slug), format_effects(d));
    if (d.method == Method::GFPCA) out.write("effects_gfpca_count.csv", format_effects(d, true));
}

std::vector<SubjectCovariates> load_subjects(const fs::path& covariates, const fs::path& mortality) {
    return attach_mortality(load_covariates(covariates), mortality);
}

struct PredictSettings {
    std::string model;
    double split = 0.7;
    std::uint64_t seed = 1;
    int n_trees = 0;  // 0 = model default
};

struct PredictReport {
    ojson summary;
    double auc_test = 0.0;
};

std::string score_tag(const Decomposition* d) { return d ? std::string(method_slug(d->method)) : "baseline"; }

std::vector<std::string> selected_names(const PredictorTable& t, const std::vector<Eigen::Index>& cols) {
    std::vector<std::string> names;
    for (Eigen::Index c : cols) names.push_back(t.columns[static_cast<std::size_t>(c)]);
    return names;
}

// Fits one classifier on the training split and scores both splits. With
// `out` set, writes predictions, ROC, summary and the coefficient or
// importance table.
PredictReport run_prediction(const std::vector<SubjectCovariates>& subjects, const Decomposition* decomp,
                             const PredictSettings& s, Outputs* out) {
    const PredictorTable table = build_predictor_table(subjects, decomp);
    const SplitIndices split = stratified_split(table.outcome, s.split, s.seed);
    const PredictorTable train = table.subset(split.train);
    const PredictorTable test = table.subset(split.test);
    const std::string tag = fmt::format("{}_{}", s.model, score_tag(decomp));

    ojson summary;
    summary["model"] = s.model;
    summary["scores"] = score_tag(decomp);
    summary["seed"] = s.seed;
    summary["split"] = s.split;
    summary["n_subjects"] = table.n_rows();
    summary["n_train"] = train.n_rows();
    summary["n_test"] = test.n_rows();

    std::optional<Classifier> model;
    std::string table_csv;
    std::string table_name;
    if (s.model == "logistic") {
        const StepwiseResult fit = stepwise_aic(train, train.score_columns);
        summary["selected_scores"] = selected_names(train, fit.selected);
        summary["separation"] = fit.model.separated;
        // Inference table on the full data.
        const StepwiseResult full = stepwise_aic(table, table.score_columns);
        summary["selected_scores_full_data"] = selected_names(table, full.selected);
        summary["aic_full_data"] = full.model.aic();
        table_csv = format_coefficients(full.model);
        table_name = fmt::format("coefficients_{}.csv", tag);
        model = fit.model;
    } else if (s.model == "forest") {
        ForestOptions o;
        o.seed = s.seed;
        if (s.n_trees > 0) o.n_trees = s.n_trees;
        model = fit_random_forest(train, o);
    } else if (s.model == "adaboost") {
        AdaBoostOptions o;
        o.seed = s.seed;
        if (s.n_trees > 0) o.n_trees = s.n_trees;
        model = fit_adaboost(train, o);
    } else {
        throw UsageError(fmt::format("unknown model '{}'", s.model));
    }
    if (s.model != "logistic") {
        table_csv = format_importance(variable_importance(*model, table.columns));
        table_name = fmt::format("importance_{}.csv", tag);
    }

    const Eigen::VectorXd p_train = predict_probability(*model, train.x);
    const Eigen::VectorXd p_test = predict_probability(*model, test.x);
    const auto roc = weighted_roc(p_test, test.outcome, test.weights);
    PredictReport report;
    report.auc_test = auc_from_roc(roc);
    summary["auc_test"] = report.auc_test;
    summary["auc_train"] = weighted_auc(p_train, train.outcome, train.weights);
    report.summary = summary;

    if (out != nullptr) {
        out->write(fmt::format("predictions_{}.csv", tag), format_predictions(table, split, p_train, p_test));
        out->write(fmt::format("roc_{}.csv", tag), format_roc(roc));
        out->write(table_name, table_csv);
        out->write(fmt::format("summary_{}.json", tag), summary.dump(2) + "\n");
    }
    return report;
}

std::vector<std::string> args_of(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return args;
}

struct SimulateArgs {
    std::int64_t n = 300;
    std::int64_t bins = 288;
    double prevalence = 0.06;
    std::uint64_t seed = 1;
    std::string out;
};

struct FitArgs {
    std::string method;
    std::string input;
    std::string wear;
    int k = 6;
    int m = 30;
    std::string lambda = "auto";
    std::uint64_t seed = 1;
    std::string out;
};

struct CompareArgs {
    std::vector<std::string> inputs;
    std::string out;
};

struct PredictArgs {
    std::string model;
    std::string scores = "none";
    std::string covariates;
    std::string mortality;
    double split = 0.7;
    std::uint64_t seed = 1;
    int trees = 0;
    std::string out;
};

struct EvaluateArgs {
    std::string predictions;
    std::string split = "test";
    std::string out;
};

struct GridArgs {
    std::string input;
    std::string wear;
    std::string covariates;
    std::string mortality;
    int k = 6;
    int m = 30;
    double split = 0.7;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
    StudyOptions o;
    o.n_subjects = a.n;
    o.n_bins = a.bins;
    o.prevalence = a.prevalence;
    o.seed = a.seed;
    const Study study = simulate_study(o);
    Outputs out(a.out);
    out.write("accel5.csv", format_binned_accelerometry(study.data.curves));
    out.write("covariates.csv", format_covariates(study.data.covariates));
    out.write("mortality.csv", format_mortality(study.data.covariates));
    std::string truth = "subject_id,score_1,score_2\n";
    for (Eigen::Index i = 0; i < study.true_scores.rows(); ++i) {
        truth += fmt::format("{},{},{}\n", study.data.curves.subject_ids[static_cast<std::size_t>(i)],
                             csv::format_double(study.true_scores(i, 0)), csv::format_double(study.true_scores(i, 1)));
    }
    out.write("true_scores.csv", truth);
    cli::write_manifest(out.dir(), {"simulate", argv, a.seed, {}, out.files()});
    std::cout << fmt::format("wrote {} subjects, {} deaths, to {}\n", study.data.covariates.size(),
                             std::count_if(study.data.covariates.begin(), study.data.covariates.end(),
                                           [](const SubjectCovariates& c) { return c.mortality == 1; }),
                             a.out);
    return 0;
}

int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv) {
    const Method method = parse_method(a.method);
    const auto lambda = parse_lambda(a.lambda);
    const CountCurveSet curves = load_curves(a.input, a.wear);
    const Decomposition d = fit_method(method, curves, a.k, a.m, lambda, a.seed);
    Outputs out(a.out);
    write_fit_outputs(out, d, curves);
    std::vector<fs::path> inputs{a.input};
    if (!a.wear.empty()) inputs.emplace_back(a.wear);
    cli::write_manifest(out.dir(), {"fit", argv, a.seed, inputs, out.files()});
    const Eigen::VectorXd mae = mae_per_subject(d.fitted, curves.counts);
    std::cout << fmt::format("{}: {} subjects, K = {}, lambda = {}, mean MAE = {}\n", method_name(method),
                             curves.n_subjects(), a.k, csv::format_double(d.lambda), csv::format_double(mae.mean()));
    for (const auto& note : d.diagnostics) std::cout << "note: " << note << "\n";
    return 0;
}

int cmd_compare(const CompareArgs& a, const std::vector<std::string>& argv) {
    std::string table = "method,n,mean_mae,median_mae\n";
    std::vector<fs::path> inputs;
    for (const auto& path : a.inputs) {
        const csv::Table t = csv::read(path);
        const auto cm = t.column("method");
        const auto cv = t.column("mae");
        if (t.rows.empty()) throw InputError("fiteval", fmt::format("'{}' has no rows", path));
        std::vector<double> v;
        for (const auto& row : t.rows) v.push_back(csv::parse_double(row[cv], "mae"));
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        const double median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(n);
        table += fmt::format("{},{},{},{}\n", t.rows.front()[cm], n, csv::format_double(mean), csv::format_double(median));
        inputs.emplace_back(path);
    }
    std::cout << table;
    if (!a.out.empty()) {
        Outputs out(a.out);
        out.write("mae_summary.csv", table);
        cli::write_manifest(out.dir(), {"compare-mae", argv, std::nullopt, inputs, out.files()});
    }
    return 0;
}

int cmd_predict(const PredictArgs& a, const std::vector<std::string>& argv) {
    const auto subjects = load_subjects(a.covariates, a.mortality);
    std::optional<Decomposition> decomp;
    std::vector<fs::path> inputs{a.covariates, a.mortality};
    if (a.scores != "none") {
        std::ifstream in(a.scores);
        if (!in) throw InputError("cli", fmt::format("cannot open '{}'", a.scores));
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw InputError("cli", fmt::format("'{}' is not valid JSON: {}", a.scores, e.what()));
        }
        decomp = decomposition_from_json(j);
        inputs.emplace_back(a.scores);
    }
    Outputs out(a.out);
    const PredictReport r = run_prediction(subjects, decomp ? &*decomp : nullptr, {a.model, a.split, a.seed, a.trees}, &out);
    cli::write_manifest(out.dir(), {"predict", argv, a.seed, inputs, out.files()});
    std::cout << fmt::format("{} + {}: test AUC = {:.4f}\n", a.model, r.summary["scores"].get<std::string>(), r.auc_test);
    return 0;
}

int cmd_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv) {
    if (a.split != "test" && a.split != "train" && a.split != "all") throw UsageError("--split must be test, train or all");
    const csv::Table t = csv::read(a.predictions);
    const auto cp = t.column("prob"), cl = t.column("label"), cw = t.column("weight"), cs = t.column("split");
    std::vector<double> prob, weight;
    std::vector<int> label;
    for (const auto& row : t.rows) {
        if (a.split != "all" && row[cs] != a.split) continue;
        prob.push_back(csv::parse_double(row[cp], "prob"));
        label.push_back(static_cast<int>(csv::parse_integer(row[cl], "label")));
        weight.push_back(csv::parse_double(row[cw], "weight"));
    }
    const auto n = static_cast<Eigen::Index>(prob.size());
    const auto roc = weighted_roc(Eigen::Map<Eigen::VectorXd>(prob.data(), n), Eigen::Map<Eigen::VectorXi>(label.data(), n),
                                  Eigen::Map<Eigen::VectorXd>(weight.data(), n));
    const double auc = auc_from_roc(roc);
    const std::string stem = fs::path(a.predictions).stem().string();
    Outputs out(a.out);
    out.write(fmt::format("roc_eval_{}.csv", stem), format_roc(roc));
    ojson summary{{"predictions", a.predictions}, {"split", a.split}, {"n", n}, {"auc", auc}};
    out.write(fmt::format("evaluation_{}.json", stem), summary.dump(2) + "\n");
    cli::write_manifest(out.dir(), {"evaluate", argv, std::nullopt, {a.predictions}, out.files()});
    std::cout << fmt::format("{} ({}): weighted AUC = {:.4f}\n", stem, a.split, auc);
    return 0;
}

int cmd_grid(const GridArgs& a, const std::vector<std::string>& argv) {
    const CountCurveSet curves = load_curves(a.input, a.wear);
    const auto subjects = load_subjects(a.covariates, a.mortality);
    Outputs out(a.out);
    std::vector<Decomposition> decomps;
    for (Method m : {Method::GFPCA, Method::PFPCA, Method::NARFD}) {
        decomps.push_back(fit_method(m, curves, a.k, a.m, std::nullopt, a.seed));
        write_fit_outputs(out, decomps.back(), curves);
    }
    std::string grid = "model,baseline,gfpca,pfpca,narfd\n";
    for (const std::string model : {"logistic", "forest", "adaboost"}) {
        const PredictSettings s{model, a.split, a.seed, 0};
        std::vector<std::string> cells{model, csv::format_double(run_prediction(subjects, nullptr, s, nullptr).auc_test)};
        for (const auto& d : decomps) cells.push_back(csv::format_double(run_prediction(subjects, &d, s, nullptr).auc_test));
        grid += fmt::format("{}\n", fmt::join(cells, ","));
    }
    out.write("auc_grid.csv", grid);
    std::vector<fs::path> inputs{a.input, a.covariates, a.mortality};
    if (!a.wear.empty()) inputs.emplace_back(a.wear);
    cli::write_manifest(out.dir(), {"grid", argv, a.seed, inputs, out.files()});
    std::cout << grid;
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Decompositions of count-valued functional data and survey-weighted mortality prediction", "funcount"};
    app.require_subcommand(1);
    const auto argv_list = args_of(argc, argv);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Write a synthetic study (accel5.csv, covariates.csv, mortality.csv)");
    s->add_option("--n", sim.n, "Number of subjects")->check(CLI::Range(10, 1000000));
    s->add_option("--bins", sim.bins, "Five-minute bins per day")->check(CLI::Range(3, 100000));
    s->add_option("--prevalence", sim.prevalence, "Target mortality prevalence")->check(CLI::Range(1e-6, 1.0 - 1e-6));
    s->add_option("--seed", sim.seed, "Random seed");
    s->add_option("--out", sim.out, "Output directory")->required();

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Fit a decomposition to count curves");
    f->add_option("--method", fit.method, "gfpca, pfpca or narfd")->required()->check(CLI::IsMember({"gfpca", "pfpca", "narfd"}));
    f->add_option("--input", fit.input, "Counts CSV (binned or minute-level)")->required()->check(CLI::ExistingFile);
    f->add_option("--wear", fit.wear, "Wear flags for minute-level input")->check(CLI::ExistingFile);
    f->add_option("--k", fit.k, "Number of components")->check(CLI::PositiveNumber);
    f->add_option("--m", fit.m, "Number of B-spline basis functions")->check(CLI::Range(4, 10000));
    f->add_option("--lambda", fit.lambda, "Smoothing parameter or 'auto'");
    f->add_option("--seed", fit.seed, "Random seed (NARFD start and folds)");
    f->add_option("--out", fit.out, "Output directory")->required();

    CompareArgs cmp;
    auto* c = app.add_subcommand("compare-mae", "Summarise per-subject MAE files");
    c->add_option("inputs", cmp.inputs, "mae_<method>.csv files")->required()->check(CLI::ExistingFile);
    c->add_option("--out", cmp.out, "Directory for mae_summary.csv");

    PredictArgs pr;
    auto* p = app.add_subcommand("predict", "Train a mortality classifier and score a held-out split");
    p->add_option("--model", pr.model, "logistic, forest or adaboost")->required()->check(CLI::IsMember({"logistic", "forest", "adaboost"}));
    p->add_option("--scores", pr.scores, "decomposition JSON or 'none'");
    p->add_option("--covariates", pr.covariates, "covariates.csv")->required()->check(CLI::ExistingFile);
    p->add_option("--mortality", pr.mortality, "mortality.csv")->required()->check(CLI::ExistingFile);
    p->add_option("--split", pr.split, "Training fraction per class")->check(CLI::Range(0.01, 0.99));
    p->add_option("--seed", pr.seed, "Random seed");
    p->add_option("--trees", pr.trees, "Trees (forest) or stages (adaboost)")->check(CLI::PositiveNumber);
    p->add_option("--out", pr.out, "Output directory")->required();

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Weighted ROC and AUC from a predictions CSV");
    e->add_option("--predictions", ev.predictions, "predictions_<model>_<scores>.csv")->required()->check(CLI::ExistingFile);
    e->add_option("--split", ev.split, "test, train or all");
    e->add_option("--out", ev.out, "Output directory")->required();

    GridArgs gr;
    auto* g = app.add_subcommand("grid", "AUC for every model with no scores and with each decomposition");
    g->add_option("--input", gr.input, "Counts CSV")->required()->check(CLI::ExistingFile);
    g->add_option("--wear", gr.wear, "Wear flags for minute-level input")->check(CLI::ExistingFile);
    g->add_option("--covariates", gr.covariates, "covariates.csv")->required()->check(CLI::ExistingFile);
    g->add_option("--mortality", gr.mortality, "mortality.csv")->required()->check(CLI::ExistingFile);
    g->add_option("--k", gr.k, "Number of components")->check(CLI::PositiveNumber);
    g->add_option("--m", gr.m, "Number of B-spline basis functions")->check(CLI::Range(4, 10000));
    g->add_option("--split", gr.split, "Training fraction per class")->check(CLI::Range(0.01, 0.99));
    g->add_option("--seed", gr.seed, "Random seed");
    g->add_option("--out", gr.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (s->parsed()) return cmd_simulate(sim, argv_list);
        if (f->parsed()) return cmd_fit(fit, argv_list);
        if (c->parsed()) return cmd_compare(cmp, argv_list);
        if (p->parsed()) return cmd_predict(pr, argv_list);
        if (e->parsed()) return cmd_evaluate(ev, argv_list);
        if (g->parsed()) return cmd_grid(gr, argv_list);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace funcount
