#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "funcount/cli.hpp"
#include "funcount/csv.hpp"

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "funcount");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return funcount::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::set<std::string> files_in(const fs::path& dir) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
    return names;
}

// Small simulated study shared by the tests in a suite.
class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        data_ = tmp_ / "data";
        ASSERT_EQ(run({"simulate", "--n", "300", "--bins", "24", "--seed", "5", "--out", data_.string()}), 0);
    }
    fs::path at(const std::string& name) const { return data_ / name; }

    fixtures::TempDir tmp_;
    fs::path data_;
};

}  // namespace

TEST_F(CliTest, SimulateWritesDocumentedSchemas) {
    const auto cov = funcount::csv::read(at("covariates.csv"));
    EXPECT_EQ(cov.header.front(), "subject_id");
    EXPECT_EQ(cov.header.back(), "survey_weight");
    EXPECT_EQ(cov.rows.size(), 300u);
    const auto mort = funcount::csv::read(at("mortality.csv"));
    EXPECT_EQ(mort.header, (std::vector<std::string>{"subject_id", "mortstat"}));
    const auto accel = funcount::csv::read(at("accel5.csv"));
    EXPECT_EQ(accel.header.size(), 25u);
    EXPECT_TRUE(fs::exists(at("run_manifest.json")));
}

TEST_F(CliTest, FitPfpcaWritesThreeArtifacts) {
    const fs::path out = tmp_ / "fit";
    ASSERT_EQ(run({"fit", "--method", "pfpca", "--input", at("accel5.csv").string(), "--k", "2", "--m", "8", "--out",
                   out.string()}),
              0);
    const auto files = files_in(out);
    for (const char* f : {"decomposition_pfpca.json", "mae_pfpca.csv", "effects_pfpca.csv", "run_manifest.json"}) {
        EXPECT_TRUE(files.count(f)) << f;
    }
}

TEST_F(CliTest, ZeroComponentsIsUsageError) {
    EXPECT_EQ(run({"fit", "--method", "gfpca", "--input", at("accel5.csv").string(), "--k", "0", "--out",
                   (tmp_ / "bad").string()}),
              2);
    EXPECT_EQ(run({"fit", "--method", "spline", "--input", at("accel5.csv").string(), "--out", (tmp_ / "bad").string()}),
              2);
    EXPECT_EQ(run({"nonsense"}), 2);
}

TEST_F(CliTest, ModuleErrorExitsOne) {
    // K above min(N - 1, T) is a validation error inside the fitting module.
    EXPECT_EQ(run({"fit", "--method", "gfpca", "--input", at("accel5.csv").string(), "--k", "30", "--out",
                   (tmp_ / "bad").string()}),
              1);
    EXPECT_EQ(run({"predict", "--model", "logistic", "--scores", at("missing.json").string(), "--covariates",
                   at("covariates.csv").string(), "--mortality", at("mortality.csv").string(), "--out",
                   (tmp_ / "bad").string()}),
              1);
}

TEST_F(CliTest, CompareMaeTabulatesEveryMethod) {
    std::vector<std::string> maes;
    for (const std::string m : {"gfpca", "pfpca", "narfd"}) {
        const fs::path out = tmp_ / m;
        ASSERT_EQ(run({"fit", "--method", m, "--input", at("accel5.csv").string(), "--k", "2", "--m", "8", "--seed", "3",
                       "--out", out.string()}),
                  0);
        maes.push_back((out / ("mae_" + m + ".csv")).string());
    }
    std::vector<std::string> args{"compare-mae"};
    args.insert(args.end(), maes.begin(), maes.end());
    args.insert(args.end(), {"--out", (tmp_ / "cmp").string()});
    ASSERT_EQ(run(args), 0);
    const auto t = funcount::csv::read(tmp_ / "cmp" / "mae_summary.csv");
    ASSERT_EQ(t.rows.size(), 3u);
    std::set<std::string> methods;
    for (const auto& r : t.rows) {
        methods.insert(r[0]);
        EXPECT_GT(std::stod(r[t.column("mean_mae")]), 0.0);
    }
    EXPECT_EQ(methods.size(), 3u);
}

TEST_F(CliTest, BaselineLogisticListsOnlyCovariates) {
    const fs::path out = tmp_ / "pred";
    ASSERT_EQ(run({"predict", "--model", "logistic", "--scores", "none", "--covariates", at("covariates.csv").string(),
                   "--mortality", at("mortality.csv").string(), "--seed", "2", "--out", out.string()}),
              0);
    const auto coef = funcount::csv::read(out / "coefficients_logistic_baseline.csv");
    EXPECT_EQ(coef.rows.front()[0], "(Intercept)");
    for (const auto& r : coef.rows) EXPECT_EQ(r[0].find("_score_"), std::string::npos) << r[0];
    for (const char* f : {"predictions_logistic_baseline.csv", "roc_logistic_baseline.csv",
                          "summary_logistic_baseline.json"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
}

TEST_F(CliTest, SameSeedIsByteIdentical) {
    const auto predict = [&](const fs::path& out) {
        return run({"predict", "--model", "forest", "--scores", "none", "--covariates", at("covariates.csv").string(),
                    "--mortality", at("mortality.csv").string(), "--trees", "25", "--seed", "9", "--out",
                    out.string()});
    };
    ASSERT_EQ(predict(tmp_ / "a"), 0);
    ASSERT_EQ(predict(tmp_ / "b"), 0);
    const auto files = files_in(tmp_ / "a");
    EXPECT_EQ(files, files_in(tmp_ / "b"));
    for (const auto& f : files) {
        if (f == "run_manifest.json") continue;  // records the differing --out path
        EXPECT_EQ(fixtures::read_file(tmp_ / "a" / f), fixtures::read_file(tmp_ / "b" / f)) << f;
    }
}

TEST_F(CliTest, ManifestReplaysByteIdentically) {
    const fs::path out = tmp_ / "fit";
    ASSERT_EQ(run({"fit", "--method", "narfd", "--input", at("accel5.csv").string(), "--k", "2", "--m", "8", "--seed",
                   "4", "--out", out.string()}),
              0);
    const auto manifest = nlohmann::json::parse(fixtures::read_file(out / "run_manifest.json"));
    EXPECT_EQ(manifest["command"], "fit");
    EXPECT_EQ(manifest["seed"], 4);
    ASSERT_EQ(manifest["inputs"].size(), 1u);
    EXPECT_EQ(manifest["inputs"][0]["sha256"].get<std::string>().size(), 64u);

    std::map<std::string, std::string> before;
    for (const auto& f : files_in(out)) before[f] = fixtures::read_file(out / f);
    fs::remove_all(out);
    ASSERT_EQ(run(manifest["argv"].get<std::vector<std::string>>()), 0);
    for (const auto& [name, contents] : before) EXPECT_EQ(fixtures::read_file(out / name), contents) << name;
    EXPECT_EQ(manifest["outputs"].size(), before.size() - 1);
}

TEST_F(CliTest, EvaluateRecomputesTestAuc) {
    const fs::path pred = tmp_ / "pred";
    ASSERT_EQ(run({"predict", "--model", "adaboost", "--scores", "none", "--covariates", at("covariates.csv").string(),
                   "--mortality", at("mortality.csv").string(), "--trees", "20", "--out", pred.string()}),
              0);
    ASSERT_EQ(run({"evaluate", "--predictions", (pred / "predictions_adaboost_baseline.csv").string(), "--out",
                   (tmp_ / "eval").string()}),
              0);
    const auto summary = nlohmann::json::parse(fixtures::read_file(pred / "summary_adaboost_baseline.json"));
    const auto eval = nlohmann::json::parse(fixtures::read_file(tmp_ / "eval" / "evaluation_predictions_adaboost_baseline.json"));
    EXPECT_DOUBLE_EQ(eval["auc"].get<double>(), summary["auc_test"].get<double>());
}
