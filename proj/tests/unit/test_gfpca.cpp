#include <cmath>

#include <gtest/gtest.h>

#include "funcount/basis.hpp"
#include "funcount/decomposition.hpp"
#include "funcount/error.hpp"
#include "funcount/gfpca.hpp"
#include "funcount/simulate.hpp"
#include "oracles.hpp"

using namespace funcount;

namespace {

Eigen::VectorXd unit_grid(Eigen::Index t) { return Eigen::VectorXd::LinSpaced(t, 0.5, static_cast<double>(t) - 0.5); }

CountCurveSet as_curves(const CountMatrix& counts, const Eigen::VectorXd& grid) {
    CountCurveSet c;
    c.grid = grid;
    c.counts = counts;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) c.subject_ids.push_back("S" + std::to_string(i));
    return c;
}

CountCurveSet simulated(std::uint64_t seed, Eigen::Index n = 120) {
    const Eigen::VectorXd grid = unit_grid(60);
    const Eigen::VectorXd mean = (1.8 + 0.3 * (grid.array() / 10.0).sin()).matrix();
    const RealSample s = simulate_gaussian(mean, sine_cosine_components(grid), Eigen::Vector2d(3.0, 1.5), 0.1, n, seed);
    return as_curves(log_scale_to_counts(s.values), grid);
}

}  // namespace

TEST(Gfpca, IdenticalRowsGiveZeroVariation) {
    CountMatrix counts(5, 30);
    for (Eigen::Index j = 0; j < 30; ++j) counts.col(j).setConstant(3 + (j % 7));
    const Decomposition d = fit_gfpca(as_curves(counts, unit_grid(30)), {2, 10, 3});
    EXPECT_LE(d.eigenvalues.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(d.scores.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_TRUE(d.fitted.allFinite());
    EXPECT_GE(d.fitted.minCoeff(), 0.0);
}

TEST(Gfpca, TwoCurvePca) {
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(50, 0.0, 1.0);
    const Eigen::VectorXd w = trapezoid_weights(grid);
    Eigen::VectorXd u = (2.0 * grid.array() - 0.5).matrix();
    u /= std::sqrt(w.dot(u.cwiseProduct(u)));
    const Eigen::VectorXd m = (1.0 + 0.5 * grid.array().square()).matrix();
    Eigen::MatrixXd curves(2, 50);
    curves.row(0) = (m + u).transpose();
    curves.row(1) = (m - u).transpose();
    const FpcaModel model = fit_fpca_matrix(curves, grid, {1, 12, 3});
    EXPECT_LT(oracle::principal_angle_deg(u.transpose(), model.components, w), 0.5);
    const Eigen::MatrixXd s = project_curves(model, curves);
    EXPECT_NEAR(std::abs(s(0, 0)), 1.0, 1e-3);
    EXPECT_NEAR(s(0, 0), -s(1, 0), 1e-8);
}

TEST(Gfpca, RecoversSimulatedSubspace) {
    const CountCurveSet data = simulated(3, 200);
    const Decomposition d = fit_gfpca(data, {2, 30, 3});
    EXPECT_LT(oracle::principal_angle_deg(sine_cosine_components(data.grid), d.components, trapezoid_weights(data.grid)),
              10.0);
}

TEST(Gfpca, StructuralInvariants) {
    const CountCurveSet data = simulated(4);
    const Decomposition d = fit_gfpca(data, {4, 20, 3});
    const Eigen::VectorXd w = trapezoid_weights(data.grid);
    const Eigen::MatrixXd gram = d.components * w.asDiagonal() * d.components.transpose();
    EXPECT_LE((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE(d.scores.colwise().mean().cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GE(d.eigenvalues.minCoeff(), 0.0);
    for (Eigen::Index k = 1; k < 4; ++k) EXPECT_GE(d.eigenvalues(k - 1), d.eigenvalues(k));
    EXPECT_GE(d.fitted.minCoeff(), 0.0);
    for (Eigen::Index k = 0; k < 4; ++k) {
        Eigen::Index arg;
        d.components.row(k).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(d.components(k, arg), 0.0);
    }
}

TEST(Gfpca, ProjectionConsistency) {
    const CountCurveSet data = simulated(5);
    const Decomposition d = fit_gfpca(data, {3, 20, 3});
    EXPECT_LE((project_scores(d, data) - d.scores).cwiseAbs().maxCoeff(), 1e-8);

    FpcaModel model;
    model.grid = d.grid;
    model.weights = trapezoid_weights(d.grid);
    model.mean = d.mean;
    model.components = d.components;
    EXPECT_LE(project_curves(model, d.mean.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::RowVectorXd shifted = d.mean.transpose() + 2.0 * std::sqrt(d.eigenvalues(0)) * d.components.row(0);
    const Eigen::MatrixXd s = project_curves(model, shifted);
    EXPECT_NEAR(s(0, 0), 2.0 * std::sqrt(d.eigenvalues(0)), 1e-8);
    EXPECT_LE(s.rightCols(2).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Gfpca, ReconstructionErrorFallsWithK) {
    const CountCurveSet data = simulated(6);
    const Eigen::MatrixXd z = (data.counts.cast<double>().array() + 1.0).log();
    const Decomposition full = fit_gfpca(data, {5, 20, 3});
    double previous = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k <= 5; ++k) {
        const Eigen::MatrixXd recon = (full.scores.leftCols(k) * full.components.topRows(k)).rowwise() +
                                      full.mean.transpose();
        const double err = (recon - z).squaredNorm();
        EXPECT_LE(err, previous + 1e-9);
        previous = err;
    }
}

TEST(Gfpca, RejectsTooManyComponents) {
    const CountCurveSet data = simulated(7, 4);
    EXPECT_THROW(fit_gfpca(data, {4, 20, 3}), ValidationError);
    EXPECT_THROW(fit_gfpca(data, {0, 20, 3}), ValidationError);
}

TEST(Gfpca, ProjectScoresRejectsGridMismatch) {
    const CountCurveSet data = simulated(8);
    const Decomposition d = fit_gfpca(data, {2, 20, 3});
    CountCurveSet other = data;
    other.grid = unit_grid(59);
    other.counts = data.counts.leftCols(59);
    EXPECT_THROW(project_scores(d, other), Error);
}

TEST(Decomposition, JsonRoundTrip) {
    const CountCurveSet data = simulated(9, 40);
    const Decomposition d = fit_gfpca(data, {2, 15, 3});
    const Decomposition back = decomposition_from_json(nlohmann::json::parse(to_json(d).dump()));
    EXPECT_EQ(back.method, Method::GFPCA);
    EXPECT_EQ(back.subject_ids, d.subject_ids);
    EXPECT_EQ(back.components, d.components);
    EXPECT_EQ(back.scores, d.scores);
    EXPECT_LE((back.fitted - d.fitted).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(back.noise_var, d.noise_var);
}

TEST(Decomposition, MethodNames) {
    EXPECT_EQ(parse_method("pfpca"), Method::PFPCA);
    EXPECT_EQ(parse_method("NARFD"), Method::NARFD);
    EXPECT_EQ(method_slug(Method::GFPCA), "gfpca");
    EXPECT_THROW(parse_method("pca"), Error);
}
