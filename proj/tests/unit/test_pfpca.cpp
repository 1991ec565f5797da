#include <cmath>

#include <boost/random/poisson_distribution.hpp>
#include <gtest/gtest.h>

#include "funcount/basis.hpp"
#include "funcount/pfpca.hpp"
#include "funcount/rng.hpp"
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

double deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double mu = std::exp(eta(j));
        d += 2.0 * ((y(j) > 0 ? y(j) * std::log(y(j) / mu) : 0.0) - (y(j) - mu));
    }
    return d;
}

}  // namespace

TEST(Pfpca, ConstantCurves) {
    const CountMatrix counts = CountMatrix::Constant(12, 40, 7);
    PfpcaOptions o;
    o.n_components = 1;
    o.n_basis = 10;
    const Decomposition d = fit_pfpca(as_curves(counts, unit_grid(40)), o);
    EXPECT_LE((d.mean.array() - std::log(7.0)).abs().maxCoeff(), 1e-3);
    EXPECT_LE(d.eigenvalues.cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((d.fitted.array() - 7.0).abs().maxCoeff(), 1e-2);
}

TEST(Pfpca, InterceptOnlyLatentFit) {
    const Eigen::VectorXd grid = unit_grid(25);
    const BasisSystem b = build_basis(grid, 1, 0);
    Eigen::VectorXd y(25);
    for (Eigen::Index j = 0; j < 25; ++j) y(j) = static_cast<double>((j * 7) % 5);
    const LatentCurveFit fit = fit_latent_log_intensity(y, b, 0.0);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.log_intensity(3), std::log(y.mean()), 1e-6);
}

TEST(Pfpca, AllZeroCurveStaysBounded) {
    const BasisSystem b = build_basis(unit_grid(30), 8, 3);
    const LatentCurveFit fit = fit_latent_log_intensity(Eigen::VectorXd::Zero(30), b, 1.0);
    EXPECT_TRUE(fit.log_intensity.allFinite());
    EXPECT_LT(fit.log_intensity.maxCoeff(), -5.0);
}

TEST(Pfpca, RecoversSimulatedSubspaceAndScores) {
    const Eigen::VectorXd grid = unit_grid(100);
    const Eigen::MatrixXd comps = sine_cosine_components(grid);
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(100, std::log(5.0));
    const CountSample s = simulate_poisson_fpca(mean, comps, Eigen::Vector2d(3.0, 1.5), 200, 42);
    PfpcaOptions o;
    o.n_components = 2;
    const Decomposition d = fit_pfpca(as_curves(s.counts, grid), o);
    EXPECT_LT(oracle::principal_angle_deg(comps, d.components, trapezoid_weights(grid)), 15.0);
    for (int k = 0; k < 2; ++k) EXPECT_GT(std::abs(oracle::correlation(d.scores.col(k), s.scores.col(k))), 0.8);
    EXPECT_GT(d.fitted.minCoeff(), 0.0);
    EXPECT_TRUE(d.diagnostics.empty());
}

TEST(ScoreRefit, NullDepartureGivesSmallScores) {
    const Eigen::VectorXd grid = unit_grid(100);
    const Eigen::MatrixXd comps = sine_cosine_components(grid);
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(100, std::log(20.0));
    const Eigen::VectorXd y = mean.array().exp().round().matrix();
    const Eigen::VectorXd s = estimate_scores_poisson(y, mean, comps);
    EXPECT_LE(s.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ScoreRefit, UnbiasedAtHighIntensity) {
    const Eigen::VectorXd grid = unit_grid(100);
    const Eigen::MatrixXd comps = sine_cosine_components(grid);
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(100, std::log(100.0));
    const Eigen::Vector2d truth(2.0, 0.0);
    const Eigen::VectorXd mu = (mean + comps.transpose() * truth).array().exp().matrix();
    double total = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        Engine g = make_engine(77, 1, static_cast<std::uint64_t>(rep));
        Eigen::VectorXd y(100);
        for (Eigen::Index j = 0; j < 100; ++j) y(j) = boost::random::poisson_distribution<int>(mu(j))(g);
        total += estimate_scores_poisson(y, mean, comps)(0);
    }
    EXPECT_NEAR(total / 100.0, 2.0, 0.3);
}

TEST(ScoreRefit, OptimumBeatsZeroAndHasSmallGradient) {
    const Eigen::VectorXd grid = unit_grid(50);
    const Eigen::MatrixXd comps = sine_cosine_components(grid);
    for (int rep = 0; rep < 20; ++rep) {
        Engine g = make_engine(78, 1, static_cast<std::uint64_t>(rep));
        Eigen::VectorXd y(50);
        for (Eigen::Index j = 0; j < 50; ++j) y(j) = static_cast<double>(g() % 9);
        const Eigen::VectorXd mean = Eigen::VectorXd::Constant(50, std::log(std::max(y.mean(), 0.5)));
        const Eigen::VectorXd s = estimate_scores_poisson(y, mean, comps);
        EXPECT_LE(poisson_score_gradient(y, mean, comps, s).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_GE(poisson_score_loglik(y, mean, comps, s),
                  poisson_score_loglik(y, mean, comps, Eigen::VectorXd::Zero(2)));
        const auto f = [&](const Eigen::VectorXd& v) { return poisson_score_loglik(y, mean, comps, v); };
        const Eigen::VectorXd fd = oracle::central_difference(f, s, 1e-5);
        EXPECT_LE(fd.cwiseAbs().maxCoeff(), 1e-4 * (1.0 + std::abs(f(s))));
    }
}

TEST(ScoreRefit, NestedFitsHaveMonotoneDeviance) {
    const Eigen::VectorXd grid = unit_grid(100);
    const Eigen::MatrixXd comps = sine_cosine_components(grid);
    const Eigen::VectorXd mean = Eigen::VectorXd::Constant(100, std::log(8.0));
    const CountSample smp = simulate_poisson_fpca(mean, comps, Eigen::Vector2d(3.0, 1.5), 30, 9);
    for (Eigen::Index i = 0; i < 30; ++i) {
        const Eigen::VectorXd y = smp.counts.row(i).transpose().cast<double>();
        const Eigen::VectorXd s1 = estimate_scores_poisson(y, mean, comps.topRows(1));
        const Eigen::VectorXd s2 = estimate_scores_poisson(y, mean, comps);
        EXPECT_LE(deviance(y, mean + comps.transpose() * s2), deviance(y, mean + comps.topRows(1).transpose() * s1) + 1e-9);
    }
}

TEST(ScoreRefit, NonConvergenceCarriesLastIterate) {
    const Eigen::VectorXd grid = unit_grid(100);
    const Eigen::MatrixXd comps = sine_cosine_components(grid);
    const Eigen::VectorXd mean = Eigen::VectorXd::Zero(100);
    const Eigen::VectorXd y = (mean + comps.transpose() * Eigen::Vector2d(40.0, -20.0)).array().exp().round().matrix();
    try {
        estimate_scores_poisson(y, mean, comps, 1);
        FAIL() << "expected ScoreConvergenceError";
    } catch (const ScoreConvergenceError& e) {
        EXPECT_EQ(e.last_iterate().size(), 2);
        EXPECT_TRUE(e.last_iterate().allFinite());
    }
}

TEST(ScoreRefit, RejectsShapeMismatch) {
    const Eigen::MatrixXd comps = sine_cosine_components(unit_grid(10));
    EXPECT_THROW(estimate_scores_poisson(Eigen::VectorXd::Ones(9), Eigen::VectorXd::Zero(9), comps), InputError);
}

TEST(Pfpca, RejectsTooManyComponents) {
    PfpcaOptions o;
    o.n_components = 3;
    EXPECT_THROW(fit_pfpca(as_curves(CountMatrix::Constant(3, 10, 1), unit_grid(10)), o), ValidationError);
}
