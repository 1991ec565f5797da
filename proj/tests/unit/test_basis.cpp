#include <gtest/gtest.h>

#include "funcount/basis.hpp"
#include "funcount/error.hpp"
#include "funcount/smoothing.hpp"
#include "oracles.hpp"

using namespace funcount;

namespace {

Eigen::VectorXd greville(const BasisSystem& b) {
    Eigen::VectorXd xi(b.n_basis);
    for (int k = 0; k < b.n_basis; ++k) xi(k) = b.knots.segment(k + 1, b.degree).mean();
    return xi;
}

Eigen::VectorXd fit_coefficients(const BasisSystem& b, const std::function<double(double)>& f) {
    const Eigen::VectorXd fine = Eigen::VectorXd::LinSpaced(400, b.grid(0), b.grid(b.grid.size() - 1));
    const Eigen::MatrixXd design = b.evaluate(fine);
    const Eigen::VectorXd y = fine.unaryExpr(f);
    return design.colPivHouseholderQr().solve(y);
}

}  // namespace

TEST(BuildBasis, PiecewiseConstantIsIndicator) {
    Eigen::VectorXd grid(4);
    grid << 0.0, 0.25, 0.75, 1.0;
    const BasisSystem b = build_basis(grid, 2, 0);
    Eigen::MatrixXd expected(4, 2);
    expected << 1, 0, 1, 0, 0, 1, 0, 1;
    EXPECT_TRUE(b.design.isApprox(expected));
}

TEST(BuildBasis, PartitionOfUnityAndRange) {
    for (int degree : {0, 1, 2, 3, 4}) {
        const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(97, -3.0, 11.0);
        const BasisSystem b = build_basis(grid, 17, degree);
        EXPECT_LE((b.design.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-10) << "degree " << degree;
        EXPECT_GE(b.design.minCoeff(), 0.0);
        EXPECT_LE(b.design.maxCoeff(), 1.0 + 1e-12);
    }
}

TEST(BuildBasis, FullColumnRankWhenEnoughPoints) {
    const BasisSystem b = build_basis(Eigen::VectorXd::LinSpaced(60, 0.0, 1.0), 30, 3);
    EXPECT_EQ(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(b.design).rank(), 30);
}

TEST(BuildBasis, CubicReproducesLines) {
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(288, 2.5, 1437.5);
    const BasisSystem b = build_basis(grid, 30, 3);
    const Eigen::VectorXd coef = (1.7 - 0.003 * greville(b).array()).matrix();
    const Eigen::VectorXd line = (1.7 - 0.003 * grid.array()).matrix();
    EXPECT_LE((b.design * coef - line).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(BuildBasis, RejectsBadInput) {
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
    EXPECT_THROW(build_basis(grid, 3, 3), ValidationError);
    Eigen::VectorXd flat = grid;
    flat(4) = flat(3);
    EXPECT_THROW(build_basis(flat, 6, 3), ValidationError);
    EXPECT_THROW(build_basis(Eigen::VectorXd::Zero(1), 4, 3), ValidationError);
}

TEST(Penalty, SymmetricPsdAndAnnihilatesLines) {
    const BasisSystem b = build_basis(Eigen::VectorXd::LinSpaced(50, 0.0, 3.0), 14, 3);
    const Eigen::MatrixXd& p = b.penalty;
    EXPECT_LE((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-12 * p.cwiseAbs().maxCoeff());
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p).eigenvalues().minCoeff(), -1e-10);
    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(14, 2.5);
    const Eigen::VectorXd line = (0.3 + 4.0 * greville(b).array()).matrix();
    EXPECT_LE(std::abs(constant.dot(p * constant)), 1e-10);
    EXPECT_LE(std::abs(line.dot(p * line)), 1e-10);
}

TEST(Penalty, SquareHasIntegralFour) {
    const BasisSystem b = build_basis(Eigen::VectorXd::LinSpaced(40, 0.0, 1.0), 12, 3);
    const Eigen::VectorXd c = fit_coefficients(b, [](double t) { return t * t; });
    EXPECT_NEAR(c.dot(b.penalty * c), 4.0, 1e-8);
}

TEST(Penalty, MatchesQuadratureForRandomCoefficients) {
    const BasisSystem b = build_basis(Eigen::VectorXd::LinSpaced(70, -1.0, 2.0), 18, 3);
    std::srand(3);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::VectorXd c = Eigen::VectorXd::Random(18);
        const double quad =
            oracle::simpson([&](double x) { return std::pow(b.evaluate(x, 2).dot(c), 2); }, -1.0, 2.0, 15 * 2 * 60);
        EXPECT_NEAR(c.dot(b.penalty * c), quad, 1e-6 * quad);
    }
}

TEST(Penalty, NeedsDegreeTwo) {
    const BasisSystem b = build_basis(Eigen::VectorXd::LinSpaced(20, 0.0, 1.0), 6, 1);
    EXPECT_THROW(second_derivative_penalty(b), ValidationError);
    EXPECT_EQ(b.penalty.size(), 0);
}

TEST(Evaluate, DerivativeMatchesFiniteDifference) {
    const BasisSystem b = build_basis(Eigen::VectorXd::LinSpaced(30, 0.0, 5.0), 10, 3);
    for (double x : {0.3, 1.7, 2.51, 4.9}) {
        const Eigen::VectorXd fd = (b.evaluate(x + 1e-6) - b.evaluate(x - 1e-6)) / 2e-6;
        EXPECT_LE((b.evaluate(x, 1) - fd).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(TrapezoidWeights, IntegratesLinesExactly) {
    Eigen::VectorXd grid(5);
    grid << 0.0, 0.5, 1.5, 1.75, 3.0;
    const Eigen::VectorXd w = trapezoid_weights(grid);
    EXPECT_NEAR(w.sum(), 3.0, 1e-15);
    EXPECT_NEAR(w.dot(grid), 4.5, 1e-14);
}

TEST(SmoothCurve, RecoversSmoothSignal) {
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(200, 0.0, 1.0);
    const BasisSystem b = build_basis(grid, 20, 3);
    const Eigen::VectorXd truth = (6.0 * grid.array()).sin().matrix();
    Eigen::VectorXd noisy = truth;
    std::srand(11);
    noisy += 0.2 * Eigen::VectorXd::Random(200);
    const CurveSmooth s = smooth_curve_gcv(b, noisy);
    EXPECT_LT((s.fitted - truth).norm(), 0.5 * (noisy - truth).norm());
    EXPECT_GT(s.edf, 2.0);
    EXPECT_LT(s.edf, 20.0);
}

TEST(SmoothCovariance, IgnoresDiagonalNugget) {
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(40, 0.0, 1.0);
    const BasisSystem b = build_basis(grid, 12, 3);
    const Eigen::VectorXd phi = (3.0 * grid.array()).cos().matrix();
    Eigen::MatrixXd cov = 2.0 * phi * phi.transpose();
    cov.diagonal().array() += 0.5;
    const CovarianceSmooth s = smooth_covariance_gcv(b, cov);
    EXPECT_NEAR(s.noise_var, 0.5, 0.05);
    EXPECT_LE((s.smoothed - s.smoothed.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((s.smoothed - 2.0 * phi * phi.transpose()).cwiseAbs().maxCoeff(), 0.05);
}
