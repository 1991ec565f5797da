#include <cmath>

#include <gtest/gtest.h>

#include "funcount/decomposition.hpp"
#include "funcount/error.hpp"
#include "funcount/fiteval.hpp"

using namespace funcount;

namespace {

Decomposition small_decomposition(Method method) {
    Decomposition d;
    d.method = method;
    d.grid = Eigen::VectorXd::LinSpaced(5, 0.0, 4.0);
    d.subject_ids = {"a", "b", "c"};
    d.mean = Eigen::VectorXd::LinSpaced(5, 0.5, 1.5);
    if (method == Method::NARFD) d.mean.setZero();
    d.components.resize(2, 5);
    d.components << 0.1, 0.2, 0.3, 0.2, 0.1, 0.5, 0.0, 0.0, 0.0, 0.5;
    d.scores.resize(3, 2);
    d.scores << 1.0, 2.0, 2.0, 2.0, 3.0, 2.0;  // second column constant
    d.fitted = reconstruct(method, d.mean, d.components, d.scores);
    return d;
}

double sample_sd(const Eigen::VectorXd& v) {
    return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(Mae, Examples) {
    CountMatrix y(1, 3);
    y << 2, 2, 5;
    Eigen::MatrixXd f(1, 3);
    f << 1, 2, 3;
    EXPECT_DOUBLE_EQ(mae_per_subject(f, y)(0), 1.0);
    EXPECT_EQ(mae_per_subject(y.cast<double>(), y), Eigen::VectorXd::Zero(1));
    EXPECT_DOUBLE_EQ(mae_per_subject(y.cast<double>().array() + 1.0, y)(0), 1.0);
}

TEST(Mae, ShapeMismatchIsError) {
    EXPECT_THROW(mae_per_subject(Eigen::MatrixXd::Zero(2, 3), CountMatrix::Zero(2, 4)), Error);
}

TEST(EffectCurves, ConstantScoresGiveFlatEffect) {
    for (Method m : {Method::GFPCA, Method::PFPCA, Method::NARFD}) {
        const EffectCurves e = effect_curves(small_decomposition(m), 2);
        EXPECT_LE((e.plus - e.base).cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LE((e.minus - e.base).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(EffectCurves, ZeroComponentGivesFlatEffect) {
    Decomposition d = small_decomposition(Method::PFPCA);
    d.components.row(0).setZero();
    const EffectCurves e = effect_curves(d, 1);
    EXPECT_EQ(e.plus, e.base);
    EXPECT_EQ(e.minus, e.base);
}

TEST(EffectCurves, PfpcaRatioIsExpTwo) {
    Decomposition d = small_decomposition(Method::PFPCA);
    d.mean.setZero();
    d.components.row(0).setOnes();
    d.scores.col(0) << -1.0, 0.0, 1.0;  // sample sd 1
    const EffectCurves e = effect_curves(d, 1);
    EXPECT_LE((e.plus.array() / e.base.array() - std::exp(2.0)).abs().maxCoeff(), 1e-12);
}

TEST(EffectCurves, GaussianCurvesReflectThroughBase) {
    const Decomposition d = small_decomposition(Method::GFPCA);
    const EffectCurves e = effect_curves(d, 1);
    EXPECT_LE((e.plus + e.minus - 2.0 * e.base).cwiseAbs().maxCoeff(), 1e-14);
    const double sd = sample_sd(d.scores.col(0));
    EXPECT_LE((e.plus - d.mean - 2.0 * sd * d.components.row(0).transpose()).cwiseAbs().maxCoeff(), 1e-14);
    const EffectCurves c = to_count_scale(e);
    EXPECT_LE((c.base.array() - (e.base.array().exp() - 1.0)).abs().maxCoeff(), 1e-12);
}

TEST(EffectCurves, PfpcaReflectsOnLogScale) {
    const EffectCurves e = effect_curves(small_decomposition(Method::PFPCA), 1);
    EXPECT_LE((e.plus.array().log() + e.minus.array().log() - 2.0 * e.base.array().log()).abs().maxCoeff(), 1e-12);
}

TEST(EffectCurves, NarfdMinusIsClipped) {
    Decomposition d = small_decomposition(Method::NARFD);
    d.components.row(0) *= 100.0;
    const EffectCurves e = effect_curves(d, 1);
    EXPECT_GE(e.minus.minCoeff(), 0.0);
    const Eigen::VectorXd base = d.components.transpose() * d.scores.colwise().mean().transpose();
    EXPECT_LE((e.base - base).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EffectCurves, RangeChecked) {
    const Decomposition d = small_decomposition(Method::GFPCA);
    EXPECT_THROW(effect_curves(d, 0), Error);
    EXPECT_THROW(effect_curves(d, 3), Error);
}

TEST(Formatting, EffectsAndMaeTables) {
    const Decomposition d = small_decomposition(Method::PFPCA);
    const std::string effects = format_effects(d);
    EXPECT_EQ(effects.substr(0, effects.find('\n')), "component,time,base,plus,minus");
    EXPECT_EQ(std::count(effects.begin(), effects.end(), '\n'), 1 + 2 * 5);
    const std::string mae = format_mae(d, Eigen::Vector3d(0.5, 1.0, 2.25));
    EXPECT_EQ(mae, "subject_id,method,mae\na,pfpca,0.5\nb,pfpca,1\nc,pfpca,2.25\n");
}
