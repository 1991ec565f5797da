#include <cmath>

#include <boost/random/uniform_real_distribution.hpp>
#include <gtest/gtest.h>

#include "funcount/error.hpp"
#include "funcount/metrics.hpp"
#include "funcount/rng.hpp"
#include "oracles.hpp"

using namespace funcount;

TEST(WeightedRoc, FourPointFixture) {
    const Eigen::Vector4d p(0.9, 0.8, 0.4, 0.3);
    const Eigen::Vector4i y(1, 0, 1, 0);
    const Eigen::Vector4d w(1, 2, 1, 2);
    const auto roc = weighted_roc(p, y, w);
    // Hand enumeration: positives weigh 2, negatives 4.
    const std::vector<std::array<double, 3>> expected{
        {INFINITY, 0.0, 0.0}, {0.9, 0.0, 0.5}, {0.8, 0.5, 0.5}, {0.4, 0.5, 1.0}, {0.3, 1.0, 1.0}};
    ASSERT_EQ(roc.size(), expected.size());
    for (std::size_t i = 0; i < roc.size(); ++i) {
        EXPECT_EQ(roc[i].threshold, expected[i][0]);
        EXPECT_DOUBLE_EQ(roc[i].fpr, expected[i][1]);
        EXPECT_DOUBLE_EQ(roc[i].tpr, expected[i][2]);
    }
    EXPECT_DOUBLE_EQ(auc_from_roc(roc), 0.75);
    EXPECT_NEAR(weighted_auc(p, y, w), oracle::weighted_concordance(p, y, w), 1e-15);
}

TEST(WeightedRoc, PerfectSeparation) {
    const Eigen::Vector4d p(0.9, 0.7, 0.2, 0.1);
    const Eigen::Vector4i y(1, 1, 0, 0);
    const auto roc = weighted_roc(p, y, Eigen::Vector4d::Ones());
    EXPECT_TRUE(std::any_of(roc.begin(), roc.end(), [](const RocPoint& r) { return r.fpr == 0.0 && r.tpr == 1.0; }));
    EXPECT_DOUBLE_EQ(weighted_auc(p, y, Eigen::Vector4d::Ones()), 1.0);
}

TEST(WeightedRoc, AllTiedIsDiagonal) {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(6, 0.3);
    Eigen::VectorXi y(6);
    y << 1, 0, 0, 1, 0, 0;
    const auto roc = weighted_roc(p, y, Eigen::VectorXd::LinSpaced(6, 1.0, 2.0));
    ASSERT_EQ(roc.size(), 2u);
    EXPECT_EQ(roc[0].fpr, 0.0);
    EXPECT_EQ(roc[1].tpr, 1.0);
    EXPECT_DOUBLE_EQ(weighted_auc(p, y, Eigen::VectorXd::Ones(6)), 0.5);
}

TEST(WeightedRoc, MonotoneAndEndsAtOne) {
    Engine g = make_engine(1, 1);
    boost::random::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::VectorXd p = Eigen::VectorXd::NullaryExpr(40, [&] { return std::round(10 * u(g)) / 10; });
    const Eigen::VectorXi y = Eigen::VectorXi::NullaryExpr(40, [&] { return u(g) < 0.3 ? 1 : 0; });
    const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(40, [&] { return 0.5 + u(g); });
    const auto roc = weighted_roc(p, y, w);
    for (std::size_t i = 1; i < roc.size(); ++i) {
        EXPECT_GE(roc[i].fpr, roc[i - 1].fpr);
        EXPECT_GE(roc[i].tpr, roc[i - 1].tpr);
        EXPECT_LT(roc[i].threshold, roc[i - 1].threshold);
    }
    EXPECT_EQ(roc.back().fpr, 1.0);
    EXPECT_EQ(roc.back().tpr, 1.0);
}

TEST(WeightedAuc, InvariantUnderMonotoneTransform) {
    Engine g = make_engine(2, 1);
    boost::random::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::VectorXd p = Eigen::VectorXd::NullaryExpr(50, [&] { return u(g); });
    const Eigen::VectorXi y = Eigen::VectorXi::NullaryExpr(50, [&] { return u(g) < 0.4 ? 1 : 0; });
    const Eigen::VectorXd w = Eigen::VectorXd::NullaryExpr(50, [&] { return 0.5 + u(g); });
    const Eigen::VectorXd q = (p.array() * 3.0 + 1.0).log().matrix();
    EXPECT_NEAR(weighted_auc(p, y, w), weighted_auc(q, y, w), 1e-14);
}

TEST(WeightedAuc, EqualWeightsGiveClassicalAuc) {
    Eigen::VectorXd p(6);
    p << 0.1, 0.4, 0.35, 0.8, 0.65, 0.2;
    Eigen::VectorXi y(6);
    y << 0, 0, 1, 1, 1, 0;
    // Mann-Whitney count: 8 of 9 positive-negative pairs ordered correctly.
    EXPECT_NEAR(weighted_auc(p, y, Eigen::VectorXd::Constant(6, 3.7)), 8.0 / 9.0, 1e-15);
}

TEST(WeightedAuc, SingleClassIsError) {
    EXPECT_THROW(weighted_auc(Eigen::Vector2d(0.1, 0.2), Eigen::Vector2i(1, 1), Eigen::Vector2d::Ones()),
                 PreconditionError);
}

TEST(WeightedAuc, NonpositiveWeightIsError) {
    EXPECT_THROW(weighted_roc(Eigen::Vector2d(0.1, 0.2), Eigen::Vector2i(1, 0), Eigen::Vector2d(1.0, 0.0)), Error);
}

TEST(FormatRoc, Header) {
    const auto roc = weighted_roc(Eigen::Vector2d(0.8, 0.1), Eigen::Vector2i(1, 0), Eigen::Vector2d::Ones());
    const std::string csv = format_roc(roc);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "threshold,fpr,tpr");
}
