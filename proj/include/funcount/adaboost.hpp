#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "funcount/predictor_table.hpp"
#include "funcount/tree.hpp"

namespace funcount {

struct AdaBoostOptions {
    int n_trees = 100;
    int depth = 1;
    double shrinkage = 0.1;
    int min_obs = 10;
    /// Fraction of rows sampled (without replacement) per stage. Below 1 the
    /// training loss is no longer guaranteed to fall at every stage.
    double bag_fraction = 1.0;
    std::uint64_t seed = 0;
};

/// Gradient boosting with exponential loss on y in {-1, +1}.
struct AdaBoostModel {
    double initial = 0.0;               // F_0
    double shrinkage = 0.1;
    std::vector<DecisionTree> trees;    // leaf values are unshrunk Newton steps
    std::vector<double> loss_trace;     // sum_i w_i exp(-y_i F_i), F_0 first
    Eigen::VectorXd loss_reduction;     // per table column

    Eigen::VectorXd decision_function(const Eigen::MatrixXd& x) const;
    /// 1 / (1 + exp(-2F)).
    Eigen::VectorXd predict_probability(const Eigen::MatrixXd& x) const;
};

/// Each stage fits a weighted least-squares tree to y_i exp(-y_i F_i) with
/// the survey weights, replaces leaf values by the Newton step
/// sum w y e^{-yF} / sum w e^{-yF} over the leaf and adds shrinkage times
/// the tree to F.
AdaBoostModel fit_adaboost(const PredictorTable& table, const AdaBoostOptions& options = {});

}  // namespace funcount
