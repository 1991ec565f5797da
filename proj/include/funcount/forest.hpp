#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "funcount/predictor_table.hpp"
#include "funcount/tree.hpp"

namespace funcount {

struct ForestOptions {
    int n_trees = 500;
    int mtry = 0;  // 0 means ceil(sqrt(p))
    int min_node = 10;
    std::uint64_t seed = 0;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    Eigen::VectorXd gini_decrease;  // per table column, summed over trees

    /// Fraction of trees voting for class 1.
    Eigen::VectorXd predict_probability(const Eigen::MatrixXd& x) const;
};

/// Each tree sees a bootstrap sample of the table drawn with probabilities
/// proportional to the survey weights. Trees are grown in parallel; tree t
/// uses its own random stream, so the forest does not depend on scheduling.
RandomForest fit_random_forest(const PredictorTable& table, const ForestOptions& options = {});

}  // namespace funcount
