#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "funcount/adaboost.hpp"
#include "funcount/forest.hpp"
#include "funcount/logistic.hpp"
#include "funcount/split.hpp"

namespace funcount {

using Classifier = std::variant<LogisticModel, RandomForest, AdaBoostModel>;

/// Probabilities in [0, 1] for rows of a full table matrix.
Eigen::VectorXd predict_probability(const Classifier& model, const Eigen::MatrixXd& x);

using Importance = std::vector<std::pair<std::string, double>>;

/// Split gains per variable (Gini decrease for forests, squared-error
/// reduction for boosting) scaled so the largest is 100, in descending order
/// (ties by name). Variables never used for a split are listed with 0.
/// Logistic models are rejected: their intervals play that role.
Importance variable_importance(const Classifier& model, const std::vector<std::string>& columns);

/// `variable,importance`.
std::string format_importance(const Importance& importance);

/// `subject_id,prob,label,weight,split` for the train and test rows.
std::string format_predictions(const PredictorTable& table, const SplitIndices& split,
                               const Eigen::VectorXd& train_prob, const Eigen::VectorXd& test_prob);

}  // namespace funcount
