#include "funcount/importance.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "funcount/csv.hpp"
#include "funcount/error.hpp"

namespace funcount {

Eigen::VectorXd predict_probability(const Classifier& model, const Eigen::MatrixXd& x) {
    const Eigen::VectorXd p = std::visit([&x](const auto& m) { return Eigen::VectorXd(m.predict_probability(x)); }, model);
    return p.cwiseMax(0.0).cwiseMin(1.0);
}

Importance variable_importance(const Classifier& model, const std::vector<std::string>& columns) {
    Eigen::VectorXd raw;
    if (const auto* forest = std::get_if<RandomForest>(&model)) {
        raw = forest->gini_decrease;
    } else if (const auto* boost = std::get_if<AdaBoostModel>(&model)) {
        raw = boost->loss_reduction;
    } else {
        throw PreconditionError("predict", "variable importance is defined for forest and adaboost models only");
    }
    if (static_cast<std::size_t>(raw.size()) != columns.size()) {
        throw InputError("predict", "importance and column names differ in length");
    }
    const double top = raw.size() > 0 ? raw.maxCoeff() : 0.0;
    Importance out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out.emplace_back(columns[c], top > 0.0 ? 100.0 * raw(static_cast<Eigen::Index>(c)) / top : 0.0);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return out;
}

std::string format_importance(const Importance& importance) {
    std::string out = "variable,importance\n";
    for (const auto& [name, value] : importance) out += fmt::format("{},{}\n", name, csv::format_double(value));
    return out;
}

std::string format_predictions(const PredictorTable& table, const SplitIndices& split,
                               const Eigen::VectorXd& train_prob, const Eigen::VectorXd& test_prob) {
    if (static_cast<std::size_t>(train_prob.size()) != split.train.size() ||
        static_cast<std::size_t>(test_prob.size()) != split.test.size()) {
        throw InputError("predict", "one probability per split row required");
    }
    std::string out = "subject_id,prob,label,weight,split\n";
    auto emit = [&](const std::vector<Eigen::Index>& rows, const Eigen::VectorXd& prob, std::string_view tag) {
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const Eigen::Index i = rows[k];
            out += fmt::format("{},{},{},{},{}\n", table.subject_ids[static_cast<std::size_t>(i)],
                               csv::format_double(prob(static_cast<Eigen::Index>(k))), table.outcome(i),
                               csv::format_double(table.weights(i)), tag);
        }
    };
    emit(split.train, train_prob, "train");
    emit(split.test, test_prob, "test");
    return out;
}

}  // namespace funcount
