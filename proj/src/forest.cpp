#include "funcount/forest.hpp"

#include <cmath>

#include <boost/random/discrete_distribution.hpp>

#include "funcount/error.hpp"
#include "funcount/parallel.hpp"

namespace funcount {

Eigen::VectorXd RandomForest::predict_probability(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd votes = Eigen::VectorXd::Zero(x.rows());
    if (trees.empty()) return votes;
    for (const auto& tree : trees) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) votes(i) += tree.predict(x.row(i));
    }
    return votes / static_cast<double>(trees.size());
}

RandomForest fit_random_forest(const PredictorTable& table, const ForestOptions& options) {
    const Eigen::Index n = table.n_rows();
    const Eigen::Index p = table.n_columns();
    if (options.n_trees < 1) throw ValidationError("predict", "n_trees must be >= 1");
    if (p == 0) throw PreconditionError("predict", "random forest needs at least one feature");
    const Eigen::Index positives = table.outcome.sum();
    if (positives == 0 || positives == n) throw PreconditionError("predict", "training data has a single class");
    if ((table.weights.array() <= 0.0).any()) throw ValidationError("predict", "weights must be positive");

    const int mtry = options.mtry > 0 ? options.mtry : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
    const std::vector<double> w(table.weights.data(), table.weights.data() + n);

    RandomForest forest;
    forest.trees.resize(static_cast<std::size_t>(options.n_trees));
    parallel_for(forest.trees.size(), [&](std::size_t t) {
        auto engine = make_engine(options.seed, streams::kForest, t);
        boost::random::discrete_distribution<Eigen::Index, double> draw(w.begin(), w.end());
        std::vector<Eigen::Index> sample(static_cast<std::size_t>(n));
        for (auto& s : sample) s = draw(engine);
        forest.trees[t] = grow_classification_tree(table.x, table.outcome, sample, mtry, options.min_node, engine);
    });
    forest.gini_decrease = Eigen::VectorXd::Zero(p);
    for (const auto& tree : forest.trees) tree.accumulate_gain(forest.gini_decrease);
    return forest;
}

}  // namespace funcount
