#include "funcount/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "funcount/error.hpp"
#include "funcount/rng.hpp"

namespace funcount {

Eigen::VectorXd AdaBoostModel::decision_function(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd f = Eigen::VectorXd::Constant(x.rows(), initial);
    for (const auto& tree : trees) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) f(i) += shrinkage * tree.predict(x.row(i));
    }
    return f;
}

Eigen::VectorXd AdaBoostModel::predict_probability(const Eigen::MatrixXd& x) const {
    return decision_function(x).unaryExpr([](double f) { return 1.0 / (1.0 + std::exp(-2.0 * f)); });
}

AdaBoostModel fit_adaboost(const PredictorTable& table, const AdaBoostOptions& options) {
    const Eigen::Index n = table.n_rows();
    if (options.n_trees < 0 || options.depth < 1 || options.min_obs < 1) {
        throw ValidationError("predict", "invalid boosting options");
    }
    if (!(options.shrinkage > 0.0) || !(options.bag_fraction > 0.0 && options.bag_fraction <= 1.0)) {
        throw ValidationError("predict", "shrinkage must be > 0 and bag_fraction in (0, 1]");
    }
    const Eigen::Index positives = table.outcome.sum();
    if (positives == 0 || positives == n) throw PreconditionError("predict", "training data has a single class");
    if ((table.weights.array() <= 0.0).any()) throw ValidationError("predict", "weights must be positive");

    const Eigen::VectorXd y = (2.0 * table.outcome.cast<double>().array() - 1.0).matrix();
    const Eigen::VectorXd& w = table.weights;

    AdaBoostModel model;
    model.shrinkage = options.shrinkage;
    // Exponential-loss minimiser for a constant: half the weighted log odds.
    const double wp = (w.array() * (y.array() > 0.0).cast<double>()).sum();
    model.initial = 0.5 * std::log(wp / (w.sum() - wp));
    model.loss_reduction = Eigen::VectorXd::Zero(table.n_columns());

    Eigen::VectorXd f = Eigen::VectorXd::Constant(n, model.initial);
    auto loss = [&]() { return (w.array() * (-y.array() * f.array()).exp()).sum(); };
    model.loss_trace.push_back(loss());

    auto engine = make_engine(options.seed, streams::kBoost);
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const auto n_bag = static_cast<Eigen::Index>(std::floor(options.bag_fraction * static_cast<double>(n)));

    for (int stage = 0; stage < options.n_trees; ++stage) {
        const Eigen::VectorXd e = (-y.array() * f.array()).exp();
        const Eigen::VectorXd z = y.cwiseProduct(e);

        std::vector<Eigen::Index> rows = all;
        if (n_bag < n) {
            shuffle(rows, engine);
            rows.resize(static_cast<std::size_t>(n_bag));
            std::sort(rows.begin(), rows.end());
        }
        DecisionTree tree = grow_regression_tree(table.x(rows, Eigen::all), z(rows), w(rows), options.depth, options.min_obs);

        // Newton leaf values from the rows that built the tree.
        std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
        for (Eigen::Index r : rows) {
            const auto leaf = static_cast<std::size_t>(tree.leaf_index(table.x.row(r)));
            num[leaf] += w(r) * z(r);
            den[leaf] += w(r) * e(r);
        }
        for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
            if (tree.nodes[k].feature < 0) tree.nodes[k].value = den[k] > 0.0 ? num[k] / den[k] : 0.0;
        }
        for (Eigen::Index i = 0; i < n; ++i) f(i) += options.shrinkage * tree.predict(table.x.row(i));
        tree.accumulate_gain(model.loss_reduction);
        model.loss_trace.push_back(loss());
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace funcount
