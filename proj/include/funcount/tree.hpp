#pragma once

#include <vector>

#include <Eigen/Dense>

#include "funcount/rng.hpp"

namespace funcount {

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;      // leaf prediction
    double gain = 0.0;       // impurity or loss reduction of this split
};

/// Binary tree with axis-aligned splits.
struct DecisionTree {
    std::vector<TreeNode> nodes;  // root first

    int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const { return nodes[static_cast<std::size_t>(leaf_index(row))].value; }
    /// Adds each split's gain to importance[feature].
    void accumulate_gain(Eigen::VectorXd& importance) const;
};

/// Classification tree on a bootstrap sample (row indices, repeats allowed).
/// At each node `mtry` features are drawn without replacement and the split
/// with the largest Gini decrease is taken. Nodes with fewer than `min_node`
/// sampled rows are not split. Leaves hold the majority class, ties to 0.
DecisionTree grow_classification_tree(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                      const std::vector<Eigen::Index>& sample, int mtry, int min_node,
                                      Engine& engine);

/// Weighted least-squares regression tree of depth at most `max_depth` in
/// which each child keeps at least `min_obs` rows. Leaves hold the weighted
/// mean of z.
DecisionTree grow_regression_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                                  int max_depth, int min_obs);

}  // namespace funcount
