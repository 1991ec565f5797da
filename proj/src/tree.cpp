#include "funcount/tree.hpp"

#include <algorithm>
#include <numeric>

namespace funcount {
namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double gini(double n1, double n) { return n > 0.0 ? 2.0 * (n1 / n) * (1.0 - n1 / n) : 0.0; }

// Rows of `rows` sorted by feature f; ties keep the incoming order.
std::vector<Eigen::Index> sorted_by(const Eigen::MatrixXd& x, std::vector<Eigen::Index> rows, int f) {
    std::stable_sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
    return rows;
}

Split best_gini_split(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const std::vector<Eigen::Index>& rows,
                      const std::vector<int>& features) {
    const auto n = static_cast<double>(rows.size());
    double pos = 0.0;
    for (Eigen::Index r : rows) pos += y(r);
    const double parent = n * gini(pos, n);
    Split best;
    for (int f : features) {
        const auto order = sorted_by(x, rows, f);
        double left_n = 0.0, left_pos = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            left_n += 1.0;
            left_pos += y(order[i]);
            const double a = x(order[i], f), b = x(order[i + 1], f);
            if (a == b) continue;
            const double right_n = n - left_n;
            const double gain = parent - left_n * gini(left_pos, left_n) - right_n * gini(pos - left_pos, right_n);
            if (gain > best.gain + 1e-12) best = {f, 0.5 * (a + b), gain};
        }
    }
    return best;
}

Split best_least_squares_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                               const std::vector<Eigen::Index>& rows, int min_obs) {
    double total_w = 0.0, total_wz = 0.0;
    for (Eigen::Index r : rows) total_w += w(r), total_wz += w(r) * z(r);
    Split best;
    for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
        const auto order = sorted_by(x, rows, f);
        double lw = 0.0, lwz = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            lw += w(order[i]);
            lwz += w(order[i]) * z(order[i]);
            const auto n_left = static_cast<int>(i + 1);
            const auto n_right = static_cast<int>(order.size()) - n_left;
            const double a = x(order[i], f), b = x(order[i + 1], f);
            if (a == b || n_left < min_obs || n_right < min_obs) continue;
            const double rw = total_w - lw;
            if (lw <= 0.0 || rw <= 0.0) continue;
            const double diff = lwz / lw - (total_wz - lwz) / rw;
            const double gain = lw * rw / (lw + rw) * diff * diff;
            if (gain > best.gain + 1e-12 * std::max(1.0, best.gain)) best = {f, 0.5 * (a + b), gain};
        }
    }
    return best;
}

}  // namespace

int DecisionTree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int node = 0;
    while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        node = row(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return node;
}

void DecisionTree::accumulate_gain(Eigen::VectorXd& importance) const {
    for (const auto& nd : nodes) {
        if (nd.feature >= 0) importance(nd.feature) += nd.gain;
    }
}

DecisionTree grow_classification_tree(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                      const std::vector<Eigen::Index>& sample, int mtry, int min_node,
                                      Engine& engine) {
    const int p = static_cast<int>(x.cols());
    mtry = std::clamp(mtry, 1, p);
    DecisionTree tree;
    struct Pending {
        int node;
        std::vector<Eigen::Index> rows;
    };
    std::vector<Pending> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, sample});
    std::vector<int> features(static_cast<std::size_t>(p));

    while (!stack.empty()) {
        Pending cur = std::move(stack.back());
        stack.pop_back();
        std::size_t pos = 0;
        for (Eigen::Index r : cur.rows) pos += static_cast<std::size_t>(y(r));
        const std::size_t n = cur.rows.size();
        auto& leaf = tree.nodes[static_cast<std::size_t>(cur.node)];
        leaf.value = 2 * pos > n ? 1.0 : 0.0;
        if (static_cast<int>(n) < min_node || pos == 0 || pos == n) continue;

        std::iota(features.begin(), features.end(), 0);
        shuffle(features, engine);
        const std::vector<int> chosen(features.begin(), features.begin() + mtry);
        const Split split = best_gini_split(x, y, cur.rows, chosen);
        if (split.feature < 0) continue;

        std::vector<Eigen::Index> left, right;
        for (Eigen::Index r : cur.rows) (x(r, split.feature) <= split.threshold ? left : right).push_back(r);
        const int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& nd = tree.nodes[static_cast<std::size_t>(cur.node)];
        nd.feature = split.feature;
        nd.threshold = split.threshold;
        nd.gain = split.gain;
        nd.left = li;
        nd.right = li + 1;
        stack.push_back({li + 1, std::move(right)});
        stack.push_back({li, std::move(left)});
    }
    return tree;
}

DecisionTree grow_regression_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                                  int max_depth, int min_obs) {
    DecisionTree tree;
    struct Pending {
        int node;
        int depth;
        std::vector<Eigen::Index> rows;
    };
    std::vector<Eigen::Index> all(static_cast<std::size_t>(x.rows()));
    std::iota(all.begin(), all.end(), 0);
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, 0, std::move(all)}};

    while (!stack.empty()) {
        Pending cur = std::move(stack.back());
        stack.pop_back();
        double sw = 0.0, swz = 0.0;
        for (Eigen::Index r : cur.rows) sw += w(r), swz += w(r) * z(r);
        tree.nodes[static_cast<std::size_t>(cur.node)].value = sw > 0.0 ? swz / sw : 0.0;
        if (cur.depth >= max_depth) continue;

        const Split split = best_least_squares_split(x, z, w, cur.rows, min_obs);
        if (split.feature < 0) continue;
        std::vector<Eigen::Index> left, right;
        for (Eigen::Index r : cur.rows) (x(r, split.feature) <= split.threshold ? left : right).push_back(r);
        const int li = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& nd = tree.nodes[static_cast<std::size_t>(cur.node)];
        nd.feature = split.feature;
        nd.threshold = split.threshold;
        nd.gain = split.gain;
        nd.left = li;
        nd.right = li + 1;
        stack.push_back({li + 1, cur.depth + 1, std::move(right)});
        stack.push_back({li, cur.depth + 1, std::move(left)});
    }
    return tree;
}

}  // namespace funcount
