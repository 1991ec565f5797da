#include "funcount/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "funcount/csv.hpp"
#include "funcount/error.hpp"

namespace funcount {

std::vector<RocPoint> weighted_roc(const Eigen::VectorXd& prob, const Eigen::VectorXi& label,
                                   const Eigen::VectorXd& weight) {
    const Eigen::Index n = prob.size();
    if (label.size() != n || weight.size() != n) throw InputError("metrics", "prob, label and weight lengths differ");
    if (!prob.allFinite()) throw InputError("metrics", "probabilities must be finite");
    if ((weight.array() <= 0.0).any()) throw ValidationError("metrics", "weights must be positive");
    double total_pos = 0.0, total_neg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (label(i) == 1) {
            total_pos += weight(i);
        } else if (label(i) == 0) {
            total_neg += weight(i);
        } else {
            throw InputError("metrics", "labels must be 0 or 1");
        }
    }
    if (total_pos == 0.0 || total_neg == 0.0) throw PreconditionError("metrics", "ROC needs both classes");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return prob(a) > prob(b); });

    std::vector<RocPoint> roc{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
    double tp = 0.0, fp = 0.0;
    for (std::size_t k = 0; k < order.size();) {
        const double theta = prob(order[k]);
        for (; k < order.size() && prob(order[k]) == theta; ++k) {
            (label(order[k]) == 1 ? tp : fp) += weight(order[k]);
        }
        roc.push_back({theta, fp / total_neg, tp / total_pos});
    }
    // Accumulated rounding must not leave the curve short of (1, 1).
    roc.back().fpr = 1.0;
    roc.back().tpr = 1.0;
    return roc;
}

double auc_from_roc(const std::vector<RocPoint>& roc) {
    double area = 0.0;
    for (std::size_t k = 1; k < roc.size(); ++k) {
        area += (roc[k].fpr - roc[k - 1].fpr) * 0.5 * (roc[k].tpr + roc[k - 1].tpr);
    }
    return area;
}

double weighted_auc(const Eigen::VectorXd& prob, const Eigen::VectorXi& label, const Eigen::VectorXd& weight) {
    return auc_from_roc(weighted_roc(prob, label, weight));
}

std::string format_roc(const std::vector<RocPoint>& roc) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& pt : roc) {
        out += fmt::format("{},{},{}\n", csv::format_double(pt.threshold), csv::format_double(pt.fpr),
                           csv::format_double(pt.tpr));
    }
    return out;
}

}  // namespace funcount
