#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace funcount {

struct RocPoint {
    double threshold;  // classify as positive when prob >= threshold
    double fpr;
    double tpr;
};

/// Survey-weighted ROC curve. The first point is (0, 0) at threshold +inf;
/// then one point per distinct probability in descending order, the last
/// being (1, 1).
std::vector<RocPoint> weighted_roc(const Eigen::VectorXd& prob, const Eigen::VectorXi& label,
                                   const Eigen::VectorXd& weight);

/// Trapezoid area under a ROC curve.
double auc_from_roc(const std::vector<RocPoint>& roc);

/// Area under the weighted ROC; equals the weighted concordance with
/// half credit for tied probabilities.
double weighted_auc(const Eigen::VectorXd& prob, const Eigen::VectorXi& label, const Eigen::VectorXd& weight);

/// `threshold,fpr,tpr`.
std::string format_roc(const std::vector<RocPoint>& roc);

}  // namespace funcount
