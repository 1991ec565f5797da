#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace funcount {

using Count = std::int64_t;
using CountMatrix = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<Count, Eigen::Dynamic, 1>;

/// Count curves for N subjects on a shared grid of T time points.
struct CountCurveSet {
    std::vector<std::string> subject_ids;
    Eigen::VectorXd grid;
    CountMatrix counts;  // N x T

    Eigen::Index n_subjects() const { return counts.rows(); }
    Eigen::Index n_points() const { return counts.cols(); }

    /// Throws InputError when shapes disagree, counts are negative or the
    /// grid is not strictly increasing.
    void validate() const;
};

/// Midpoints (in minutes) of consecutive 5-minute bins: 2.5, 7.5, ...
Eigen::VectorXd five_minute_grid(Eigen::Index n_bins);

}  // namespace funcount
