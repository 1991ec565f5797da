#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace funcount {

struct SplitIndices {
    std::vector<Eigen::Index> train;  // ascending
    std::vector<Eigen::Index> test;   // ascending
};

/// Within each outcome class, floor(ratio * n_class) randomly chosen rows go
/// to training and the rest to test. Both classes must be present.
SplitIndices stratified_split(const Eigen::VectorXi& outcome, double ratio, std::uint64_t seed);

}  // namespace funcount
