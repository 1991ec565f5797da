#include "funcount/split.hpp"

#include <algorithm>
#include <cmath>

#include "funcount/error.hpp"
#include "funcount/rng.hpp"

namespace funcount {

SplitIndices stratified_split(const Eigen::VectorXi& outcome, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("predict", "split ratio must lie in (0, 1)");
    SplitIndices out;
    for (int cls : {0, 1}) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < outcome.size(); ++i) {
            if (outcome(i) == cls) members.push_back(i);
        }
        if (members.empty()) throw PreconditionError("predict", "stratified split needs both outcome classes");
        auto engine = make_engine(seed, streams::kSplit, static_cast<std::uint64_t>(cls));
        shuffle(members, engine);
        const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(members.size()) + 1e-9));
        out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

}  // namespace funcount
