#pragma once

#include <string>

#include <Eigen/Dense>

#include "funcount/decomposition.hpp"
#include "funcount/types.hpp"

namespace funcount {

/// Mean absolute error of each row of `fitted` against the observed counts.
Eigen::VectorXd mae_per_subject(const Eigen::MatrixXd& fitted, const CountMatrix& observed);

/// Curves showing the effect of a score 2 SD above and below its mean.
///
/// GFPCA: log scale, mean +- 2 sd phi_k. PFPCA: exp(mean +- 2 sd phi_k).
/// NARFD: base = prototypes at the mean scores, plus = base + 2 sd phi_k,
/// minus = max(base - 2 sd phi_k, 0).
struct EffectCurves {
    Eigen::VectorXd base;
    Eigen::VectorXd plus;
    Eigen::VectorXd minus;
};

/// k is 1-based.
EffectCurves effect_curves(const Decomposition& decomp, Eigen::Index k);

/// Back-transforms GFPCA effect curves to counts with exp(x) - 1.
EffectCurves to_count_scale(const EffectCurves& curves);

/// `component,time,base,plus,minus` for every component.
std::string format_effects(const Decomposition& decomp, bool count_scale = false);

/// `subject_id,method,mae`.
std::string format_mae(const Decomposition& decomp, const Eigen::VectorXd& mae);

}  // namespace funcount
