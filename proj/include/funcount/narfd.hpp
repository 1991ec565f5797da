#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "funcount/basis.hpp"
#include "funcount/decomposition.hpp"
#include "funcount/nonneg_poisson.hpp"
#include "funcount/types.hpp"

namespace funcount {

/// Called after every half-iteration with the current (phi, scores).
using NarfdObserver = std::function<void(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& scores)>;

struct NarfdOptions {
    int n_components = 6;
    int n_basis = 30;
    int degree = 3;
    /// Penalty weight; chosen by 5-fold subject-wise cross-validated Poisson
    /// deviance over a 7-point log ladder when empty.
    std::optional<double> lambda;
    int max_iter = 200;
    double tol = 1e-6;  // relative objective change per full iteration
    std::uint64_t seed = 0;
    int cv_folds = 5;
    NarfdObserver observer;  // final fit only, not the CV fits
};

/// Iterate of the alternating minimisation.
struct NarfdState {
    Eigen::MatrixXd phi;     // M x K spline coefficients, >= 0
    Eigen::MatrixXd scores;  // N x K, >= 0
    double lambda = 0.0;
    std::vector<double> objective_trace;  // after every half-iteration
    int iterations = 0;
    bool converged = false;
};

/// Per-component penalty weights |s_k|^2 / N.
Eigen::VectorXd penalty_weights(const Eigen::MatrixXd& scores);

/// Penalised negative log-likelihood
///   sum_ij [mu_ij - y_ij log mu_ij] + lambda * sum_k (|s_k|^2 / N) phi_k' P phi_k,
/// with mu_i = design * phi * s_i' and kIntensityFloor applied inside the
/// log. Weighting the roughness of prototype k by the mean square of its
/// scores makes the objective invariant to trading scale between phi_k and s_k; with the
/// penalty on phi alone the infimum sits at phi -> 0.
double narfd_objective(const Eigen::MatrixXd& counts, const BasisSystem& basis,
                       const Eigen::MatrixXd& phi, const Eigen::MatrixXd& scores, double lambda);

/// Gradient of narfd_objective with respect to phi (M x K) at fixed scores.
Eigen::MatrixXd prototype_gradient(const Eigen::MatrixXd& counts, const BasisSystem& basis,
                                   const Eigen::MatrixXd& phi, const Eigen::MatrixXd& scores, double lambda);

/// The score half-step for one subject adds sum_k r_k s_k^2 with
/// r_k = lambda * phi_k' P phi_k / N.
Eigen::VectorXd score_ridge(const BasisSystem& basis, const Eigen::MatrixXd& phi, double lambda,
                            Eigen::Index n_subjects);

/// Gradient of narfd_objective with respect to one subject's scores.
Eigen::VectorXd score_gradient(const Eigen::VectorXd& counts, const BasisSystem& basis, const Eigen::MatrixXd& phi,
                               const Eigen::VectorXd& scores, double lambda, Eigen::Index n_subjects);

/// Nonnegative identity-link Poisson score fit of one curve on the
/// prototypes (T x K grid values). Columns must be nonnegative and not all zero.
Eigen::VectorXd update_scores_nnls_poisson(const Eigen::VectorXd& counts, const Eigen::MatrixXd& prototypes);

/// Minimises narfd_objective over phi >= 0 at fixed scores. Components whose
/// scores are all zero get a zero column.
Eigen::MatrixXd update_prototypes(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& scores,
                                  const BasisSystem& basis, double lambda,
                                  const Eigen::MatrixXd* start = nullptr);

/// Alternating minimisation from `start` (M x K) when given, otherwise from
/// a seeded uniform(0.5, 1.5) draw.
NarfdState run_narfd(const Eigen::MatrixXd& counts, const BasisSystem& basis, int n_components,
                     double lambda, int max_iter, double tol, std::uint64_t seed,
                     const Eigen::MatrixXd* start = nullptr, const NarfdObserver& observer = {});

/// Centre of the default lambda ladder, N * tr(B'B) / (tr(P) * mean count):
/// there the likelihood and penalty curvatures in phi are comparable.
double narfd_lambda_base(const Eigen::MatrixXd& counts, const BasisSystem& basis);

/// Cross-validated choice of lambda (see NarfdOptions::lambda).
double select_narfd_lambda(const Eigen::MatrixXd& counts, const BasisSystem& basis,
                           const NarfdOptions& options);

/// NARFD decomposition. Prototypes are scaled to unit trapezoid integral
/// (scores absorb the scale) and ordered by descending total score.
Decomposition fit_narfd(const CountCurveSet& data, const NarfdOptions& options = {});

}  // namespace funcount
