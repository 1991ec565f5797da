#pragma once

#include <Eigen/Dense>

#include "funcount/decomposition.hpp"
#include "funcount/types.hpp"

namespace funcount {

struct FpcaOptions {
    int n_components = 6;
    int n_basis = 30;  // capped at the number of grid points
    int degree = 3;
};

/// Mean, eigenfunctions and eigenvalues of a smoothed covariance surface.
struct FpcaModel {
    Eigen::VectorXd grid;
    Eigen::VectorXd weights;     // trapezoid quadrature weights
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // K x T, orthonormal under `weights`
    Eigen::VectorXd eigenvalues;
    double noise_var = 0.0;
    double mean_lambda = 0.0;
    double cov_lambda = 0.0;
};

/// FPCA of real-valued curves (rows of `curves`) on `grid`: spline-smoothed
/// mean, sandwich-smoothed covariance with the diagonal excluded, and a
/// quadrature-weighted eigendecomposition. The mean is adjusted along the
/// retained components so that training scores are exactly centred.
FpcaModel fit_fpca_matrix(const Eigen::MatrixXd& curves, const Eigen::VectorXd& grid,
                          const FpcaOptions& options);

/// Quadrature inner products of (curves - mean) with each component.
Eigen::MatrixXd project_curves(const FpcaModel& model, const Eigen::MatrixXd& curves);

/// Gaussian FPCA on log(Y + 1).
Decomposition fit_gfpca(const CountCurveSet& data, const FpcaOptions& options = {});

/// Scores of new count curves under a fitted GFPCA decomposition.
Eigen::MatrixXd project_scores(const Decomposition& decomp, const CountCurveSet& curves);

/// Flips each component so that its entry of largest magnitude is positive.
void fix_component_signs(Eigen::MatrixXd& components);

}  // namespace funcount
