#pragma once

#include <vector>

#include <Eigen/Dense>

#include "funcount/basis.hpp"

namespace funcount {

/// Simultaneous diagonalisation of the basis Gram matrix and the penalty:
/// (B'B + lambda P)^{-1} = Q (I + lambda D)^{-1} Q' for every lambda.
struct PenalizedEigenBasis {
    Eigen::MatrixXd q;       // M x M
    Eigen::VectorXd d;       // M penalty eigenvalues, >= 0
    double lambda_scale = 1.0;  // tr(B'B) / tr(P), used to make ladders unit-free

    explicit PenalizedEigenBasis(const BasisSystem& basis);

    /// Diagonal of (I + lambda D)^{-1}.
    Eigen::VectorXd shrinkage(double lambda) const;
};

/// Log-spaced smoothing parameters lambda_scale * 10^k for k in [lo, hi].
std::vector<double> lambda_ladder(double lambda_scale, double lo_exponent, double hi_exponent, int n);

struct CurveSmooth {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd fitted;
    double lambda = 0.0;
    double edf = 0.0;
};

/// Penalised least-squares spline fit of y (on basis.grid), lambda by GCV.
CurveSmooth smooth_curve_gcv(const BasisSystem& basis, const Eigen::VectorXd& y);

struct CovarianceSmooth {
    Eigen::MatrixXd smoothed;  // T x T, symmetric
    double lambda = 0.0;
    double noise_var = 0.0;    // mean of raw minus smoothed diagonal, floored at 0
};

/// Tensor-product (sandwich) penalised spline smoothing of a covariance
/// surface. The diagonal is treated as missing: it is imputed with the
/// smoothed diagonal until the fit is self-consistent, so only off-diagonal
/// entries drive the fit and the GCV criterion.
CovarianceSmooth smooth_covariance_gcv(const BasisSystem& basis, const Eigen::MatrixXd& cov);

}  // namespace funcount
