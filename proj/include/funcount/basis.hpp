#pragma once

#include <Eigen/Dense>

namespace funcount {

/// Clamped B-spline basis evaluated on a grid, with its roughness penalty.
///
/// Knots are equally spaced over [grid.front(), grid.back()] and the boundary
/// knots are repeated degree + 1 times, so the basis is a partition of unity
/// on the whole interval and reproduces polynomials up to `degree`.
struct BasisSystem {
    Eigen::VectorXd grid;
    int degree = 3;
    int n_basis = 0;
    Eigen::VectorXd knots;
    Eigen::MatrixXd design;   // T x M
    Eigen::MatrixXd penalty;  // M x M, integrated squared second derivative; empty if degree < 2

    /// Values (deriv = 0) or derivatives of all M basis functions at x.
    Eigen::VectorXd evaluate(double x, int deriv = 0) const;

    /// T x M matrix of basis values or derivatives at arbitrary points.
    Eigen::MatrixXd evaluate(const Eigen::VectorXd& points, int deriv = 0) const;
};

/// Throws ValidationError if n_basis < degree + 1 or the grid is degenerate.
BasisSystem build_basis(const Eigen::VectorXd& grid, int n_basis, int degree = 3);

/// Exact Gram matrix of second derivatives, P[a][b] = integral of B_a'' B_b''.
/// Requires degree >= 2.
Eigen::MatrixXd second_derivative_penalty(const BasisSystem& basis);

/// Trapezoid quadrature weights for a strictly increasing grid.
Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& grid);

}  // namespace funcount
