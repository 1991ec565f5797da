#pragma once

// Independent reference implementations used only by the tests. They are
// deliberately written differently from the library code (plain loops,
// Gauss-Jordan elimination, brute force) so that agreement means something.

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// sum_{i pos, j neg} w_i w_j (1[p_i > p_j] + 0.5 1[p_i = p_j]) / (W_pos W_neg).
double weighted_concordance(const Eigen::VectorXd& p, const Eigen::VectorXi& y, const Eigen::VectorXd& w);

/// Weighted logistic MLE by Newton-Raphson with Gauss-Jordan solves. `x`
/// must already contain the intercept column.
Eigen::VectorXd logistic_irls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w);

/// Solves a * x = b by Gauss-Jordan elimination with partial pivoting.
Eigen::VectorXd gauss_jordan_solve(Eigen::MatrixXd a, Eigen::VectorXd b);

/// Exhaustive search of sum_j [mu_j - y_j log mu_j], mu = a s, over the
/// grid s in {0, step, 2 step, ...}^2 up to `upper` (two columns only).
Eigen::Vector2d grid_search_poisson_2d(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, double step, double upper);

/// Central finite-difference gradient.
Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h);

/// Largest principal angle (degrees) between the row spaces of a and b
/// under the inner product <u, v> = sum_j w_j u_j v_j.
double principal_angle_deg(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& w);

/// Composite Simpson rule with n (even) panels.
double simpson(const std::function<double(double)>& f, double lo, double hi, int n);

/// Pearson correlation.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace oracle
