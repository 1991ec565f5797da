#pragma once

#include <functional>

#include <Eigen/Dense>

namespace funcount {

/// Intensities below this value are clamped inside the log of the Poisson
/// likelihood.
inline constexpr double kIntensityFloor = 1e-10;

/// A smooth convex objective over the nonnegative orthant.
struct NonnegProblem {
    std::function<double(const Eigen::VectorXd&)> objective;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

struct NonnegSolution {
    Eigen::VectorXd x;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// max over coordinates of |g_k| where x_k > 0 and max(0, -g_k) where x_k = 0.
double kkt_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& gradient);

/// Projected Newton (Bertsekas) with an Armijo search along the projection
/// arc. Starts from max(x0, 0); every accepted step strictly lowers or keeps
/// the objective, so the returned objective is never above the start.
NonnegSolution minimize_nonneg(const NonnegProblem& problem, const Eigen::VectorXd& x0,
                               double kkt_tol = 1e-9, int max_iter = 200);

/// sum_j [ mu_j - y_j log max(mu_j, floor) ] with mu = A s; the floor only
/// guards the log, so a zero intensity on a zero count costs nothing.
double identity_poisson_nll(const Eigen::VectorXd& counts, const Eigen::MatrixXd& design,
                            const Eigen::VectorXd& coef);

/// Gradient of identity_poisson_nll, A' (1 - y / max(A s, floor)).
Eigen::VectorXd identity_poisson_gradient(const Eigen::VectorXd& counts, const Eigen::MatrixXd& design,
                                          const Eigen::VectorXd& coef);

/// Nonnegative identity-link Poisson regression of `counts` on the columns
/// of `design`, optionally warm started. A diagonal ridge r adds
/// sum_k r_k x_k^2 to the objective.
NonnegSolution solve_identity_poisson(const Eigen::VectorXd& counts, const Eigen::MatrixXd& design,
                                      const Eigen::VectorXd* start = nullptr, double kkt_tol = 1e-9,
                                      const Eigen::VectorXd* ridge = nullptr);

}  // namespace funcount
