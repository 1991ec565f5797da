#pragma once

#include <optional>

#include <Eigen/Dense>

#include "funcount/basis.hpp"
#include "funcount/decomposition.hpp"
#include "funcount/error.hpp"
#include "funcount/types.hpp"

namespace funcount {

struct PfpcaOptions {
    int n_components = 6;
    int n_basis = 30;
    int degree = 3;
    /// Shared step-1 smoothing parameter; chosen by GCV over a 10-point
    /// log ladder when empty.
    std::optional<double> lambda;
    int max_iter = 100;
    /// The fit fails when more than this fraction of subjects diverge.
    double max_divergent_fraction = 0.01;
};

/// Penalised log-link Poisson spline fit of one curve.
struct LatentCurveFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd log_intensity;  // on basis.grid
    double pearson = 0.0;           // sum (y - mu)^2 / mu
    double edf = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Penalised IRLS for  -loglik + lambda/2 * c'Pc + 1e-8/2 * |c|^2. The tiny
/// ridge keeps the problem bounded for all-zero curves.
LatentCurveFit fit_latent_log_intensity(const Eigen::VectorXd& counts, const BasisSystem& basis,
                                        double lambda, const Eigen::VectorXd* start = nullptr,
                                        int max_iter = 100);

/// Raised by estimate_scores_poisson when Newton fails; carries the last iterate.
class ScoreConvergenceError : public ConvergenceError {
public:
    ScoreConvergenceError(const std::string& message, Eigen::VectorXd last);
    const Eigen::VectorXd& last_iterate() const { return last_; }

private:
    Eigen::VectorXd last_;
};

/// Poisson log-likelihood (without the log y! term) of a curve whose log
/// intensity is mean + components' * scores.
double poisson_score_loglik(const Eigen::VectorXd& counts, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& components, const Eigen::VectorXd& scores);

/// Gradient of poisson_score_loglik with respect to the scores.
Eigen::VectorXd poisson_score_gradient(const Eigen::VectorXd& counts, const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& components, const Eigen::VectorXd& scores);

/// Maximises poisson_score_loglik over the scores by damped Newton. On
/// return the gradient is below 1e-6 in sup norm.
Eigen::VectorXd estimate_scores_poisson(const Eigen::VectorXd& counts, const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& components, int max_iter = 200);

/// Two-step Poisson FPCA: smooth latent log intensities per subject,
/// eigendecompose them, then refit each subject's scores by Poisson
/// regression with the mean as offset.
Decomposition fit_pfpca(const CountCurveSet& data, const PfpcaOptions& options = {});

}  // namespace funcount
