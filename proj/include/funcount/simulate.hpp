#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "funcount/ingest.hpp"
#include "funcount/rng.hpp"
#include "funcount/types.hpp"

namespace funcount {

/// Real-valued curves together with the scores that generated them.
struct RealSample {
    Eigen::MatrixXd values;  // N x T
    Eigen::MatrixXd scores;  // N x K
};

struct CountSample {
    CountMatrix counts;      // N x T
    Eigen::MatrixXd scores;  // N x K
    /// Number of log intensities that exceeded 30 and were clipped.
    std::size_t clipped = 0;
};

/// mean + sum_k s_k phi_k + eps, s_k ~ N(0, sd_k^2), eps ~ N(0, noise_sd^2).
/// `components` is K x T. Row i uses its own stream, so rows do not depend
/// on N or on scheduling.
RealSample simulate_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& components,
                             const Eigen::VectorXd& score_sds, double noise_sd, Eigen::Index n,
                             std::uint64_t seed);

/// Count wrapper for Gaussian draws on the log(Y + 1) scale:
/// max(round(exp(x)) - 1, 0).
CountMatrix log_scale_to_counts(const Eigen::MatrixXd& values);

/// Y_ij ~ Poisson(exp(mean_j + sum_k s_ik phi_kj + e_ij)) with s_ik ~ N(0, sd_k^2)
/// and optional jitter e_ij ~ N(0, jitter_sd^2). The exponent is clipped at 30.
CountSample simulate_poisson_fpca(const Eigen::VectorXd& mean, const Eigen::MatrixXd& components,
                                  const Eigen::VectorXd& score_sds, Eigen::Index n, std::uint64_t seed,
                                  double jitter_sd = 0.0);

/// Draws one nonnegative K-vector of scores.
using ScoreSampler = std::function<Eigen::VectorXd(Engine&)>;

/// Y_ij ~ Poisson(sum_k s_ik p_kj) with prototypes p (K x T, nonnegative).
CountSample simulate_narfd(const Eigen::MatrixXd& prototypes, const ScoreSampler& sampler,
                           Eigen::Index n, std::uint64_t seed);

/// y_i ~ Bernoulli(logistic(intercept + x_i'beta + s_i'theta)).
Eigen::VectorXi simulate_mortality(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& covariates,
                                   const Eigen::VectorXd& score_coefficients,
                                   const Eigen::VectorXd& covariate_coefficients, double intercept,
                                   std::uint64_t seed);

/// Covariate rows with marginals resembling an older adult survey cohort.
/// Mortality is left at 0; ids are "S0001", "S0002", ...
std::vector<SubjectCovariates> simulate_covariates(Eigen::Index n, std::uint64_t seed);

/// Settings of the synthetic study written by the `simulate` subcommand.
struct StudyOptions {
    Eigen::Index n_subjects = 300;
    Eigen::Index n_bins = 288;
    double prevalence = 0.06;
    std::uint64_t seed = 1;
};

/// Complete synthetic study: diurnal Poisson-FPCA activity curves on
/// 5-minute bins, covariates, and mortality from a logistic link on age and
/// the second activity score.
struct Study {
    Dataset data;
    Eigen::MatrixXd true_scores;  // N x 2
    double intercept = 0.0;
};

Study simulate_study(const StudyOptions& options);

/// Two smooth orthonormal (under trapezoid weights) curves on `grid`:
/// a sine and a cosine over the grid's range, Gram-Schmidt orthogonalised.
Eigen::MatrixXd sine_cosine_components(const Eigen::VectorXd& grid);

}  // namespace funcount
