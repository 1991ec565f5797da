#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "funcount/predictor_table.hpp"

namespace funcount {

struct LogisticOptions {
    int max_iter = 25;
    double tol = 1e-8;  // on max |delta beta|
};

/// Survey-weighted logistic regression fitted by IRLS.
struct LogisticModel {
    std::vector<Eigen::Index> columns;  // table columns used, in order
    std::vector<std::string> names;     // "(Intercept)" followed by the column names
    Eigen::VectorXd coefficients;       // intercept first
    Eigen::MatrixXd covariance;         // inverse weighted Fisher information
    double loglik = 0.0;                // weighted
    int iterations = 0;
    bool converged = false;
    /// Set when IRLS stopped with some |beta| > 15 and the deviance still
    /// falling: the classic signature of complete separation. Coefficients
    /// are reported as they stood.
    bool separation = false;
    std::vector<std::string> separated;

    Eigen::Index n_parameters() const { return coefficients.size(); }
    double aic() const { return -2.0 * loglik + 2.0 * static_cast<double>(n_parameters()); }
    Eigen::VectorXd standard_errors() const { return covariance.diagonal().cwiseMax(0.0).cwiseSqrt(); }
    /// Probabilities for rows of a full table matrix (all table columns).
    Eigen::VectorXd predict_probability(const Eigen::MatrixXd& table_x) const;
};

/// Maximises sum_i w_i [y_i eta_i - log(1 + e^eta_i)] over the intercept and
/// the given columns. Throws ValidationError naming the aliased columns when
/// the weighted design is rank deficient, and ConvergenceError when IRLS
/// fails for a reason other than separation.
LogisticModel fit_weighted_logistic(const PredictorTable& table, const std::vector<Eigen::Index>& columns,
                                    const LogisticOptions& options = {});
LogisticModel fit_weighted_logistic(const PredictorTable& table, const LogisticOptions& options = {});

struct StepwiseResult {
    std::vector<Eigen::Index> selected;  // kept candidate columns
    double full_aic = 0.0;
    LogisticModel model;                 // refit on the fixed columns plus `selected`
};

/// Backward elimination over `candidates` by AIC; every other table column
/// is always kept.
StepwiseResult stepwise_aic(const PredictorTable& table, const std::vector<Eigen::Index>& candidates,
                            const LogisticOptions& options = {});

/// `variable,coefficient,ci_low,ci_high` with 95% Wald intervals.
std::string format_coefficients(const LogisticModel& model);

}  // namespace funcount
