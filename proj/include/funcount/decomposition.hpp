#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace funcount {

enum class Method { GFPCA, PFPCA, NARFD };

std::string_view method_name(Method method);         // "GFPCA", ...
std::string_view method_slug(Method method);         // "gfpca", ...
Method parse_method(std::string_view name);           // either spelling

/// Result of any of the three decompositions.
///
/// For GFPCA and PFPCA `mean` lives on the log scale, components are
/// orthonormal under trapezoid quadrature on `grid` and `eigenvalues` is
/// sorted descending. For NARFD `mean` is zero, components are nonnegative
/// prototypes with unit integral and `eigenvalues` is empty. `fitted` is
/// always on the count scale.
struct Decomposition {
    Method method = Method::GFPCA;
    std::vector<std::string> subject_ids;
    Eigen::VectorXd grid;
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // K x T
    Eigen::MatrixXd scores;      // N x K
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd fitted;      // N x T
    double noise_var = 0.0;
    double lambda = 0.0;
    bool converged = true;
    int iterations = 0;
    std::vector<double> objective_trace;
    std::vector<std::string> diagnostics;

    Eigen::Index n_components() const { return components.rows(); }
};

/// Observation-scale reconstruction implied by mean, components and scores.
Eigen::MatrixXd reconstruct(Method method, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& components, const Eigen::MatrixXd& scores);

/// JSON with fields method, subject_ids, grid, mean (not for NARFD),
/// components, eigenvalues, scores, noise_var, lambda, converged,
/// iterations, objective_trace, diagnostics.
nlohmann::json to_json(const Decomposition& decomp);

/// Inverse of to_json; `fitted` is rebuilt with reconstruct().
Decomposition decomposition_from_json(const nlohmann::json& j);

}  // namespace funcount
