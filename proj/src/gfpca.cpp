#include "funcount/gfpca.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "funcount/basis.hpp"
#include "funcount/error.hpp"
#include "funcount/smoothing.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "gfpca";

}  // namespace

void fix_component_signs(Eigen::MatrixXd& components) {
    for (Eigen::Index k = 0; k < components.rows(); ++k) {
        Eigen::Index arg = 0;
        components.row(k).cwiseAbs().maxCoeff(&arg);
        if (components(k, arg) < 0.0) components.row(k) *= -1.0;
    }
}

FpcaModel fit_fpca_matrix(const Eigen::MatrixXd& curves, const Eigen::VectorXd& grid,
                          const FpcaOptions& options) {
    const Eigen::Index n = curves.rows();
    const Eigen::Index t = curves.cols();
    const int k = options.n_components;
    if (grid.size() != t) throw InputError(kModule, "grid length does not match curves");
    if (k < 1) throw ValidationError(kModule, fmt::format("K must be >= 1, got {}", k));
    if (k > std::min<Eigen::Index>(n - 1, t)) {
        throw ValidationError(kModule, fmt::format("K = {} exceeds min(N - 1, T) = {}", k,
                                                   std::min<Eigen::Index>(n - 1, t)));
    }

    const int n_basis = std::min<int>(options.n_basis, static_cast<int>(t));
    const BasisSystem basis = build_basis(grid, std::max(n_basis, options.degree + 1), options.degree);

    FpcaModel model;
    model.grid = grid;
    model.weights = trapezoid_weights(grid);

    const Eigen::VectorXd raw_mean = curves.colwise().mean().transpose();
    const CurveSmooth mean_fit = smooth_curve_gcv(basis, raw_mean);
    model.mean_lambda = mean_fit.lambda;

    const Eigen::MatrixXd centered = curves.rowwise() - raw_mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    const CovarianceSmooth cov_fit = smooth_covariance_gcv(basis, cov);
    model.cov_lambda = cov_fit.lambda;
    model.noise_var = cov_fit.noise_var;

    const Eigen::ArrayXd sqrt_w = model.weights.array().sqrt();
    const Eigen::MatrixXd weighted =
        sqrt_w.matrix().asDiagonal() * cov_fit.smoothed * sqrt_w.matrix().asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (weighted + weighted.transpose()));

    model.components.resize(k, t);
    model.eigenvalues.resize(k);
    for (int c = 0; c < k; ++c) {
        const Eigen::Index col = t - 1 - c;  // eigenvalues come out ascending
        model.eigenvalues[c] = std::max(0.0, eig.eigenvalues()[col]);
        model.components.row(c) = (eig.eigenvectors().col(col).array() / sqrt_w).matrix().transpose();
    }
    fix_component_signs(model.components);

    // Take the mean's projection on the retained components from the raw mean.
    Eigen::VectorXd mean = mean_fit.fitted;
    const Eigen::VectorXd gap = raw_mean - mean;
    for (int c = 0; c < k; ++c) {
        const double coef = (model.components.row(c).transpose().cwiseProduct(model.weights)).dot(gap);
        mean += coef * model.components.row(c).transpose();
    }
    model.mean = std::move(mean);
    return model;
}

Eigen::MatrixXd project_curves(const FpcaModel& model, const Eigen::MatrixXd& curves) {
    if (curves.cols() != model.grid.size()) throw InputError(kModule, "curve length does not match grid");
    const Eigen::MatrixXd centered = curves.rowwise() - model.mean.transpose();
    return centered * model.weights.asDiagonal() * model.components.transpose();
}

Decomposition fit_gfpca(const CountCurveSet& data, const FpcaOptions& options) {
    data.validate();
    const Eigen::MatrixXd z = (data.counts.cast<double>().array() + 1.0).log().matrix();
    const FpcaModel model = fit_fpca_matrix(z, data.grid, options);

    Decomposition d;
    d.method = Method::GFPCA;
    d.subject_ids = data.subject_ids;
    d.grid = data.grid;
    d.mean = model.mean;
    d.components = model.components;
    d.eigenvalues = model.eigenvalues;
    d.noise_var = model.noise_var;
    d.lambda = model.cov_lambda;
    d.scores = project_curves(model, z);
    d.fitted = reconstruct(Method::GFPCA, d.mean, d.components, d.scores);
    d.iterations = 1;
    return d;
}

Eigen::MatrixXd project_scores(const Decomposition& decomp, const CountCurveSet& curves) {
    if (decomp.method != Method::GFPCA) {
        throw PreconditionError(kModule, "project_scores needs a GFPCA decomposition");
    }
    if (curves.grid.size() != decomp.grid.size() ||
        (curves.grid - decomp.grid).cwiseAbs().maxCoeff() > 1e-9) {
        throw InputError(kModule, "grid of new curves does not match the decomposition grid");
    }
    FpcaModel model;
    model.grid = decomp.grid;
    model.weights = trapezoid_weights(decomp.grid);
    model.mean = decomp.mean;
    model.components = decomp.components;
    const Eigen::MatrixXd z = (curves.counts.cast<double>().array() + 1.0).log().matrix();
    return project_curves(model, z);
}

}  // namespace funcount
