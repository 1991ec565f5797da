#include "funcount/pfpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "funcount/gfpca.hpp"
#include "funcount/parallel.hpp"
#include "funcount/smoothing.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "pfpca";
constexpr double kRidge = 1e-8;
constexpr double kMaxEta = 700.0;

double safe_exp(double x) { return std::exp(std::min(x, kMaxEta)); }

double penalized_objective(const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                           const Eigen::VectorXd& coef, const Eigen::MatrixXd& penalty, double lambda) {
    double nll = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) nll += safe_exp(eta[j]) - y[j] * eta[j];
    return nll + 0.5 * lambda * coef.dot(penalty * coef) + 0.5 * kRidge * coef.squaredNorm();
}

}  // namespace

LatentCurveFit fit_latent_log_intensity(const Eigen::VectorXd& counts, const BasisSystem& basis,
                                        double lambda, const Eigen::VectorXd* start, int max_iter) {
    const Eigen::MatrixXd& b = basis.design;
    const Eigen::Index m = b.cols();
    const Eigen::MatrixXd penalty = basis.penalty.size() > 0 ? basis.penalty : Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd reg = lambda * penalty;
    reg.diagonal().array() += kRidge;

    LatentCurveFit fit;
    if (start != nullptr && start->size() == m) {
        fit.coefficients = *start;
    } else {
        fit.coefficients = Eigen::VectorXd::Constant(m, std::log(counts.mean() + 0.5));
    }
    Eigen::VectorXd eta = b * fit.coefficients;
    double obj = penalized_objective(counts, eta, fit.coefficients, penalty, lambda);

    for (int iter = 1; iter <= max_iter; ++iter) {
        fit.iterations = iter;
        const Eigen::VectorXd mu = eta.unaryExpr(&safe_exp);
        // Newton step for the penalised objective (IRLS with working weights mu).
        const Eigen::VectorXd grad = b.transpose() * (mu - counts) + reg * fit.coefficients;
        Eigen::MatrixXd hess = b.transpose() * mu.asDiagonal() * b + reg;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        const Eigen::VectorXd step = -ldlt.solve(grad);
        if (!step.allFinite()) break;

        double t = 1.0;
        bool improved = false;
        Eigen::VectorXd coef_new;
        Eigen::VectorXd eta_new;
        double obj_new = obj;
        for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
            coef_new = fit.coefficients + t * step;
            eta_new = b * coef_new;
            obj_new = penalized_objective(counts, eta_new, coef_new, penalty, lambda);
            if (std::isfinite(obj_new) && obj_new <= obj) {
                improved = true;
                break;
            }
        }
        if (!improved) {
            // No decrease possible along the Newton direction: stationary.
            fit.converged = grad.cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + counts.sum());
            break;
        }
        const double change = obj - obj_new;
        const double step_size = (t * step).cwiseAbs().maxCoeff();
        fit.coefficients = coef_new;
        eta = eta_new;
        obj = obj_new;
        if (change <= 1e-10 * (std::abs(obj) + 0.1) || step_size < 1e-8) {
            fit.converged = true;
            break;
        }
    }

    fit.log_intensity = eta;
    const Eigen::VectorXd mu = eta.unaryExpr(&safe_exp);
    fit.pearson = ((counts - mu).array().square() / mu.array().max(1e-300)).sum();
    const Eigen::MatrixXd info = b.transpose() * mu.asDiagonal() * b;
    fit.edf = Eigen::LDLT<Eigen::MatrixXd>(info + reg).solve(info).trace();
    fit.converged = fit.converged && eta.allFinite();
    return fit;
}

ScoreConvergenceError::ScoreConvergenceError(const std::string& message, Eigen::VectorXd last)
    : ConvergenceError(kModule, message), last_(std::move(last)) {}

double poisson_score_loglik(const Eigen::VectorXd& counts, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& components, const Eigen::VectorXd& scores) {
    const Eigen::VectorXd eta = mean + components.transpose() * scores;
    double ll = 0.0;
    for (Eigen::Index j = 0; j < eta.size(); ++j) ll += counts[j] * eta[j] - safe_exp(eta[j]);
    return ll;
}

Eigen::VectorXd poisson_score_gradient(const Eigen::VectorXd& counts, const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& components, const Eigen::VectorXd& scores) {
    const Eigen::VectorXd eta = mean + components.transpose() * scores;
    return components * (counts - eta.unaryExpr(&safe_exp));
}

Eigen::VectorXd estimate_scores_poisson(const Eigen::VectorXd& counts, const Eigen::VectorXd& mean,
                                        const Eigen::MatrixXd& components, int max_iter) {
    const Eigen::Index k = components.rows();
    if (components.cols() != counts.size() || mean.size() != counts.size()) {
        throw InputError(kModule, "curve, mean and components must share the grid");
    }
    if (counts.size() > 0 && counts.minCoeff() < 0.0) throw InputError(kModule, "negative count");

    constexpr double kGradTol = 1e-8;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(k);
    double ll = poisson_score_loglik(counts, mean, components, s);
    for (int iter = 0; iter < max_iter; ++iter) {
        const Eigen::VectorXd eta = mean + components.transpose() * s;
        const Eigen::VectorXd mu = eta.unaryExpr(&safe_exp);
        const Eigen::VectorXd grad = components * (counts - mu);
        if (grad.cwiseAbs().maxCoeff() <= kGradTol) return s;

        Eigen::MatrixXd info = components * mu.asDiagonal() * components.transpose();
        info.diagonal().array() += 1e-12 * (1.0 + info.diagonal().maxCoeff());
        const Eigen::VectorXd step = Eigen::LDLT<Eigen::MatrixXd>(info).solve(grad);

        // Near the optimum the change in loglik drops below its rounding
        // error before the gradient is small, so steps that lose no more
        // than that are accepted and the gradient decides convergence.
        const double slack = 1e-13 * std::max(1.0, std::abs(ll));
        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
            const Eigen::VectorXd cand = s + t * step;
            const double ll_new = poisson_score_loglik(counts, mean, components, cand);
            if (std::isfinite(ll_new) && ll_new >= ll - slack) {
                accepted = true;
                s = cand;
                ll = std::max(ll, ll_new);
                break;
            }
        }
        if (!accepted) break;
    }
    const Eigen::VectorXd grad = poisson_score_gradient(counts, mean, components, s);
    if (grad.cwiseAbs().maxCoeff() <= 1e-6) return s;
    throw ScoreConvergenceError(
        fmt::format("score refit did not converge (gradient {:.3g})", grad.cwiseAbs().maxCoeff()), s);
}

Decomposition fit_pfpca(const CountCurveSet& data, const PfpcaOptions& options) {
    data.validate();
    const Eigen::Index n = data.n_subjects();
    const Eigen::Index t = data.n_points();
    if (options.n_components < 1) throw ValidationError(kModule, "K must be >= 1");
    if (options.n_components > std::min<Eigen::Index>(n - 1, t)) {
        throw ValidationError(kModule, fmt::format("K = {} exceeds min(N - 1, T) = {}",
                                                   options.n_components, std::min<Eigen::Index>(n - 1, t)));
    }

    const int n_basis = std::max(std::min<int>(options.n_basis, static_cast<int>(t)), options.degree + 1);
    const BasisSystem basis = build_basis(data.grid, n_basis, options.degree);
    const Eigen::MatrixXd y = data.counts.cast<double>();
    const auto n_sub = static_cast<std::size_t>(n);

    // Step 1: latent log intensities with one shared smoothing parameter.
    std::vector<double> ladder;
    if (options.lambda) {
        ladder = {*options.lambda};
    } else {
        const double level = std::max(y.mean(), 0.1);
        ladder = lambda_ladder(level * PenalizedEigenBasis(basis).lambda_scale, 5.0, -4.0, 10);
    }

    std::vector<Eigen::VectorXd> coef(n_sub);
    std::vector<LatentCurveFit> best_fits;
    double best_gcv = std::numeric_limits<double>::infinity();
    double best_lambda = ladder.front();
    for (double lambda : ladder) {
        std::vector<LatentCurveFit> fits(n_sub);
        parallel_for(n_sub, [&](std::size_t i) {
            const Eigen::VectorXd yi = y.row(static_cast<Eigen::Index>(i)).transpose();
            fits[i] = fit_latent_log_intensity(yi, basis, lambda, coef[i].size() ? &coef[i] : nullptr,
                                               options.max_iter);
        });
        double gcv = 0.0;
        for (std::size_t i = 0; i < n_sub; ++i) {
            coef[i] = fits[i].coefficients;
            const double denom = std::max(static_cast<double>(t) - fits[i].edf, 1e-8);
            gcv += static_cast<double>(t) * fits[i].pearson / (denom * denom);
        }
        if (gcv < best_gcv) {
            best_gcv = gcv;
            best_lambda = lambda;
            best_fits = std::move(fits);
        }
    }

    Decomposition d;
    d.method = Method::PFPCA;
    d.subject_ids = data.subject_ids;
    d.grid = data.grid;
    d.lambda = best_lambda;

    std::vector<std::string> diverged;
    Eigen::MatrixXd latent(n, t);
    for (std::size_t i = 0; i < n_sub; ++i) {
        latent.row(static_cast<Eigen::Index>(i)) = best_fits[i].log_intensity.transpose();
        if (!best_fits[i].converged) diverged.push_back(data.subject_ids[i]);
    }
    const auto check_divergence = [&](std::string_view step) {
        const double fraction = static_cast<double>(diverged.size()) / static_cast<double>(n);
        for (const auto& id : diverged) d.diagnostics.push_back(fmt::format("{}: subject '{}' diverged", step, id));
        if (fraction > options.max_divergent_fraction) {
            throw ConvergenceError(kModule, fmt::format("{} diverged for {} of {} subjects (first: '{}')", step,
                                                        diverged.size(), n, diverged.front()));
        }
        diverged.clear();
    };
    check_divergence("step 1");

    // Step 2: FPCA of the latent curves.
    const FpcaModel model =
        fit_fpca_matrix(latent, data.grid, {options.n_components, options.n_basis, options.degree});
    d.mean = model.mean;
    d.components = model.components;
    d.eigenvalues = model.eigenvalues;
    d.noise_var = model.noise_var;

    // Step 3: per-subject Poisson score refit with the mean as offset.
    d.scores.resize(n, options.n_components);
    std::vector<char> failed(n_sub, 0);
    parallel_for(n_sub, [&](std::size_t i) {
        const Eigen::VectorXd yi = y.row(static_cast<Eigen::Index>(i)).transpose();
        Eigen::VectorXd s;
        try {
            s = estimate_scores_poisson(yi, d.mean, d.components);
        } catch (const ScoreConvergenceError& e) {
            s = e.last_iterate();
            failed[i] = 1;
        }
        d.scores.row(static_cast<Eigen::Index>(i)) = s.transpose();
    });
    for (std::size_t i = 0; i < n_sub; ++i) {
        if (failed[i]) diverged.push_back(data.subject_ids[i]);
    }
    check_divergence("step 3");

    d.fitted = reconstruct(Method::PFPCA, d.mean, d.components, d.scores);
    d.iterations = 1;
    return d;
}

}  // namespace funcount
