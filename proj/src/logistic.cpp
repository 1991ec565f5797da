#include "funcount/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "funcount/csv.hpp"
#include "funcount/error.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "predict";
constexpr double kSeparationBound = 15.0;

Eigen::MatrixXd design_for(const Eigen::MatrixXd& table_x, const std::vector<Eigen::Index>& columns) {
    Eigen::MatrixXd x(table_x.rows(), static_cast<Eigen::Index>(columns.size()) + 1);
    x.col(0).setOnes();
    for (std::size_t c = 0; c < columns.size(); ++c) x.col(static_cast<Eigen::Index>(c) + 1) = table_x.col(columns[c]);
    return x;
}

// log(1 + e^eta) without overflow.
double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double weighted_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += w(i) * (y(i) * eta(i) - softplus(eta(i)));
    return ll;
}

}  // namespace

Eigen::VectorXd LogisticModel::predict_probability(const Eigen::MatrixXd& table_x) const {
    const Eigen::VectorXd eta = design_for(table_x, columns) * coefficients;
    return eta.unaryExpr([](double e) { return sigmoid(e); });
}

LogisticModel fit_weighted_logistic(const PredictorTable& table, const std::vector<Eigen::Index>& columns,
                                    const LogisticOptions& options) {
    const Eigen::Index n = table.n_rows();
    for (Eigen::Index c : columns) {
        if (c < 0 || c >= table.n_columns()) throw InputError(kModule, fmt::format("no column {}", c));
    }
    if (n == 0) throw PreconditionError(kModule, "logistic regression on an empty table");
    if ((table.weights.array() <= 0.0).any()) throw ValidationError(kModule, "weights must be positive");

    LogisticModel model;
    model.columns = columns;
    model.names.emplace_back("(Intercept)");
    for (Eigen::Index c : columns) model.names.push_back(table.columns[static_cast<std::size_t>(c)]);

    const Eigen::MatrixXd x = design_for(table.x, columns);
    const Eigen::VectorXd y = table.outcome.cast<double>();
    const Eigen::VectorXd& w = table.weights;
    const Eigen::Index p = x.cols();

    // Rank check on the weighted design.
    const Eigen::MatrixXd xw = w.cwiseSqrt().asDiagonal() * x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        std::vector<std::string> aliased;
        for (Eigen::Index r = qr.rank(); r < p; ++r) {
            aliased.push_back(model.names[static_cast<std::size_t>(qr.colsPermutation().indices()(r))]);
        }
        std::sort(aliased.begin(), aliased.end());
        throw ValidationError(kModule, fmt::format("design is rank deficient; aliased columns: {}", fmt::join(aliased, ", ")));
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    const double ybar = y.dot(w) / w.sum();
    if (ybar > 0.0 && ybar < 1.0) beta(0) = std::log(ybar / (1.0 - ybar));
    double ll = weighted_loglik(x * beta, y, w);
    double previous_ll = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd info(p, p);

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        model.iterations = iter;
        const Eigen::VectorXd eta = x * beta;
        const Eigen::VectorXd mu = eta.unaryExpr([](double e) { return sigmoid(e); });
        const Eigen::VectorXd v = w.array() * mu.array() * (1.0 - mu.array());
        info = x.transpose() * v.asDiagonal() * x;
        const Eigen::VectorXd score = x.transpose() * (w.array() * (y - mu).array()).matrix();
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        Eigen::VectorXd step = ldlt.solve(score);
        if (!step.allFinite()) step = info.completeOrthogonalDecomposition().solve(score);

        // Newton steps on a concave objective rarely need halving, but do
        // guard against overshooting from a poor start.
        double t = 1.0;
        Eigen::VectorXd next = beta + step;
        double ll_next = weighted_loglik(x * next, y, w);
        for (int h = 0; h < 30 && !(ll_next >= ll - 1e-12 * std::abs(ll)); ++h) {
            t *= 0.5;
            next = beta + t * step;
            ll_next = weighted_loglik(x * next, y, w);
        }
        const double change = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        previous_ll = ll;
        ll = ll_next;
        if (change < options.tol) {
            model.converged = true;
            break;
        }
    }

    {
        const Eigen::VectorXd mu = (x * beta).unaryExpr([](double e) { return sigmoid(e); });
        const Eigen::VectorXd v = w.array() * mu.array() * (1.0 - mu.array());
        info = x.transpose() * v.asDiagonal() * x;
    }
    model.coefficients = beta;
    model.loglik = ll;
    model.covariance = info.completeOrthogonalDecomposition().pseudoInverse();

    if (!model.converged) {
        const bool large = beta.cwiseAbs().maxCoeff() > kSeparationBound;
        const bool still_improving = ll > previous_ll;
        if (large && still_improving) {
            model.separation = true;
            for (Eigen::Index j = 0; j < p; ++j) {
                if (std::abs(beta(j)) > kSeparationBound) model.separated.push_back(model.names[static_cast<std::size_t>(j)]);
            }
        } else {
            throw ConvergenceError(kModule, fmt::format("IRLS did not converge in {} iterations", options.max_iter));
        }
    }
    return model;
}

LogisticModel fit_weighted_logistic(const PredictorTable& table, const LogisticOptions& options) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(table.n_columns()));
    for (std::size_t c = 0; c < all.size(); ++c) all[c] = static_cast<Eigen::Index>(c);
    return fit_weighted_logistic(table, all, options);
}

StepwiseResult stepwise_aic(const PredictorTable& table, const std::vector<Eigen::Index>& candidates,
                            const LogisticOptions& options) {
    std::vector<Eigen::Index> fixed;
    for (Eigen::Index c = 0; c < table.n_columns(); ++c) {
        if (std::find(candidates.begin(), candidates.end(), c) == candidates.end()) fixed.push_back(c);
    }
    auto columns_with = [&fixed](const std::vector<Eigen::Index>& chosen) {
        std::vector<Eigen::Index> cols = fixed;
        cols.insert(cols.end(), chosen.begin(), chosen.end());
        return cols;
    };

    StepwiseResult result;
    result.selected = candidates;
    result.model = fit_weighted_logistic(table, columns_with(result.selected), options);
    result.full_aic = result.model.aic();

    while (!result.selected.empty()) {
        std::size_t best = result.selected.size();
        LogisticModel best_model;
        double best_aic = result.model.aic();
        for (std::size_t drop = 0; drop < result.selected.size(); ++drop) {
            std::vector<Eigen::Index> trial = result.selected;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(drop));
            LogisticModel m = fit_weighted_logistic(table, columns_with(trial), options);
            if (m.aic() < best_aic) {
                best_aic = m.aic();
                best = drop;
                best_model = std::move(m);
            }
        }
        if (best == result.selected.size()) break;
        result.selected.erase(result.selected.begin() + static_cast<std::ptrdiff_t>(best));
        result.model = std::move(best_model);
    }
    return result;
}

std::string format_coefficients(const LogisticModel& model) {
    std::string out = "variable,coefficient,ci_low,ci_high\n";
    const Eigen::VectorXd se = model.standard_errors();
    for (Eigen::Index j = 0; j < model.n_parameters(); ++j) {
        const double b = model.coefficients(j);
        out += fmt::format("{},{},{},{}\n", model.names[static_cast<std::size_t>(j)], csv::format_double(b),
                           csv::format_double(b - 1.96 * se(j)), csv::format_double(b + 1.96 * se(j)));
    }
    return out;
}

}  // namespace funcount
