#include "funcount/narfd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>

#include "funcount/error.hpp"
#include "funcount/parallel.hpp"
#include "funcount/rng.hpp"
#include "funcount/smoothing.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "narfd";
constexpr double kScoreKktTol = 1e-9;
constexpr double kPrototypeKktTol = 1e-9;
constexpr int kMaxRevivals = 3;

Eigen::MatrixXd penalty_of(const BasisSystem& basis) {
    if (basis.penalty.size() > 0) return basis.penalty;
    return Eigen::MatrixXd::Zero(basis.n_basis, basis.n_basis);
}

double likelihood_part(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& mu) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < counts.cols(); ++j) {
            row += std::max(mu(i, j), 0.0);
            if (counts(i, j) > 0.0) row -= counts(i, j) * std::log(std::max(mu(i, j), kIntensityFloor));
        }
        total += row;
    }
    return total;
}

Eigen::MatrixXd as_matrix(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

Eigen::VectorXd as_vector(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

// Scores for every subject given prototypes on the grid, warm started.
Eigen::MatrixXd update_all_scores(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& prototypes,
                                  const Eigen::MatrixXd& start, const Eigen::VectorXd& ridge) {
    Eigen::MatrixXd out(counts.rows(), prototypes.cols());
    parallel_for(static_cast<std::size_t>(counts.rows()), [&](std::size_t idx) {
        const auto i = static_cast<Eigen::Index>(idx);
        const Eigen::VectorXd y = counts.row(i).transpose();
        const Eigen::VectorXd s0 = start.size() > 0 ? Eigen::VectorXd(start.row(i).transpose()) : Eigen::VectorXd();
        const auto sol = solve_identity_poisson(y, prototypes, s0.size() ? &s0 : nullptr, kScoreKktTol, &ridge);
        out.row(i) = sol.x.transpose();
    });
    return out;
}

// Nonnegative spline approximation of the mean positive residual, used to
// restart a component that dropped out.
Eigen::VectorXd residual_prototype(const Eigen::MatrixXd& counts, const BasisSystem& basis,
                                   const Eigen::MatrixXd& mu_t) {
    const Eigen::VectorXd target = (counts - mu_t.transpose()).cwiseMax(0.0).colwise().mean().transpose();
    Eigen::VectorXd phi = basis.design.colPivHouseholderQr().solve(target).cwiseMax(0.0);
    if (!(phi.maxCoeff() > 0.0)) phi.setOnes();
    return phi;
}

double poisson_deviance(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& mu) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < counts.rows(); ++i) {
        for (Eigen::Index j = 0; j < counts.cols(); ++j) {
            const double y = counts(i, j);
            const double m = std::max(mu(i, j), 0.0);
            dev += 2.0 * ((y > 0.0 ? y * std::log(y / std::max(m, kIntensityFloor)) : 0.0) - (y - m));
        }
    }
    return dev;
}

}  // namespace

Eigen::VectorXd penalty_weights(const Eigen::MatrixXd& scores) {
    if (scores.rows() == 0) return Eigen::VectorXd::Zero(scores.cols());
    return scores.colwise().squaredNorm().transpose() / static_cast<double>(scores.rows());
}

double narfd_objective(const Eigen::MatrixXd& counts, const BasisSystem& basis,
                       const Eigen::MatrixXd& phi, const Eigen::MatrixXd& scores, double lambda) {
    const Eigen::MatrixXd mu = scores * (basis.design * phi).transpose();
    const Eigen::MatrixXd penalty = penalty_of(basis);
    const Eigen::VectorXd w = penalty_weights(scores);
    double pen = 0.0;
    for (Eigen::Index k = 0; k < phi.cols(); ++k) pen += w(k) * phi.col(k).dot(penalty * phi.col(k));
    return likelihood_part(counts, mu) + lambda * pen;
}

Eigen::MatrixXd prototype_gradient(const Eigen::MatrixXd& counts, const BasisSystem& basis,
                                   const Eigen::MatrixXd& phi, const Eigen::MatrixXd& scores, double lambda) {
    const Eigen::MatrixXd mu = (scores * (basis.design * phi).transpose()).cwiseMax(kIntensityFloor);
    const Eigen::MatrixXd resid = (1.0 - counts.array() / mu.array()).matrix();  // N x T
    return basis.design.transpose() * resid.transpose() * scores +
           2.0 * lambda * penalty_of(basis) * phi * penalty_weights(scores).asDiagonal();
}

Eigen::VectorXd score_gradient(const Eigen::VectorXd& counts, const BasisSystem& basis, const Eigen::MatrixXd& phi,
                               const Eigen::VectorXd& scores, double lambda, Eigen::Index n_subjects) {
    const Eigen::MatrixXd proto = basis.design * phi;
    const Eigen::VectorXd ridge = score_ridge(basis, phi, lambda, n_subjects);
    return identity_poisson_gradient(counts, proto, scores) + 2.0 * ridge.cwiseProduct(scores);
}

Eigen::VectorXd score_ridge(const BasisSystem& basis, const Eigen::MatrixXd& phi, double lambda,
                            Eigen::Index n_subjects) {
    const Eigen::MatrixXd penalty = penalty_of(basis);
    Eigen::VectorXd r(phi.cols());
    for (Eigen::Index k = 0; k < phi.cols(); ++k) {
        r(k) = lambda * phi.col(k).dot(penalty * phi.col(k)) / static_cast<double>(std::max<Eigen::Index>(n_subjects, 1));
    }
    return r;
}

Eigen::VectorXd update_scores_nnls_poisson(const Eigen::VectorXd& counts, const Eigen::MatrixXd& prototypes) {
    if (prototypes.rows() != counts.size()) throw InputError(kModule, "prototype rows must match curve length");
    if (prototypes.size() > 0 && prototypes.minCoeff() < 0.0) {
        throw ValidationError(kModule, "prototypes must be nonnegative");
    }
    for (Eigen::Index k = 0; k < prototypes.cols(); ++k) {
        if (prototypes.col(k).maxCoeff() <= 0.0) {
            throw PreconditionError(kModule, fmt::format("prototype {} is identically zero", k));
        }
    }
    if (counts.size() > 0 && counts.minCoeff() < 0.0) throw InputError(kModule, "negative count");
    return solve_identity_poisson(counts, prototypes, nullptr, kScoreKktTol).x;
}

Eigen::MatrixXd update_prototypes(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& scores,
                                  const BasisSystem& basis, double lambda, const Eigen::MatrixXd* start) {
    const Eigen::Index m = basis.n_basis;
    const Eigen::Index k = scores.cols();
    const Eigen::Index t = counts.cols();
    if (scores.rows() != counts.rows()) throw InputError(kModule, "scores and counts disagree on N");
    if (basis.design.rows() != t) throw InputError(kModule, "basis grid does not match curves");
    if (lambda < 0.0) throw ValidationError(kModule, "lambda must be >= 0");
    if (scores.size() > 0 && scores.minCoeff() < 0.0) throw ValidationError(kModule, "scores must be nonnegative");

    // Components without any score mass only see the penalty, minimised at 0.
    std::vector<Eigen::Index> live;
    for (Eigen::Index c = 0; c < k; ++c) {
        if (scores.col(c).sum() > 0.0) live.push_back(c);
    }
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(m, k);
    if (live.empty()) return phi;

    const auto kl = static_cast<Eigen::Index>(live.size());
    Eigen::MatrixXd s(scores.rows(), kl);
    Eigen::MatrixXd x0(m, kl);
    for (Eigen::Index c = 0; c < kl; ++c) {
        s.col(c) = scores.col(live[static_cast<std::size_t>(c)]);
        x0.col(c) = start != nullptr && start->rows() == m && start->cols() == k
                        ? Eigen::VectorXd(start->col(live[static_cast<std::size_t>(c)]))
                        : Eigen::VectorXd::Ones(m);
    }

    const Eigen::MatrixXd& design = basis.design;
    const Eigen::MatrixXd penalty = penalty_of(basis);
    const Eigen::VectorXd weights = penalty_weights(s) * (static_cast<double>(s.rows()) / static_cast<double>(scores.rows()));
    // Nonzero range of each design row (B-splines have local support).
    std::vector<std::pair<Eigen::Index, Eigen::Index>> support(static_cast<std::size_t>(t));
    for (Eigen::Index j = 0; j < t; ++j) {
        Eigen::Index lo = m, hi = -1;
        for (Eigen::Index a = 0; a < m; ++a) {
            if (design(j, a) != 0.0) lo = std::min(lo, a), hi = std::max(hi, a);
        }
        support[static_cast<std::size_t>(j)] = {lo, hi};
    }

    NonnegProblem problem;
    problem.objective = [&](const Eigen::VectorXd& x) {
        return narfd_objective(counts, basis, as_matrix(x, m, kl), s, lambda);
    };
    problem.gradient = [&](const Eigen::VectorXd& x) {
        return as_vector(prototype_gradient(counts, basis, as_matrix(x, m, kl), s, lambda));
    };
    problem.hessian = [&](const Eigen::VectorXd& x) {
        const Eigen::MatrixXd grid_proto = design * as_matrix(x, m, kl);  // T x K
        const Eigen::MatrixXd mu = (s * grid_proto.transpose()).cwiseMax(kIntensityFloor);
        const Eigen::MatrixXd c = (counts.array() / mu.array().square()).matrix();  // N x T
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m * kl, m * kl);
        for (Eigen::Index j = 0; j < t; ++j) {
            const Eigen::MatrixXd g = s.transpose() * c.col(j).asDiagonal() * s;  // K x K
            const auto [lo, hi] = support[static_cast<std::size_t>(j)];
            for (Eigen::Index a = lo; a <= hi; ++a) {
                for (Eigen::Index b = lo; b <= hi; ++b) {
                    const double bb = design(j, a) * design(j, b);
                    for (Eigen::Index p = 0; p < kl; ++p) {
                        for (Eigen::Index q = 0; q < kl; ++q) h(a + p * m, b + q * m) += bb * g(p, q);
                    }
                }
            }
        }
        for (Eigen::Index p = 0; p < kl; ++p) h.block(p * m, p * m, m, m) += 2.0 * lambda * weights(p) * penalty;
        return h;
    };

    const auto sol = minimize_nonneg(problem, as_vector(x0), kPrototypeKktTol);
    const Eigen::MatrixXd solved = as_matrix(sol.x, m, kl);
    for (Eigen::Index c = 0; c < kl; ++c) phi.col(live[static_cast<std::size_t>(c)]) = solved.col(c);
    return phi;
}

NarfdState run_narfd(const Eigen::MatrixXd& counts, const BasisSystem& basis, int n_components,
                     double lambda, int max_iter, double tol, std::uint64_t seed, const Eigen::MatrixXd* start,
                     const NarfdObserver& observer) {
    if (n_components < 1) throw ValidationError(kModule, "K must be >= 1");
    if (lambda < 0.0) throw ValidationError(kModule, "lambda must be >= 0");

    NarfdState state;
    state.lambda = lambda;
    const Eigen::Index n = counts.rows();
    const Eigen::Index m = basis.n_basis;

    if (counts.size() == 0 || counts.maxCoeff() <= 0.0) {
        state.phi = Eigen::MatrixXd::Zero(m, n_components);
        state.scores = Eigen::MatrixXd::Zero(n, n_components);
        state.objective_trace.push_back(narfd_objective(counts, basis, state.phi, state.scores, lambda));
        state.iterations = 1;
        state.converged = true;
        return state;
    }

    if (start != nullptr && start->rows() == m && start->cols() == n_components && start->minCoeff() >= 0.0 &&
        (start->colwise().maxCoeff().array() > 0.0).all()) {
        state.phi = *start;
    } else {
        auto engine = make_engine(seed, streams::kNarfdInit);
        boost::random::uniform_real_distribution<double> unif(0.5, 1.5);
        state.phi.resize(m, n_components);
        for (Eigen::Index c = 0; c < n_components; ++c) {
            for (Eigen::Index a = 0; a < m; ++a) state.phi(a, c) = unif(engine);
        }
    }

    Eigen::MatrixXd scores;
    std::vector<int> revivals(static_cast<std::size_t>(n_components), 0);
    double previous = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= max_iter; ++iter) {
        state.iterations = iter;
        scores = update_all_scores(counts, basis.design * state.phi, scores, score_ridge(basis, state.phi, lambda, n));
        state.objective_trace.push_back(narfd_objective(counts, basis, state.phi, scores, lambda));
        if (observer) observer(state.phi, scores);

        state.phi = update_prototypes(counts, scores, basis, lambda, &state.phi);
        const double current = narfd_objective(counts, basis, state.phi, scores, lambda);
        state.objective_trace.push_back(current);
        if (observer) observer(state.phi, scores);

        // A component whose scores all vanished adds nothing to mu and has
        // zero penalty weight, so its prototype can be restarted without
        // changing the objective. Restart it on the unexplained counts.
        bool revived = false;
        for (Eigen::Index c = 0; c < n_components; ++c) {
            auto& used = revivals[static_cast<std::size_t>(c)];
            if (scores.col(c).maxCoeff() > 0.0 || used >= kMaxRevivals) continue;
            state.phi.col(c) = residual_prototype(counts, basis, basis.design * state.phi * scores.transpose());
            ++used;
            revived = true;
        }
        if (revived) {
            previous = std::numeric_limits<double>::infinity();
            continue;
        }

        if (std::isfinite(previous) && std::abs(previous - current) <= tol * std::max(std::abs(current), 1e-12)) {
            state.converged = true;
            break;
        }
        previous = current;
    }
    state.scores = std::move(scores);
    return state;
}

double narfd_lambda_base(const Eigen::MatrixXd& counts, const BasisSystem& basis) {
    const double level = std::max(counts.size() ? counts.mean() : 0.0, 1e-3);
    return static_cast<double>(counts.rows()) * PenalizedEigenBasis(basis).lambda_scale / level;
}

double select_narfd_lambda(const Eigen::MatrixXd& counts, const BasisSystem& basis,
                           const NarfdOptions& options) {
    const Eigen::Index n = counts.rows();
    const int folds = std::max(2, std::min<int>(options.cv_folds, static_cast<int>(n)));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto engine = make_engine(options.seed, streams::kNarfdFolds);
    shuffle(order, engine);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (std::size_t r = 0; r < order.size(); ++r) fold_of[static_cast<std::size_t>(order[r])] = static_cast<int>(r % folds);

    const auto ladder = lambda_ladder(narfd_lambda_base(counts, basis), -3.0, 3.0, 7);

    // Each fold walks the ladder upwards, starting from the previous
    // solution; smoother fits are cheap to reach from rougher ones.
    std::vector<double> deviance(ladder.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < n; ++i) (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        const Eigen::MatrixXd y_train = counts(train, Eigen::all);
        const Eigen::MatrixXd y_test = counts(test, Eigen::all);
        Eigen::MatrixXd phi;
        for (std::size_t l = 0; l < ladder.size(); ++l) {
            const NarfdState fit = run_narfd(y_train, basis, options.n_components, ladder[l], options.max_iter,
                                             options.tol, options.seed, phi.size() ? &phi : nullptr);
            phi = fit.phi;
            const Eigen::MatrixXd proto = basis.design * fit.phi;
            const Eigen::MatrixXd s = update_all_scores(y_test, proto, Eigen::MatrixXd(), Eigen::VectorXd::Zero(proto.cols()));
            deviance[l] += poisson_deviance(y_test, s * proto.transpose());
        }
    }
    const auto best = std::min_element(deviance.begin(), deviance.end()) - deviance.begin();
    const double best_lambda = ladder[static_cast<std::size_t>(best)];
    return best_lambda;
}

Decomposition fit_narfd(const CountCurveSet& data, const NarfdOptions& options) {
    data.validate();
    const Eigen::Index t = data.n_points();
    if (options.n_components < 1) throw ValidationError(kModule, "K must be >= 1");
    if (options.lambda && *options.lambda < 0.0) throw ValidationError(kModule, "lambda must be >= 0");

    const int n_basis = std::max(std::min<int>(options.n_basis, static_cast<int>(t)), options.degree + 1);
    const BasisSystem basis = build_basis(data.grid, n_basis, options.degree);
    const Eigen::MatrixXd y = data.counts.cast<double>();
    const double lambda = options.lambda ? *options.lambda : select_narfd_lambda(y, basis, options);

    const NarfdState state =
        run_narfd(y, basis, options.n_components, lambda, options.max_iter, options.tol, options.seed, nullptr,
                  options.observer);

    const Eigen::VectorXd w = trapezoid_weights(data.grid);
    Eigen::MatrixXd protos = (basis.design * state.phi).transpose();  // K x T
    Eigen::MatrixXd scores = state.scores;
    for (Eigen::Index c = 0; c < protos.rows(); ++c) {
        const double integral = protos.row(c).dot(w);
        if (integral > 0.0) {
            protos.row(c) /= integral;
            scores.col(c) *= integral;
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(protos.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return scores.col(a).sum() > scores.col(b).sum();
    });

    Decomposition d;
    d.method = Method::NARFD;
    d.subject_ids = data.subject_ids;
    d.grid = data.grid;
    d.mean = Eigen::VectorXd::Zero(t);
    d.components = protos(order, Eigen::all);
    d.scores = scores(Eigen::all, order);
    d.fitted = reconstruct(Method::NARFD, d.mean, d.components, d.scores);
    d.lambda = lambda;
    d.converged = state.converged;
    d.iterations = state.iterations;
    d.objective_trace = state.objective_trace;
    if (!state.converged) {
        d.diagnostics.push_back(fmt::format("alternating minimisation stopped at max_iter = {}", options.max_iter));
    }
    return d;
}

}  // namespace funcount
