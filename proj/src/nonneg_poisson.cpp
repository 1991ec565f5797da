#include "funcount/nonneg_poisson.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace funcount {

double kkt_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& gradient) {
    double r = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        r = std::max(r, x[k] > 0.0 ? std::abs(gradient[k]) : std::max(0.0, -gradient[k]));
    }
    return r;
}

NonnegSolution minimize_nonneg(const NonnegProblem& problem, const Eigen::VectorXd& x0,
                               double kkt_tol, int max_iter) {
    NonnegSolution sol;
    sol.x = x0.cwiseMax(0.0);
    sol.objective = problem.objective(sol.x);
    const Eigen::Index n = sol.x.size();

    Eigen::VectorXd g = problem.gradient(sol.x);
    int stalled = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        sol.kkt_residual = kkt_residual(sol.x, g);
        if (sol.kkt_residual <= kkt_tol) break;
        sol.iterations = iter + 1;

        // Variables pinned at (or near) the bound with a positive gradient are
        // sent to zero; Newton acts on the rest.
        const double eps = std::min(1e-6, (sol.x - (sol.x - g).cwiseMax(0.0)).norm());
        std::vector<Eigen::Index> free;
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (sol.x[k] <= eps && g[k] > 0.0) {
                dir[k] = -sol.x[k];
            } else {
                free.push_back(k);
            }
        }
        if (!free.empty()) {
            const Eigen::MatrixXd h = problem.hessian(sol.x);
            const auto nf = static_cast<Eigen::Index>(free.size());
            Eigen::MatrixXd hf(nf, nf);
            Eigen::VectorXd gf(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                gf[a] = g[free[static_cast<std::size_t>(a)]];
                for (Eigen::Index b = 0; b < nf; ++b) {
                    hf(a, b) = h(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
                }
            }
            double damping = 1e-12 * (1.0 + hf.diagonal().cwiseAbs().maxCoeff());
            Eigen::VectorXd df;
            for (int attempt = 0; attempt < 20; ++attempt) {
                Eigen::MatrixXd shifted = hf;
                shifted.diagonal().array() += damping;
                const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
                if (llt.info() == Eigen::Success) {
                    df = -llt.solve(gf);
                    if (df.allFinite() && df.dot(gf) < 0.0) break;
                }
                damping *= 100.0;
                df.resize(0);
            }
            if (df.size() == 0) df = -gf;
            for (Eigen::Index a = 0; a < nf; ++a) dir[free[static_cast<std::size_t>(a)]] = df[a];
        }

        double t = 1.0;
        bool accepted = false;
        double last_gain = 0.0;
        for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
            const Eigen::VectorXd cand = (sol.x + t * dir).cwiseMax(0.0);
            const double f = problem.objective(cand);
            const double decrease = g.dot(cand - sol.x);
            if (std::isfinite(f) && f <= sol.objective && f <= sol.objective + 1e-4 * decrease) {
                last_gain = sol.objective - f;
                const double moved = (cand - sol.x).cwiseAbs().maxCoeff();
                sol.x = cand;
                sol.objective = f;
                accepted = last_gain > 0.0 || moved > 0.0;
                break;
            }
        }
        g = problem.gradient(sol.x);
        if (!accepted) break;
        // Progress below ~1e-13 of the objective is at the level of its
        // rounding error; the KKT target may then be out of reach.
        stalled = last_gain <= 1e-13 * std::max(1.0, std::abs(sol.objective)) ? stalled + 1 : 0;
        if (stalled >= 3) break;
    }
    sol.kkt_residual = kkt_residual(sol.x, g);
    return sol;
}

double identity_poisson_nll(const Eigen::VectorXd& counts, const Eigen::MatrixXd& design,
                            const Eigen::VectorXd& coef) {
    const Eigen::VectorXd mu = design * coef;
    double f = 0.0;
    for (Eigen::Index j = 0; j < mu.size(); ++j) {
        f += std::max(mu[j], 0.0);
        if (counts[j] > 0.0) f -= counts[j] * std::log(std::max(mu[j], kIntensityFloor));
    }
    return f;
}

Eigen::VectorXd identity_poisson_gradient(const Eigen::VectorXd& counts, const Eigen::MatrixXd& design,
                                          const Eigen::VectorXd& coef) {
    const Eigen::VectorXd mu = (design * coef).cwiseMax(kIntensityFloor);
    return design.transpose() * (1.0 - counts.array() / mu.array()).matrix();
}

NonnegSolution solve_identity_poisson(const Eigen::VectorXd& counts, const Eigen::MatrixXd& design,
                                      const Eigen::VectorXd* start, double kkt_tol,
                                      const Eigen::VectorXd* ridge) {
    const Eigen::VectorXd r = ridge != nullptr ? *ridge : Eigen::VectorXd::Zero(design.cols());
    NonnegProblem problem;
    problem.objective = [&](const Eigen::VectorXd& s) {
        return identity_poisson_nll(counts, design, s) + s.dot(r.cwiseProduct(s));
    };
    problem.gradient = [&](const Eigen::VectorXd& s) {
        return Eigen::VectorXd(identity_poisson_gradient(counts, design, s) + 2.0 * r.cwiseProduct(s));
    };
    problem.hessian = [&](const Eigen::VectorXd& s) {
        const Eigen::VectorXd mu = (design * s).cwiseMax(kIntensityFloor);
        const Eigen::VectorXd c = counts.array() / mu.array().square();
        Eigen::MatrixXd h = design.transpose() * c.asDiagonal() * design;
        h.diagonal() += 2.0 * r;
        return h;
    };

    Eigen::VectorXd x0;
    if (start != nullptr && start->size() == design.cols()) {
        x0 = *start;
    } else {
        // Spread the mean count evenly over the columns.
        x0 = Eigen::VectorXd::Zero(design.cols());
        const double ybar = counts.mean();
        for (Eigen::Index k = 0; k < design.cols(); ++k) {
            const double colmean = design.col(k).mean();
            if (colmean > 0.0) x0[k] = ybar / (static_cast<double>(design.cols()) * colmean);
        }
    }
    return minimize_nonneg(problem, x0, kkt_tol);
}

}  // namespace funcount
