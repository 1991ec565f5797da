#include "funcount/basis.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "funcount/error.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "basis";

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

// Knot span index s with knots[s] <= x < knots[s+1], clamped to the last
// nonempty span at the right boundary.
int find_span(const Eigen::VectorXd& knots, int n_basis, int degree, double x) {
    if (x >= knots[n_basis]) return n_basis - 1;
    if (x <= knots[degree]) return degree;
    int lo = degree;
    int hi = n_basis;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (x < knots[mid]) hi = mid; else lo = mid;
    }
    return lo;
}

// Nonzero basis functions on span `span` and their derivatives up to `n`
// (Piegl & Tiller, algorithm A2.3). ders(k, r) is the k-th derivative of
// basis function span - degree + r.
Eigen::MatrixXd basis_derivatives(const Eigen::VectorXd& knots, int span, int p, double x, int n) {
    Eigen::MatrixXd ndu(p + 1, p + 1);
    Eigen::VectorXd left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }

    Eigen::MatrixXd ders = Eigen::MatrixXd::Zero(n + 1, p + 1);
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

    const int top = std::min(n, p);
    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= top; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            ders(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= top; ++k) {
        ders.row(k) *= factor;
        factor *= (p - k);
    }
    return ders;
}

}  // namespace

Eigen::VectorXd BasisSystem::evaluate(double x, int deriv) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_basis);
    const int span = find_span(knots, n_basis, degree, x);
    const Eigen::MatrixXd ders = basis_derivatives(knots, span, degree, x, deriv);
    for (int r = 0; r <= degree; ++r) out[span - degree + r] = ders(deriv, r);
    return out;
}

Eigen::MatrixXd BasisSystem::evaluate(const Eigen::VectorXd& points, int deriv) const {
    Eigen::MatrixXd out(points.size(), n_basis);
    for (Eigen::Index j = 0; j < points.size(); ++j) out.row(j) = evaluate(points[j], deriv).transpose();
    return out;
}

BasisSystem build_basis(const Eigen::VectorXd& grid, int n_basis, int degree) {
    if (degree < 0) throw ValidationError(kModule, "degree must be nonnegative");
    if (n_basis < degree + 1) {
        throw ValidationError(kModule, fmt::format("need at least degree + 1 = {} basis functions, got {}",
                                                   degree + 1, n_basis));
    }
    if (grid.size() < 2) throw ValidationError(kModule, "grid needs at least two points");
    for (Eigen::Index j = 1; j < grid.size(); ++j) {
        if (!(grid[j] > grid[j - 1])) throw ValidationError(kModule, "grid must be strictly increasing");
    }

    BasisSystem basis;
    basis.grid = grid;
    basis.degree = degree;
    basis.n_basis = n_basis;

    const double lo = grid[0];
    const double hi = grid[grid.size() - 1];
    const int n_spans = n_basis - degree;
    basis.knots.resize(n_basis + degree + 1);
    for (int i = 0; i <= degree; ++i) {
        basis.knots[i] = lo;
        basis.knots[n_basis + i] = hi;
    }
    for (int i = 1; i < n_spans; ++i) basis.knots[degree + i] = lo + (hi - lo) * i / n_spans;

    basis.design = basis.evaluate(grid, 0);
    if (degree >= 2) basis.penalty = second_derivative_penalty(basis);
    return basis;
}

Eigen::MatrixXd second_derivative_penalty(const BasisSystem& basis) {
    if (basis.degree < 2) {
        throw ValidationError(kModule, fmt::format("second-derivative penalty needs degree >= 2, got {}",
                                                   basis.degree));
    }
    const int p = basis.degree;
    std::vector<double> nodes, weights;
    gauss_legendre(p + 1, nodes, weights);  // exact for the degree 2p - 4 integrand

    Eigen::MatrixXd penalty = Eigen::MatrixXd::Zero(basis.n_basis, basis.n_basis);
    for (int span = p; span < basis.n_basis; ++span) {
        const double a = basis.knots[span];
        const double b = basis.knots[span + 1];
        if (!(b > a)) continue;
        const double half = 0.5 * (b - a);
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const double x = a + half * (nodes[q] + 1.0);
            const Eigen::MatrixXd ders = basis_derivatives(basis.knots, span, p, x, 2);
            const double w = half * weights[q];
            for (int r = 0; r <= p; ++r) {
                for (int c = 0; c <= p; ++c) {
                    penalty(span - p + r, span - p + c) += w * ders(2, r) * ders(2, c);
                }
            }
        }
    }
    return 0.5 * (penalty + penalty.transpose());
}

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& grid) {
    const Eigen::Index n = grid.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double h = grid[j + 1] - grid[j];
        w[j] += 0.5 * h;
        w[j + 1] += 0.5 * h;
    }
    return w;
}

}  // namespace funcount
