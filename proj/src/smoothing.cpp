#include "funcount/smoothing.hpp"

#include <cmath>
#include <limits>

#include "funcount/error.hpp"

namespace funcount {
namespace {

constexpr int kLadderSize = 21;
constexpr double kLadderLo = -7.0;
constexpr double kLadderHi = 3.0;

}  // namespace

PenalizedEigenBasis::PenalizedEigenBasis(const BasisSystem& basis) {
    const Eigen::MatrixXd& b = basis.design;
    const Eigen::Index m = b.cols();
    Eigen::MatrixXd gram = b.transpose() * b;
    const double ridge = 1e-10 * gram.trace() / static_cast<double>(m);
    gram.diagonal().array() += ridge;

    Eigen::MatrixXd penalty = basis.penalty.size() > 0 ? basis.penalty : Eigen::MatrixXd::Zero(m, m);
    const double ptrace = penalty.trace();
    lambda_scale = ptrace > 0.0 ? gram.trace() / ptrace : 1.0;

    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    const Eigen::MatrixXd l_inv =
        llt.matrixL().solve(Eigen::MatrixXd::Identity(m, m));
    const Eigen::MatrixXd s = l_inv * penalty * l_inv.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()));
    d = eig.eigenvalues().cwiseMax(0.0);
    q = l_inv.transpose() * eig.eigenvectors();
}

Eigen::VectorXd PenalizedEigenBasis::shrinkage(double lambda) const {
    return (1.0 + lambda * d.array()).inverse().matrix();
}

std::vector<double> lambda_ladder(double lambda_scale, double lo_exponent, double hi_exponent, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double e = n == 1 ? lo_exponent : lo_exponent + (hi_exponent - lo_exponent) * i / (n - 1);
        out.push_back(lambda_scale * std::pow(10.0, e));
    }
    return out;
}

CurveSmooth smooth_curve_gcv(const BasisSystem& basis, const Eigen::VectorXd& y) {
    if (y.size() != basis.design.rows()) throw InputError("smoothing", "curve length does not match grid");
    const PenalizedEigenBasis eb(basis);
    const Eigen::VectorXd proj = eb.q.transpose() * (basis.design.transpose() * y);
    const double n = static_cast<double>(y.size());

    CurveSmooth best;
    double best_gcv = std::numeric_limits<double>::infinity();
    for (double lambda : lambda_ladder(eb.lambda_scale, kLadderLo, kLadderHi, kLadderSize)) {
        const Eigen::VectorXd shrink = eb.shrinkage(lambda);
        const Eigen::VectorXd coef = eb.q * shrink.cwiseProduct(proj);
        const Eigen::VectorXd fitted = basis.design * coef;
        const double rss = (y - fitted).squaredNorm();
        const double edf = shrink.sum();
        const double denom = std::max(n - edf, 1e-8);
        const double gcv = n * rss / (denom * denom);
        if (gcv < best_gcv) {
            best_gcv = gcv;
            best = {coef, fitted, lambda, edf};
        }
    }
    return best;
}

CovarianceSmooth smooth_covariance_gcv(const BasisSystem& basis, const Eigen::MatrixXd& cov) {
    const Eigen::MatrixXd& b = basis.design;
    const Eigen::Index t = b.rows();
    if (cov.rows() != t || cov.cols() != t) throw InputError("smoothing", "covariance does not match grid");

    const PenalizedEigenBasis eb(basis);
    Eigen::MatrixXd off = cov;
    off.diagonal().setZero();
    const Eigen::MatrixXd a_off = b.transpose() * off * b;
    const double n_obs = static_cast<double>(t) * static_cast<double>(t - 1);
    const double scale = std::max(cov.cwiseAbs().maxCoeff(), 1e-300);

    // Start the imputed diagonal from neighbouring off-diagonal entries.
    Eigen::VectorXd start(t);
    for (Eigen::Index j = 0; j < t; ++j) {
        double sum = 0.0;
        int cnt = 0;
        if (j > 0) sum += cov(j, j - 1), ++cnt;
        if (j + 1 < t) sum += cov(j, j + 1), ++cnt;
        start[j] = cnt > 0 ? sum / cnt : cov(j, j);
    }

    CovarianceSmooth best;
    double best_gcv = std::numeric_limits<double>::infinity();
    Eigen::VectorXd diag = start;
    for (double lambda : lambda_ladder(eb.lambda_scale, kLadderLo, kLadderHi, kLadderSize)) {
        const Eigen::VectorXd shrink = eb.shrinkage(lambda);
        const Eigen::MatrixXd left = eb.q * shrink.asDiagonal();  // Q D
        Eigen::MatrixXd theta;
        for (int iter = 0; iter < 1000; ++iter) {
            const Eigen::MatrixXd a = a_off + b.transpose() * diag.asDiagonal() * b;
            theta = left * (eb.q.transpose() * a * eb.q) * left.transpose();
            const Eigen::VectorXd next = (b * theta).cwiseProduct(b).rowwise().sum();
            const double change = (next - diag).cwiseAbs().maxCoeff();
            diag = next;
            if (change <= 1e-12 * scale) break;
        }
        Eigen::MatrixXd smoothed = b * theta * b.transpose();
        smoothed = 0.5 * (smoothed + smoothed.transpose());
        Eigen::MatrixXd resid = cov - smoothed;
        resid.diagonal().setZero();
        const double rss = resid.squaredNorm();
        const double edf = shrink.sum() * shrink.sum();
        const double denom = std::max(n_obs - edf, 1e-8);
        const double gcv = n_obs * rss / (denom * denom);
        if (gcv < best_gcv) {
            best_gcv = gcv;
            best.smoothed = std::move(smoothed);
            best.lambda = lambda;
        }
    }
    best.noise_var = std::max(0.0, (cov.diagonal() - best.smoothed.diagonal()).mean());
    return best;
}

}  // namespace funcount
