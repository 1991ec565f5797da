#include "funcount/fiteval.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "funcount/csv.hpp"
#include "funcount/error.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "fiteval";

double sample_sd(const Eigen::VectorXd& x) {
    if (x.size() < 2) return 0.0;
    const double mean = x.mean();
    return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
}

}  // namespace

Eigen::VectorXd mae_per_subject(const Eigen::MatrixXd& fitted, const CountMatrix& observed) {
    if (fitted.rows() != observed.rows() || fitted.cols() != observed.cols()) {
        throw InputError(kModule, fmt::format("fitted is {}x{} but observed is {}x{}", fitted.rows(), fitted.cols(),
                                              observed.rows(), observed.cols()));
    }
    if (fitted.cols() == 0) throw InputError(kModule, "curves have no time points");
    return (fitted - observed.cast<double>()).cwiseAbs().rowwise().mean();
}

EffectCurves effect_curves(const Decomposition& decomp, Eigen::Index k) {
    if (k < 1 || k > decomp.n_components()) {
        throw ValidationError(kModule, fmt::format("component {} out of range 1..{}", k, decomp.n_components()));
    }
    const Eigen::VectorXd phi = decomp.components.row(k - 1).transpose();
    const double shift = 2.0 * sample_sd(decomp.scores.col(k - 1));

    EffectCurves out;
    switch (decomp.method) {
        case Method::GFPCA:
            out.base = decomp.mean;
            out.plus = decomp.mean + shift * phi;
            out.minus = decomp.mean - shift * phi;
            break;
        case Method::PFPCA:
            out.base = decomp.mean.array().exp();
            out.plus = (decomp.mean + shift * phi).array().exp();
            out.minus = (decomp.mean - shift * phi).array().exp();
            break;
        case Method::NARFD: {
            const Eigen::VectorXd mean_scores = decomp.scores.colwise().mean().transpose();
            out.base = decomp.components.transpose() * mean_scores;
            out.plus = out.base + shift * phi;
            out.minus = (out.base - shift * phi).cwiseMax(0.0);
            break;
        }
    }
    return out;
}

EffectCurves to_count_scale(const EffectCurves& curves) {
    auto back = [](const Eigen::VectorXd& v) { return Eigen::VectorXd(v.array().exp() - 1.0); };
    return {back(curves.base), back(curves.plus), back(curves.minus)};
}

std::string format_effects(const Decomposition& decomp, bool count_scale) {
    std::string out = "component,time,base,plus,minus\n";
    for (Eigen::Index k = 1; k <= decomp.n_components(); ++k) {
        EffectCurves c = effect_curves(decomp, k);
        if (count_scale) c = to_count_scale(c);
        for (Eigen::Index j = 0; j < decomp.grid.size(); ++j) {
            out += fmt::format("{},{},{},{},{}\n", k, csv::format_double(decomp.grid(j)), csv::format_double(c.base(j)),
                               csv::format_double(c.plus(j)), csv::format_double(c.minus(j)));
        }
    }
    return out;
}

std::string format_mae(const Decomposition& decomp, const Eigen::VectorXd& mae) {
    if (static_cast<std::size_t>(mae.size()) != decomp.subject_ids.size()) {
        throw InputError(kModule, "one MAE per subject required");
    }
    std::string out = "subject_id,method,mae\n";
    for (std::size_t i = 0; i < decomp.subject_ids.size(); ++i) {
        out += fmt::format("{},{},{}\n", decomp.subject_ids[i], method_slug(decomp.method),
                           csv::format_double(mae(static_cast<Eigen::Index>(i))));
    }
    return out;
}

}  // namespace funcount
