#include "funcount/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/discrete_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>

#include "funcount/basis.hpp"
#include "funcount/error.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "simulate";
constexpr double kMaxLogIntensity = 30.0;

void check_components(const Eigen::VectorXd& mean, const Eigen::MatrixXd& components,
                      const Eigen::VectorXd& score_sds) {
    if (components.rows() > 0 && components.cols() != mean.size()) {
        throw InputError(kModule, "components and mean differ in length");
    }
    if (score_sds.size() != components.rows()) throw InputError(kModule, "one score SD per component required");
    if (score_sds.size() > 0 && score_sds.minCoeff() < 0.0) throw ValidationError(kModule, "score SDs must be >= 0");
}

Eigen::VectorXd draw_scores(Engine& engine, const Eigen::VectorXd& sds) {
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd s(sds.size());
    for (Eigen::Index k = 0; k < sds.size(); ++k) s(k) = sds(k) * normal(engine);
    return s;
}

Count draw_poisson(Engine& engine, double mu) {
    if (!(mu > 0.0)) return 0;
    boost::random::poisson_distribution<long long, double> pois(mu);
    return static_cast<Count>(pois(engine));
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

RealSample simulate_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& components,
                             const Eigen::VectorXd& score_sds, double noise_sd, Eigen::Index n,
                             std::uint64_t seed) {
    check_components(mean, components, score_sds);
    if (noise_sd < 0.0) throw ValidationError(kModule, "noise SD must be >= 0");
    RealSample out{Eigen::MatrixXd(n, mean.size()), Eigen::MatrixXd(n, components.rows())};
    for (Eigen::Index i = 0; i < n; ++i) {
        auto engine = make_engine(seed, streams::kScores, static_cast<std::uint64_t>(i));
        const Eigen::VectorXd s = draw_scores(engine, score_sds);
        out.scores.row(i) = s.transpose();
        Eigen::VectorXd row = mean;
        if (s.size() > 0) row += components.transpose() * s;
        if (noise_sd > 0.0) {
            auto noise = make_engine(seed, streams::kNoise, static_cast<std::uint64_t>(i));
            boost::random::normal_distribution<double> normal(0.0, noise_sd);
            for (Eigen::Index j = 0; j < row.size(); ++j) row(j) += normal(noise);
        }
        out.values.row(i) = row.transpose();
    }
    return out;
}

CountMatrix log_scale_to_counts(const Eigen::MatrixXd& values) {
    CountMatrix out(values.rows(), values.cols());
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const double c = std::round(std::exp(std::min(values(i, j), kMaxLogIntensity))) - 1.0;
            out(i, j) = static_cast<Count>(std::max(c, 0.0));
        }
    }
    return out;
}

CountSample simulate_poisson_fpca(const Eigen::VectorXd& mean, const Eigen::MatrixXd& components,
                                  const Eigen::VectorXd& score_sds, Eigen::Index n, std::uint64_t seed,
                                  double jitter_sd) {
    check_components(mean, components, score_sds);
    if (jitter_sd < 0.0) throw ValidationError(kModule, "jitter SD must be >= 0");
    CountSample out{CountMatrix(n, mean.size()), Eigen::MatrixXd(n, components.rows()), 0};
    for (Eigen::Index i = 0; i < n; ++i) {
        auto engine = make_engine(seed, streams::kScores, static_cast<std::uint64_t>(i));
        const Eigen::VectorXd s = draw_scores(engine, score_sds);
        out.scores.row(i) = s.transpose();
        Eigen::VectorXd eta = mean;
        if (s.size() > 0) eta += components.transpose() * s;
        if (jitter_sd > 0.0) {
            auto noise = make_engine(seed, streams::kNoise, static_cast<std::uint64_t>(i));
            boost::random::normal_distribution<double> normal(0.0, jitter_sd);
            for (Eigen::Index j = 0; j < eta.size(); ++j) eta(j) += normal(noise);
        }
        auto counts = make_engine(seed, streams::kCounts, static_cast<std::uint64_t>(i));
        for (Eigen::Index j = 0; j < eta.size(); ++j) {
            double e = eta(j);
            if (e > kMaxLogIntensity) {
                e = kMaxLogIntensity;
                ++out.clipped;
            }
            out.counts(i, j) = draw_poisson(counts, std::exp(e));
        }
    }
    if (out.clipped > 0) {
        fmt::print(stderr, "{}: warning: {} log intensities clipped at {}\n", kModule, out.clipped, kMaxLogIntensity);
    }
    return out;
}

CountSample simulate_narfd(const Eigen::MatrixXd& prototypes, const ScoreSampler& sampler, Eigen::Index n,
                           std::uint64_t seed) {
    if (prototypes.size() > 0 && prototypes.minCoeff() < 0.0) {
        throw ValidationError(kModule, "prototypes must be nonnegative");
    }
    CountSample out{CountMatrix(n, prototypes.cols()), Eigen::MatrixXd(n, prototypes.rows()), 0};
    for (Eigen::Index i = 0; i < n; ++i) {
        auto engine = make_engine(seed, streams::kScores, static_cast<std::uint64_t>(i));
        const Eigen::VectorXd s = sampler(engine);
        if (s.size() != prototypes.rows()) throw InputError(kModule, "score draw has the wrong length");
        if (s.size() > 0 && s.minCoeff() < 0.0) throw ValidationError(kModule, "score draws must be nonnegative");
        out.scores.row(i) = s.transpose();
        const Eigen::VectorXd mu = prototypes.transpose() * s;
        auto counts = make_engine(seed, streams::kCounts, static_cast<std::uint64_t>(i));
        for (Eigen::Index j = 0; j < mu.size(); ++j) out.counts(i, j) = draw_poisson(counts, mu(j));
    }
    return out;
}

Eigen::VectorXi simulate_mortality(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& covariates,
                                   const Eigen::VectorXd& score_coefficients,
                                   const Eigen::VectorXd& covariate_coefficients, double intercept,
                                   std::uint64_t seed) {
    if (scores.cols() != score_coefficients.size() || covariates.cols() != covariate_coefficients.size()) {
        throw InputError(kModule, "coefficient lengths do not match the matrices");
    }
    if (scores.rows() != covariates.rows()) throw InputError(kModule, "scores and covariates differ in rows");
    Eigen::VectorXi y(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        double eta = intercept;
        if (scores.cols() > 0) eta += scores.row(i).dot(score_coefficients);
        if (covariates.cols() > 0) eta += covariates.row(i).dot(covariate_coefficients);
        auto engine = make_engine(seed, streams::kMortality, static_cast<std::uint64_t>(i));
        boost::random::bernoulli_distribution<double> coin(logistic(eta));
        y(i) = coin(engine) ? 1 : 0;
    }
    return y;
}

std::vector<SubjectCovariates> simulate_covariates(Eigen::Index n, std::uint64_t seed) {
    std::vector<SubjectCovariates> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        auto g = make_engine(seed, streams::kCovariates, static_cast<std::uint64_t>(i));
        auto normal = [&g](double m, double sd) { return boost::random::normal_distribution<double>(m, sd)(g); };
        auto coin = [&g](double p) { return boost::random::bernoulli_distribution<double>(p)(g); };
        auto pick = [&g](std::initializer_list<double> probs) {
            return static_cast<int>(boost::random::discrete_distribution<int, double>(probs)(g));
        };

        SubjectCovariates c;
        c.subject_id = fmt::format("S{:04d}", i + 1);
        c.age = std::round(boost::random::uniform_real_distribution<double>(50.0, 85.0)(g) * 10.0) / 10.0;
        c.gender = coin(0.46) ? Gender::Female : Gender::Male;
        c.race = static_cast<Race>(pick({0.60, 0.20, 0.18, 0.02}));
        c.education = static_cast<Education>(pick({0.25, 0.25, 0.50}));
        c.smoking = static_cast<Smoking>(pick({0.46, 0.38, 0.16}));
        c.bmi = std::round(std::max(normal(28.5, 5.5), 15.0) * 10.0) / 10.0;
        c.drinks_per_week = std::floor(boost::random::exponential_distribution<double>(1.0 / 2.9)(g));
        c.hdl_cholesterol = std::round(std::max(normal(56.0, 16.0), 20.0));
        c.total_cholesterol = std::round(std::max(normal(205.0, 41.0), 100.0));
        c.systolic_bp = std::round(std::max(normal(131.0, 20.0), 80.0));
        c.n_weekdays = std::clamp(std::round(normal(4.55, 0.78)), 1.0, 5.0);
        c.n_weekend_days = std::clamp(std::round(normal(1.65, 0.60)), 0.0, 2.0);
        c.diabetes = coin(0.13);
        c.chf = coin(0.03);
        c.chd = coin(0.06);
        c.cancer = coin(0.13);
        c.stroke = coin(0.02);
        c.raw_survey_weight = std::round(10000.0 * std::exp(normal(0.0, 0.6)));
        out.push_back(std::move(c));
    }
    return out;
}

Eigen::MatrixXd sine_cosine_components(const Eigen::VectorXd& grid) {
    if (grid.size() < 3) throw InputError(kModule, "grid needs at least 3 points");
    const Eigen::VectorXd w = trapezoid_weights(grid);
    const double a = grid(0);
    const double len = grid(grid.size() - 1) - a;
    Eigen::MatrixXd phi(2, grid.size());
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
        const double u = 2.0 * std::numbers::pi * (grid(j) - a) / len;
        phi(0, j) = std::sin(u);
        phi(1, j) = std::cos(u);
    }
    auto inner = [&w](const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& y) { return (x.array() * y.array() * w.transpose().array()).sum(); };
    phi.row(0) /= std::sqrt(inner(phi.row(0), phi.row(0)));
    phi.row(1) -= inner(phi.row(1), phi.row(0)) * phi.row(0);
    phi.row(1) /= std::sqrt(inner(phi.row(1), phi.row(1)));
    return phi;
}

Study simulate_study(const StudyOptions& options) {
    if (options.n_subjects < 10) throw ValidationError(kModule, "a study needs at least 10 subjects");
    if (options.n_bins < 3) throw ValidationError(kModule, "a study needs at least 3 bins");
    if (!(options.prevalence > 0.0 && options.prevalence < 1.0)) {
        throw ValidationError(kModule, "prevalence must lie in (0, 1)");
    }
    const Eigen::VectorXd grid = five_minute_grid(options.n_bins);
    const double day = grid(grid.size() - 1) - grid(0);

    // Quiet nights, an active day peaking in the early afternoon.
    Eigen::VectorXd mean(grid.size());
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
        const double hours = grid(j) / 60.0;
        mean(j) = std::log(2.0) + 2.8 * std::exp(-0.5 * std::pow((hours - 14.0) / 4.0, 2));
    }
    const Eigen::MatrixXd phi = sine_cosine_components(grid);
    // Scores in units of sqrt(day length) give log-intensity swings of
    // roughly +-0.6 and +-0.3 whatever the grid resolution.
    Eigen::VectorXd sds(2);
    sds << 0.6 * std::sqrt(day), 0.3 * std::sqrt(day);
    CountSample sample = simulate_poisson_fpca(mean, phi, sds, options.n_subjects, options.seed);

    Study study;
    study.true_scores = sample.scores;
    study.data.covariates = simulate_covariates(options.n_subjects, options.seed);
    study.data.curves.grid = grid;
    study.data.curves.counts = std::move(sample.counts);
    for (const auto& c : study.data.covariates) study.data.curves.subject_ids.push_back(c.subject_id);

    // Risk rises with age and with the second (cosine) activity score.
    const Eigen::Index n = options.n_subjects;
    Eigen::MatrixXd x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = (study.data.covariates[static_cast<std::size_t>(i)].age - 65.0) / 10.0;
    Eigen::MatrixXd s2 = sample.scores.col(1) / sds(1);
    Eigen::VectorXd beta_x(1), beta_s(1);
    beta_x << 0.9;
    beta_s << 0.8;
    const Eigen::VectorXd lin = x * beta_x + s2 * beta_s;
    double lo = -20.0, hi = 20.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double prev = (lin.array() + mid).unaryExpr([](double v) { return logistic(v); }).mean();
        (prev < options.prevalence ? lo : hi) = mid;
    }
    study.intercept = 0.5 * (lo + hi);
    const Eigen::VectorXi y = simulate_mortality(s2, x, beta_s, beta_x, study.intercept, options.seed);
    for (Eigen::Index i = 0; i < n; ++i) study.data.covariates[static_cast<std::size_t>(i)].mortality = y(i);
    return study;
}

}  // namespace funcount
