#include "funcount/predictor_table.hpp"

#include <unordered_map>

#include <fmt/format.h>

#include "funcount/error.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "predict";

void push_row(const SubjectCovariates& c, std::vector<double>& row) {
    auto dummy = [&row](int level, int n_levels) {
        for (int l = 1; l < n_levels; ++l) row.push_back(level == l ? 1.0 : 0.0);
    };
    row.push_back(c.n_weekdays);
    row.push_back(c.n_weekend_days);
    row.push_back(c.bmi);
    dummy(static_cast<int>(c.race), static_cast<int>(kRaceLevels.size()));
    dummy(static_cast<int>(c.gender), static_cast<int>(kGenderLevels.size()));
    row.push_back(c.age);
    dummy(static_cast<int>(c.education), static_cast<int>(kEducationLevels.size()));
    row.push_back(c.drinks_per_week);
    dummy(static_cast<int>(c.smoking), static_cast<int>(kSmokingLevels.size()));
    for (bool flag : {c.diabetes, c.chf, c.chd, c.cancer, c.stroke}) row.push_back(flag ? 1.0 : 0.0);
    row.push_back(c.hdl_cholesterol);
    row.push_back(c.total_cholesterol);
    row.push_back(c.systolic_bp);
}

}  // namespace

std::vector<std::string> covariate_column_names() {
    std::vector<std::string> names{"n_weekdays", "n_weekend_days", "bmi"};
    auto levels = [&names](std::string_view var, const auto& lv) {
        for (std::size_t l = 1; l < lv.size(); ++l) names.push_back(fmt::format("{}:{}", var, lv[l]));
    };
    levels("race", kRaceLevels);
    levels("gender", kGenderLevels);
    names.emplace_back("age");
    levels("education", kEducationLevels);
    names.emplace_back("drinks_per_week");
    levels("smoking", kSmokingLevels);
    for (const char* flag : {"diabetes", "chf", "chd", "cancer", "stroke"}) names.push_back(fmt::format("{}:Yes", flag));
    names.emplace_back("hdl_cholesterol");
    names.emplace_back("total_cholesterol");
    names.emplace_back("systolic_bp");
    return names;
}

PredictorTable PredictorTable::subset(const std::vector<Eigen::Index>& rows) const {
    PredictorTable out;
    out.columns = columns;
    out.score_columns = score_columns;
    out.x = x(rows, Eigen::all);
    out.weights = weights(rows);
    out.outcome = outcome(rows);
    for (Eigen::Index r : rows) out.subject_ids.push_back(subject_ids[static_cast<std::size_t>(r)]);
    return out;
}

PredictorTable build_predictor_table(const std::vector<SubjectCovariates>& subjects, const Decomposition* decomp) {
    std::unordered_map<std::string, Eigen::Index> score_row;
    if (decomp != nullptr) {
        for (std::size_t i = 0; i < decomp->subject_ids.size(); ++i) {
            score_row.emplace(decomp->subject_ids[i], static_cast<Eigen::Index>(i));
        }
    }
    const Eigen::Index k = decomp != nullptr ? decomp->scores.cols() : 0;

    PredictorTable t;
    t.columns = covariate_column_names();
    const auto n_cov = static_cast<Eigen::Index>(t.columns.size());
    if (decomp != nullptr) {
        for (Eigen::Index c = 0; c < k; ++c) {
            t.score_columns.push_back(n_cov + c);
            t.columns.push_back(fmt::format("{}_score_{}", method_slug(decomp->method), c + 1));
        }
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> raw_weights;
    std::vector<int> outcome;
    for (const auto& s : subjects) {
        std::vector<double> row;
        row.reserve(t.columns.size());
        push_row(s, row);
        if (decomp != nullptr) {
            const auto it = score_row.find(s.subject_id);
            if (it == score_row.end()) continue;
            for (Eigen::Index c = 0; c < k; ++c) row.push_back(decomp->scores(it->second, c));
        }
        if (s.mortality != 0 && s.mortality != 1) {
            throw InputError(kModule, fmt::format("mortality for '{}' must be 0 or 1", s.subject_id));
        }
        t.subject_ids.push_back(s.subject_id);
        rows.push_back(std::move(row));
        raw_weights.push_back(s.raw_survey_weight);
        outcome.push_back(s.mortality);
    }
    if (rows.empty()) throw PreconditionError(kModule, "no subjects left after joining scores and covariates");

    const auto n = static_cast<Eigen::Index>(rows.size());
    t.x.resize(n, static_cast<Eigen::Index>(t.columns.size()));
    t.outcome.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < t.x.cols(); ++c) t.x(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        t.outcome(i) = outcome[static_cast<std::size_t>(i)];
    }
    const auto adjusted = adjust_weights(raw_weights);
    t.weights = Eigen::Map<const Eigen::VectorXd>(adjusted.data(), n);
    return t;
}

}  // namespace funcount
