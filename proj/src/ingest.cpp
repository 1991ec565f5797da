#include "funcount/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "funcount/csv.hpp"
#include "funcount/error.hpp"

namespace funcount {
namespace {

constexpr const char* kModule = "ingest";

template <std::size_t N>
int parse_level(const std::array<std::string_view, N>& levels, std::string_view value,
                std::string_view column) {
    for (std::size_t i = 0; i < N; ++i) {
        if (levels[i] == value) return static_cast<int>(i);
    }
    throw InputError(kModule, fmt::format("unknown level '{}' for column '{}'", value, column));
}

bool parse_yes_no(std::string_view value, std::string_view column) {
    return parse_level(kYesNoLevels, value, column) == 1;
}

// Returns nullopt for a missing field.
std::optional<Count> parse_count(std::string_view field, std::string_view what) {
    if (csv::is_missing(field)) return std::nullopt;
    const long long v = csv::parse_integer(field, what);
    if (v < 0) throw InputError(kModule, fmt::format("negative count {} ({})", v, what));
    return v;
}

bool parse_flag(std::string_view field) {
    if (field == "1" || field == "TRUE" || field == "true") return true;
    if (field == "0" || field == "FALSE" || field == "false") return false;
    throw InputError(kModule, fmt::format("wear flag must be 0 or 1, found '{}'", field));
}

std::vector<std::size_t> prefixed_columns(const csv::Table& table, std::string_view prefix,
                                          std::size_t expected) {
    std::vector<std::size_t> cols;
    for (std::size_t k = 0;; ++k) {
        const auto name = fmt::format("{}{}", prefix, k);
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) break;
        cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
    }
    if (expected != 0 && cols.size() != expected) {
        throw InputError(kModule, fmt::format("expected {} '{}*' columns, found {}", expected,
                                              prefix, cols.size()));
    }
    if (cols.empty()) throw InputError(kModule, fmt::format("no '{}0' column", prefix));
    return cols;
}

}  // namespace

const std::vector<std::string> kCovariateColumns{
    "subject_id",  "n_weekdays", "n_weekend_days", "bmi",     "race",
    "gender",      "age",        "education",      "drinks_per_week",
    "smoking",     "diabetes",   "chf",            "chd",     "cancer",
    "stroke",      "hdl_cholesterol", "total_cholesterol", "systolic_bp", "survey_weight"};

void CountCurveSet::validate() const {
    if (static_cast<Eigen::Index>(subject_ids.size()) != counts.rows()) {
        throw InputError(kModule, fmt::format("{} subject ids for {} count rows", subject_ids.size(),
                                              counts.rows()));
    }
    if (grid.size() != counts.cols()) {
        throw InputError(kModule,
                         fmt::format("grid has {} points, counts have {}", grid.size(), counts.cols()));
    }
    for (Eigen::Index j = 1; j < grid.size(); ++j) {
        if (!(grid[j] > grid[j - 1])) throw InputError(kModule, "grid must be strictly increasing");
    }
    if (counts.size() > 0 && counts.minCoeff() < 0) throw InputError(kModule, "negative count");
}

Eigen::VectorXd five_minute_grid(Eigen::Index n_bins) {
    Eigen::VectorXd grid(n_bins);
    for (Eigen::Index k = 0; k < n_bins; ++k) grid[k] = 5.0 * static_cast<double>(k) + 2.5;
    return grid;
}

MinuteRecord recode_nonwear(MinuteRecord record) {
    if (record.counts.size() != kMinutesPerDay || record.wear_flags.size() != kMinutesPerDay) {
        throw InputError(kModule, fmt::format("minute record '{}' day {} must have {} counts and flags",
                                              record.subject_id, record.day_index, kMinutesPerDay));
    }
    for (std::size_t j = 0; j < kMinutesPerDay; ++j) {
        if (!record.wear_flags[j]) record.counts[j] = 0;
    }
    return record;
}

std::vector<Count> bin_five_minutes(const std::vector<Count>& minute_counts) {
    if (minute_counts.size() != kMinutesPerDay) {
        throw InputError(kModule, fmt::format("expected {} minute counts, got {}", kMinutesPerDay,
                                              minute_counts.size()));
    }
    std::vector<Count> bins(kBinsPerDay, 0);
    for (std::size_t k = 0; k < kBinsPerDay; ++k) {
        const auto first = minute_counts.begin() + static_cast<std::ptrdiff_t>(5 * k);
        bins[k] = std::accumulate(first, first + 5, Count{0});
    }
    return bins;
}

std::vector<Count> median_day(const std::vector<std::vector<Count>>& days) {
    if (days.empty()) throw PreconditionError(kModule, "median_day needs at least one day");
    const std::size_t width = days.front().size();
    for (const auto& d : days) {
        if (d.size() != width) throw InputError(kModule, "days have different lengths");
    }

    std::vector<Count> out(width);
    std::vector<Count> column(days.size());
    const std::size_t mid = days.size() / 2;
    for (std::size_t j = 0; j < width; ++j) {
        for (std::size_t d = 0; d < days.size(); ++d) column[d] = days[d][j];
        std::sort(column.begin(), column.end());
        if (days.size() % 2 == 1) {
            out[j] = column[mid];
        } else {
            // Half-away-from-zero rounding of (a + b) / 2 for nonnegative a, b.
            out[j] = static_cast<Count>(std::llround(0.5 * static_cast<double>(column[mid - 1]) +
                                                     0.5 * static_cast<double>(column[mid])));
        }
    }
    return out;
}

std::vector<double> adjust_weights(const std::vector<double>& raw) {
    if (raw.empty()) throw ValidationError(kModule, "no survey weights");
    for (double w : raw) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw ValidationError(kModule, fmt::format("survey weight must be positive, found {}", w));
        }
    }
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) / static_cast<double>(raw.size());
    std::vector<double> out(raw.size());
    std::transform(raw.begin(), raw.end(), out.begin(), [mean](double w) { return w / mean; });
    return out;
}

CountCurveSet load_minute_accelerometry(const std::filesystem::path& accel_path,
                                        const std::filesystem::path& wear_path) {
    const auto accel = csv::read(accel_path);
    const auto wear = csv::read(wear_path);
    const auto id_col = accel.column("subject_id");
    const auto day_col = accel.column("day");
    const auto minute_cols = prefixed_columns(accel, "min_", kMinutesPerDay);
    const auto wear_id_col = wear.column("subject_id");
    const auto wear_day_col = wear.column("day");
    const auto wear_cols = prefixed_columns(wear, "min_", kMinutesPerDay);

    std::map<std::pair<std::string, long long>, const std::vector<std::string>*> wear_rows;
    for (const auto& row : wear.rows) {
        const auto key = std::make_pair(row[wear_id_col], csv::parse_integer(row[wear_day_col], "day"));
        if (!wear_rows.emplace(key, &row).second) {
            throw InputError(kModule, fmt::format("duplicate wear row for subject '{}' day {}",
                                                  key.first, key.second));
        }
    }

    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<std::vector<Count>>> days_by_subject;
    std::set<std::pair<std::string, long long>> seen;
    for (const auto& row : accel.rows) {
        const std::string& id = row[id_col];
        const long long day = csv::parse_integer(row[day_col], "day");
        if (day < 1) throw InputError(kModule, fmt::format("day index must be >= 1, found {}", day));
        if (!seen.emplace(id, day).second) {
            throw InputError(kModule, fmt::format("duplicate accelerometry row for subject '{}' day {}", id, day));
        }
        const auto wear_it = wear_rows.find({id, day});
        if (wear_it == wear_rows.end()) {
            throw InputError(kModule, fmt::format("no wear flags for subject '{}' day {}", id, day));
        }

        // Non-wear minutes become 0 (even when missing); a missing worn minute
        // makes its bin, and hence the whole day curve, missing.
        MinuteRecord rec{id, static_cast<int>(day), std::vector<Count>(kMinutesPerDay, 0),
                         std::vector<bool>(kMinutesPerDay, true)};
        std::vector<bool> missing(kMinutesPerDay, false);
        for (std::size_t j = 0; j < kMinutesPerDay; ++j) {
            rec.wear_flags[j] = parse_flag((*wear_it->second)[wear_cols[j]]);
            const auto value = parse_count(row[minute_cols[j]], "minute count");
            if (value) rec.counts[j] = *value;
            missing[j] = !value.has_value();
        }
        rec = recode_nonwear(std::move(rec));
        bool has_missing = false;
        for (std::size_t j = 0; j < kMinutesPerDay; ++j) {
            if (missing[j] && rec.wear_flags[j]) has_missing = true;
        }
        if (!days_by_subject.count(id)) order.push_back(id);
        auto& days = days_by_subject[id];
        if (!has_missing) days.push_back(bin_five_minutes(rec.counts));
    }

    CountCurveSet out;
    std::vector<std::vector<Count>> medians;
    for (const auto& id : order) {
        const auto& days = days_by_subject[id];
        if (days.empty()) continue;
        out.subject_ids.push_back(id);
        medians.push_back(median_day(days));
    }
    out.grid = five_minute_grid(static_cast<Eigen::Index>(kBinsPerDay));
    out.counts.resize(static_cast<Eigen::Index>(medians.size()), static_cast<Eigen::Index>(kBinsPerDay));
    for (std::size_t i = 0; i < medians.size(); ++i) {
        for (std::size_t j = 0; j < kBinsPerDay; ++j) {
            out.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = medians[i][j];
        }
    }
    return out;
}

CountCurveSet load_binned_accelerometry(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const auto id_col = table.column("subject_id");
    const auto bin_cols = prefixed_columns(table, "bin_", 0);
    const auto n_bins = static_cast<Eigen::Index>(bin_cols.size());

    std::unordered_set<std::string> seen;
    std::vector<std::string> ids;
    std::vector<std::vector<Count>> rows;
    for (const auto& row : table.rows) {
        if (!seen.insert(row[id_col]).second) {
            throw InputError(kModule, fmt::format("duplicate subject_id '{}' in '{}'", row[id_col],
                                                  path.string()));
        }
        std::vector<Count> values(bin_cols.size());
        bool complete = true;
        for (std::size_t k = 0; k < bin_cols.size(); ++k) {
            const auto v = parse_count(row[bin_cols[k]], "bin count");
            if (!v) {
                complete = false;
                break;
            }
            values[k] = *v;
        }
        if (!complete) continue;
        ids.push_back(row[id_col]);
        rows.push_back(std::move(values));
    }

    CountCurveSet out;
    out.subject_ids = std::move(ids);
    out.grid = five_minute_grid(n_bins);
    out.counts.resize(static_cast<Eigen::Index>(rows.size()), n_bins);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index k = 0; k < n_bins; ++k) {
            out.counts(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
        }
    }
    return out;
}

std::vector<SubjectCovariates> load_covariates(const std::filesystem::path& path) {
    const auto table = csv::read(path);
    std::vector<std::size_t> cols;
    for (const auto& name : kCovariateColumns) cols.push_back(table.column(name));
    enum Col {
        kId, kWeekdays, kWeekend, kBmi, kRace, kGender, kAge, kEducation, kDrinks, kSmoking,
        kDiabetes, kChf, kChd, kCancer, kStroke, kHdl, kTotalChol, kSysBp, kWeight
    };

    std::unordered_set<std::string> seen;
    std::vector<SubjectCovariates> out;
    for (const auto& row : table.rows) {
        const auto field = [&](Col c) -> const std::string& { return row[cols[c]]; };
        if (!seen.insert(field(kId)).second) {
            throw InputError(kModule, fmt::format("duplicate subject_id '{}' in '{}'", field(kId),
                                                  path.string()));
        }
        const bool incomplete = std::any_of(cols.begin(), cols.end(),
                                            [&](std::size_t c) { return csv::is_missing(row[c]); });
        if (incomplete) continue;

        SubjectCovariates s;
        s.subject_id = field(kId);
        s.n_weekdays = csv::parse_double(field(kWeekdays), "n_weekdays");
        s.n_weekend_days = csv::parse_double(field(kWeekend), "n_weekend_days");
        s.bmi = csv::parse_double(field(kBmi), "bmi");
        s.race = static_cast<Race>(parse_level(kRaceLevels, field(kRace), "race"));
        s.gender = static_cast<Gender>(parse_level(kGenderLevels, field(kGender), "gender"));
        s.age = csv::parse_double(field(kAge), "age");
        s.education =
            static_cast<Education>(parse_level(kEducationLevels, field(kEducation), "education"));
        s.drinks_per_week = csv::parse_double(field(kDrinks), "drinks_per_week");
        s.smoking = static_cast<Smoking>(parse_level(kSmokingLevels, field(kSmoking), "smoking"));
        s.diabetes = parse_yes_no(field(kDiabetes), "diabetes");
        s.chf = parse_yes_no(field(kChf), "chf");
        s.chd = parse_yes_no(field(kChd), "chd");
        s.cancer = parse_yes_no(field(kCancer), "cancer");
        s.stroke = parse_yes_no(field(kStroke), "stroke");
        s.hdl_cholesterol = csv::parse_double(field(kHdl), "hdl_cholesterol");
        s.total_cholesterol = csv::parse_double(field(kTotalChol), "total_cholesterol");
        s.systolic_bp = csv::parse_double(field(kSysBp), "systolic_bp");
        s.raw_survey_weight = csv::parse_double(field(kWeight), "survey_weight");
        if (!(s.raw_survey_weight > 0.0)) {
            throw ValidationError(kModule, fmt::format("survey weight of '{}' must be positive",
                                                       s.subject_id));
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SubjectCovariates> attach_mortality(std::vector<SubjectCovariates> subjects,
                                                const std::filesystem::path& path) {
    const auto table = csv::read(path);
    const auto id_col = table.column("subject_id");
    const auto status_col = table.column("mortstat");
    std::unordered_map<std::string, int> status;
    for (const auto& row : table.rows) {
        const auto& id = row[id_col];
        if (status.count(id)) {
            throw InputError(kModule, fmt::format("duplicate subject_id '{}' in '{}'", id, path.string()));
        }
        if (csv::is_missing(row[status_col])) {
            status.emplace(id, -1);
            continue;
        }
        const long long v = csv::parse_integer(row[status_col], "mortstat");
        if (v != 0 && v != 1) {
            throw InputError(kModule, fmt::format("mortstat must be 0 or 1, found {} for '{}'", v, id));
        }
        status.emplace(id, static_cast<int>(v));
    }

    std::vector<SubjectCovariates> out;
    out.reserve(subjects.size());
    for (auto& s : subjects) {
        const auto it = status.find(s.subject_id);
        if (it == status.end() || it->second < 0) continue;
        s.mortality = it->second;
        out.push_back(std::move(s));
    }
    return out;
}

Dataset load_dataset(const DatasetPaths& paths) {
    const auto head = csv::read(paths.accel).header;
    const bool minute_level = std::find(head.begin(), head.end(), "min_0") != head.end();
    CountCurveSet curves;
    if (minute_level) {
        if (!paths.wear) throw InputError(kModule, "minute-level accelerometry needs a wear-flag file");
        curves = load_minute_accelerometry(paths.accel, *paths.wear);
    } else {
        curves = load_binned_accelerometry(paths.accel);
    }

    auto subjects = attach_mortality(load_covariates(paths.covariates), paths.mortality);

    std::unordered_map<std::string, Eigen::Index> row_of;
    for (std::size_t i = 0; i < curves.subject_ids.size(); ++i) {
        row_of.emplace(curves.subject_ids[i], static_cast<Eigen::Index>(i));
    }

    Dataset out;
    std::vector<Eigen::Index> rows;
    for (auto& s : subjects) {
        const auto it = row_of.find(s.subject_id);
        if (it == row_of.end()) continue;
        rows.push_back(it->second);
        out.covariates.push_back(std::move(s));
    }
    out.curves.grid = curves.grid;
    out.curves.counts.resize(static_cast<Eigen::Index>(rows.size()), curves.n_points());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.curves.counts.row(static_cast<Eigen::Index>(i)) = curves.counts.row(rows[i]);
        out.curves.subject_ids.push_back(out.covariates[i].subject_id);
    }
    return out;
}

std::string format_binned_accelerometry(const CountCurveSet& curves) {
    std::string out = "subject_id";
    for (Eigen::Index k = 0; k < curves.n_points(); ++k) out += fmt::format(",bin_{}", k);
    out += '\n';
    for (Eigen::Index i = 0; i < curves.n_subjects(); ++i) {
        out += curves.subject_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < curves.n_points(); ++k) out += fmt::format(",{}", curves.counts(i, k));
        out += '\n';
    }
    return out;
}

std::string format_covariates(const std::vector<SubjectCovariates>& subjects) {
    std::string out = fmt::format("{}\n", fmt::join(kCovariateColumns, ","));
    const auto yes_no = [](bool b) { return kYesNoLevels[b ? 1 : 0]; };
    const auto num = [](double v) { return csv::format_double(v); };
    for (const auto& s : subjects) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.subject_id,
                           num(s.n_weekdays), num(s.n_weekend_days), num(s.bmi),
                           kRaceLevels[static_cast<std::size_t>(s.race)],
                           kGenderLevels[static_cast<std::size_t>(s.gender)], num(s.age),
                           kEducationLevels[static_cast<std::size_t>(s.education)],
                           num(s.drinks_per_week), kSmokingLevels[static_cast<std::size_t>(s.smoking)],
                           yes_no(s.diabetes), yes_no(s.chf), yes_no(s.chd), yes_no(s.cancer),
                           yes_no(s.stroke), num(s.hdl_cholesterol), num(s.total_cholesterol),
                           num(s.systolic_bp), num(s.raw_survey_weight));
    }
    return out;
}

std::string format_mortality(const std::vector<SubjectCovariates>& subjects) {
    std::string out = "subject_id,mortstat\n";
    for (const auto& s : subjects) out += fmt::format("{},{}\n", s.subject_id, s.mortality);
    return out;
}

}  // namespace funcount
