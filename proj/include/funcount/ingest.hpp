#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "funcount/types.hpp"

namespace funcount {

inline constexpr std::size_t kMinutesPerDay = 1440;
inline constexpr std::size_t kBinsPerDay = 288;

/// One day of minute-level activity counts for one subject.
struct MinuteRecord {
    std::string subject_id;
    int day_index = 1;
    std::vector<Count> counts;     // 1440 entries
    std::vector<bool> wear_flags;  // true = device worn
};

enum class Race { White, Black, Hispanic, Other };
enum class Gender { Male, Female };
enum class Education { LessThanHighSchool, HighSchool, CollegeAndAbove };
enum class Smoking { Never, Former, Current };

/// Display names, in declaration order; the first entry is the reference level.
inline constexpr std::array<std::string_view, 4> kRaceLevels{"White", "Black", "Hispanic", "Other"};
inline constexpr std::array<std::string_view, 2> kGenderLevels{"Male", "Female"};
inline constexpr std::array<std::string_view, 3> kEducationLevels{
    "Less than High School", "High School", "College and Above"};
inline constexpr std::array<std::string_view, 3> kSmokingLevels{"Never", "Former", "Current"};
inline constexpr std::array<std::string_view, 2> kYesNoLevels{"No", "Yes"};

struct SubjectCovariates {
    std::string subject_id;

    double age = 0.0;
    double bmi = 0.0;
    double drinks_per_week = 0.0;
    double hdl_cholesterol = 0.0;
    double total_cholesterol = 0.0;
    double systolic_bp = 0.0;
    double n_weekdays = 0.0;
    double n_weekend_days = 0.0;

    Race race = Race::White;
    Gender gender = Gender::Male;
    Education education = Education::LessThanHighSchool;
    Smoking smoking = Smoking::Never;
    bool diabetes = false;
    bool chf = false;
    bool chd = false;
    bool cancer = false;
    bool stroke = false;

    double raw_survey_weight = 1.0;
    int mortality = 0;
};

/// Column names of covariates.csv, in the order they are written.
extern const std::vector<std::string> kCovariateColumns;

/// Sets counts to zero wherever the device was not worn.
MinuteRecord recode_nonwear(MinuteRecord record);

/// Sums consecutive 5-minute windows of a 1440-minute day into 288 bins.
std::vector<Count> bin_five_minutes(const std::vector<Count>& minute_counts);

/// Per-bin median across days, rounded half away from zero.
std::vector<Count> median_day(const std::vector<std::vector<Count>>& days);

/// Divides each weight by the mean weight so the result averages to one.
std::vector<double> adjust_weights(const std::vector<double>& raw);

struct DatasetPaths {
    /// Either minute-level (`subject_id,day,min_0..min_1439`) or pre-binned
    /// (`subject_id,bin_0,...`) counts; the header decides which.
    std::filesystem::path accel;
    /// Wear flags with the same shape as a minute-level accel file.
    std::optional<std::filesystem::path> wear;
    std::filesystem::path covariates;
    std::filesystem::path mortality;
};

struct Dataset {
    CountCurveSet curves;                       // rows aligned with `covariates`
    std::vector<SubjectCovariates> covariates;  // complete cases, covariates.csv order
};

/// Reads minute-level accelerometry plus wear flags and reduces every subject
/// to one median day of 288 five-minute bins. Day curves with a missing bin
/// (after non-wear recoding) are dropped; subjects left without days are
/// dropped too.
CountCurveSet load_minute_accelerometry(const std::filesystem::path& accel_path,
                                        const std::filesystem::path& wear_path);

/// Reads a pre-binned counts file, one row per subject. Rows with a missing
/// bin are dropped.
CountCurveSet load_binned_accelerometry(const std::filesystem::path& path);

/// Reads covariates.csv. Rows with any missing value are dropped; unknown
/// categorical levels and duplicate ids are errors.
std::vector<SubjectCovariates> load_covariates(const std::filesystem::path& path);

/// Attaches mortality outcomes from mortality.csv; subjects without a
/// recorded outcome are dropped.
std::vector<SubjectCovariates> attach_mortality(std::vector<SubjectCovariates> subjects,
                                                const std::filesystem::path& path);

/// Complete-case join of accelerometry, covariates and mortality.
Dataset load_dataset(const DatasetPaths& paths);

/// Writes curves in the pre-binned format (`subject_id,bin_0,...`).
std::string format_binned_accelerometry(const CountCurveSet& curves);
std::string format_covariates(const std::vector<SubjectCovariates>& subjects);
std::string format_mortality(const std::vector<SubjectCovariates>& subjects);

}  // namespace funcount
