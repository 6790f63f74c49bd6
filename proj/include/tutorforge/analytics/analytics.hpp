#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tutorforge/analysis/coverage.hpp"

namespace tutorforge::analytics {

struct GradeConfig {
    double w_coverage = 0.7;
    double w_redundancy = 0.3;

    /// Throws std::invalid_argument unless both weights are >= 0 and sum to 1.
    void validate() const;
};

/// w_coverage * mean(line, branch, condition) + w_redundancy * 100 * max(0, 1 - redundant/total).
/// A suite without tests scores 0.
double compute_grade(const analysis::MetricsRecord& metrics, const GradeConfig& config = {});

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double x, double a, double b);

/// P(T <= t) for Student's t with `df` degrees of freedom (df > 0, may be fractional).
double student_t_cdf(double t, double df);

struct WelchResult {
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double mean_a = 0;
    double mean_b = 0;
    double var_a = 0;  // sample variances (n - 1 denominator)
    double var_b = 0;
    double t = 0;   // (mean_a - mean_b) / standard error
    double df = 0;  // Welch-Satterthwaite
    double p = 1;   // two-sided
};

/// Welch's unequal-variance two-sample t-test. Needs at least two values per
/// sample (std::invalid_argument otherwise). When both samples have zero
/// variance the statistic is 0 with p = 1 for equal means, and infinite with
/// p = 0 otherwise; df is then n_a + n_b - 2.
WelchResult welch_test(std::span<const double> a, std::span<const double> b);

enum class Group { A, B };
enum class Phase { Pretest, Treatment, Posttest };

std::string_view group_name(Group group);
std::string_view phase_name(Phase phase);
std::optional<Group> parse_group(std::string_view text);
std::optional<Phase> parse_phase(std::string_view text);

struct StudyRecord {
    std::string student_id;
    Group group = Group::A;
    std::string semester;
    Phase phase = Phase::Pretest;
    std::string assignment;
    double line = 0;
    double branch = 0;
    double cond = 0;
    std::size_t redundant = 0;
    std::size_t total = 0;
    double grade = 0;

    bool operator==(const StudyRecord&) const = default;
};

constexpr std::size_t kSurveyQuestions = 9;

struct SurveyResponse {
    std::string respondent;
    Group group = Group::A;
    std::array<int, kSurveyQuestions> answers{};  // 1..7, or 0 when the question was skipped

    bool operator==(const SurveyResponse&) const = default;
};

struct StudyDataset {
    std::vector<StudyRecord> records;
    std::vector<SurveyResponse> survey;
};

/// Malformed CSV input. `line` is 1-based.
class DataError : public std::runtime_error {
public:
    DataError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

inline constexpr std::string_view kRecordsHeader =
    "student_id,group,semester,phase,assignment,line,branch,cond,redundant,total,grade";
inline constexpr std::string_view kSurveyHeader = "respondent,group,q1,q2,q3,q4,q5,q6,q7,q8,q9";

std::vector<StudyRecord> parse_records_csv(std::string_view text);
std::vector<SurveyResponse> parse_survey_csv(std::string_view text);
std::string records_to_csv(std::span<const StudyRecord> records);
std::string survey_to_csv(std::span<const SurveyResponse> responses);

struct VariableRow {
    std::string name;
    int decimals = 2;  // presentation precision of the means
    WelchResult test;
    bool significant = false;  // p < 0.05
};

struct GroupStats {
    std::string title;
    std::vector<VariableRow> rows;
};

/// Thrown when a group has fewer than two observations.
class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Line, branch and condition coverage, redundant tests and grade for one
/// phase, Group A against Group B.
GroupStats group_summary(std::span<const StudyRecord> records, Phase phase);

/// One row per survey question; skipped answers are left out of that question.
GroupStats survey_summary(std::span<const SurveyResponse> responses);

std::string_view survey_question(std::size_t index);

/// `variable,group_a_mean,group_b_mean,t,df,p,significant`
std::string export_csv(const GroupStats& stats);
/// Aligned plain-text table.
std::string export_text(const GroupStats& stats);

}  // namespace tutorforge::analytics
