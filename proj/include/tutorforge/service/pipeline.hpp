#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/analysis/coverage.hpp"
#include "tutorforge/analytics/analytics.hpp"
#include "tutorforge/feedback/feedback.hpp"

namespace tutorforge::service {

/// File names given to submitted sources; they appear in parse error locations
/// and in DETAILED reports of Development-mode programs.
inline constexpr const char* kSuitePath = "submission_test.tl";
inline constexpr const char* kProgramPath = "submission.tl";

struct PipelineInput {
    /// One or more test files; names are used in parse error locations.
    std::vector<lang::SourceInput> suites;
    std::optional<lang::SourceInput> program;
    suite::FeedbackMode mode = suite::FeedbackMode::Detailed;
    std::string submission_id;
    std::string timestamp;
    std::uint32_t attempt = 1;
    analytics::GradeConfig grade;
    runtime::ExecutionLimits limits;

    /// Service submissions: one suite text and an optional program, under the
    /// fixed names above.
    void set_sources(const std::string& suite_text, const std::optional<std::string>& program_text);
};

struct PipelineOutput {
    std::optional<lang::SourceProgram> program;
    analysis::SubmissionAnalysis analysis;
    feedback::FeedbackReport report;
    double grade = 0;

    nlohmann::ordered_json metrics_json() const;
    nlohmann::ordered_json gap_json(const suite::AssignmentBundle& bundle) const;
    nlohmann::ordered_json feedback_json() const;
    /// Per-test verdicts of the student suite on the analysed program.
    nlohmann::ordered_json results_json() const;
};

/// run suite -> metrics -> concept gap -> feedback -> grade.
/// Throws lang::ParseError for malformed sources and analysis::SubmissionError
/// when the program does not fit the bundle mode or interface.
PipelineOutput run_pipeline(const suite::AssignmentBundle& bundle, const PipelineInput& input);

}  // namespace tutorforge::service
