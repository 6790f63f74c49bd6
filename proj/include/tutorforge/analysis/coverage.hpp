#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/lang/entities.hpp"
#include "tutorforge/runtime/runtime.hpp"
#include "tutorforge/suite/bundle.hpp"

namespace tutorforge::analysis {

struct KindCount {
    std::size_t covered = 0;
    std::size_t total = 0;

    /// 100 when the catalog has no entities of this kind.
    double pct() const noexcept { return total == 0 ? 100.0 : 100.0 * static_cast<double>(covered) / static_cast<double>(total); }
    bool operator==(const KindCount&) const = default;
};

struct MetricsRecord {
    double line_pct = 0;
    double branch_pct = 0;
    double condition_pct = 0;
    std::size_t redundant_count = 0;
    std::vector<std::string> redundant_names;
    std::size_t total_tests = 0;

    KindCount lines;
    KindCount branches;
    KindCount conditions;

    bool operator==(const MetricsRecord&) const = default;
};

struct Redundancy {
    std::size_t count = 0;
    std::vector<std::string> names;
};

/// Greedy rule in declaration order: a test is redundant when everything it
/// covers is already covered by the tests kept before it. Redundant tests do
/// not extend the kept union.
Redundancy find_redundant(std::span<const runtime::TestRunResult> results);

MetricsRecord compute_metrics(const lang::EntityCatalog& catalog, std::span<const runtime::TestRunResult> results);

struct MissingTest {
    std::string name;
    std::vector<std::string> concepts;
    lang::EntitySet uncovered;  // entities of the reference test the student suite misses
};

struct ConceptGap {
    std::string concept_id;
    std::size_t missing_tests = 0;

    bool operator==(const ConceptGap&) const = default;
};

struct ConceptGapReport {
    std::vector<MissingTest> missing_tests;  // reference suite order
    std::vector<ConceptGap> gap_concepts;    // descending count, then id

    bool empty() const noexcept { return missing_tests.empty(); }
};

/// `student_results` must come from running the student suite on the
/// bundle's reference program.
ConceptGapReport find_missing_reference_tests(const suite::AssignmentBundle& bundle,
                                              std::span<const runtime::TestRunResult> student_results);

class SubmissionError : public std::runtime_error {
public:
    enum class Kind { MissingProgram, UnexpectedProgram, InterfaceMismatch };

    SubmissionError(Kind kind, std::string message, std::vector<std::string> details = {});

    Kind kind() const noexcept { return kind_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    Kind kind_;
    std::vector<std::string> details_;
};

struct SubmissionAnalysis {
    bool development = false;
    /// Student suite on the program whose coverage is reported: the reference
    /// program in Learning mode, the student's program in Development mode.
    std::vector<runtime::TestRunResult> results;
    /// Student suite on the reference program; same as `results` in Learning mode.
    std::vector<runtime::TestRunResult> reference_results;
    lang::EntityCatalog catalog;
    MetricsRecord metrics;
    ConceptGapReport gap;
};

/// Runs a student suite and computes metrics and the concept gap.
/// Development mode requires `student_program` to conform to the bundle
/// interface; Learning mode forbids it. Throws SubmissionError.
SubmissionAnalysis analyze_submission(const suite::AssignmentBundle& bundle, const suite::TestSuite& student_suite,
                                      const lang::SourceProgram* student_program,
                                      const runtime::ExecutionLimits& limits = {});

/// The program whose coverage `analyze_submission` reports.
const lang::SourceProgram& analyzed_program(const suite::AssignmentBundle& bundle,
                                            const lang::SourceProgram* student_program);

nlohmann::ordered_json metrics_to_json(const MetricsRecord& metrics);
MetricsRecord metrics_from_json(const nlohmann::json& json);
nlohmann::ordered_json gap_to_json(const lang::SourceProgram& reference, const ConceptGapReport& gap);

}  // namespace tutorforge::analysis
