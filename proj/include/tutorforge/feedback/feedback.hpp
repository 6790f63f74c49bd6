#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tutorforge/analysis/coverage.hpp"
#include "tutorforge/suite/bundle.hpp"

namespace tutorforge::feedback {

using suite::FeedbackMode;

struct Receipt {
    std::string submission_id;
    std::string timestamp;  // ISO 8601, UTC
    std::uint32_t attempt = 0;
    std::size_t total_tests = 0;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t errors = 0;
    std::size_t timeouts = 0;
};

Receipt make_receipt(std::string submission_id, std::string timestamp, std::uint32_t attempt,
                     std::span<const runtime::TestRunResult> results);

enum class LineStatus { Covered, Uncovered, Partial };

std::string_view line_status_name(LineStatus status);

struct AnnotatedLine {
    std::uint32_t line = 0;
    LineStatus status = LineStatus::Uncovered;
    std::optional<std::string> text;  // omitted when the source is hidden
};

struct AnnotatedFile {
    std::string path;
    std::vector<AnnotatedLine> lines;  // executable lines only, ascending
    std::optional<std::string> source;  // full text, omitted when hidden
};

struct BranchRow {
    std::string file;
    std::uint32_t line = 0;
    std::optional<std::string> guard;
    bool true_hit = false;
    bool false_hit = false;
};

struct ConditionRow {
    std::string file;
    std::uint32_t line = 0;
    std::uint32_t atom = 0;
    std::optional<std::string> text;
    bool true_hit = false;
    bool false_hit = false;
};

struct FailingTest {
    std::string name;
    std::string verdict;
    std::string message;
};

struct DetailedPayload {
    std::vector<AnnotatedFile> files;
    std::vector<BranchRow> branches;
    std::vector<ConditionRow> conditions;
    std::vector<FailingTest> failing_tests;  // the student's own tests
    analysis::MetricsRecord totals;
};

struct CardResource {
    std::string label;
    std::string href;
    suite::ResourceKind kind = suite::ResourceKind::Text;
};

struct ConceptCard {
    std::string id;
    std::string title;
    std::string explanation;
    std::vector<CardResource> resources;
    std::size_t missing_tests = 0;
};

struct ConceptualPayload {
    std::vector<ConceptCard> cards;  // descending missing-test count, then id
    bool complete = false;           // true when nothing is missing
};

struct FeedbackReport {
    FeedbackMode mode = FeedbackMode::None;
    Receipt receipt;
    std::optional<DetailedPayload> detailed;
    std::optional<ConceptualPayload> conceptual;
};

/// Coverage of one program, used to annotate its source for DETAILED reports.
struct AnnotatedSource {
    const lang::SourceProgram& program;
    const lang::EntityCatalog& catalog;
    lang::EntitySet covered;
    bool show_source = true;
};

/// Maps a resource URL to a link a student can follow: built-in notes go to
/// `/concepts/<id>`, bundle files to `/assignments/<bundle>/files/<path>`,
/// external links are kept.
std::string resource_href(std::string_view bundle_id, const std::string& url);

/// Builds the payload for `mode`. DETAILED requires `source`; a missing source
/// is a contract violation (std::logic_error).
FeedbackReport render_feedback(FeedbackMode mode, const Receipt& receipt, const analysis::MetricsRecord& metrics,
                               const analysis::ConceptGapReport& gap, const suite::ConceptTaxonomy& taxonomy,
                               std::string_view bundle_id, const AnnotatedSource* source,
                               std::span<const runtime::TestRunResult> results = {});

/// Feedback for an analysed submission. Source text is shown for WHITE_BOX
/// bundles and for the student's own program in Development mode.
FeedbackReport feedback_for_submission(const suite::AssignmentBundle& bundle, const analysis::SubmissionAnalysis& analysis,
                                       const lang::SourceProgram* student_program, FeedbackMode mode,
                                       const Receipt& receipt);

nlohmann::ordered_json feedback_to_json(const FeedbackReport& report);
nlohmann::ordered_json receipt_to_json(const Receipt& receipt);

/// Self-contained HTML documents. Throw std::invalid_argument on the wrong mode.
std::string render_detailed_html(const FeedbackReport& report);
std::string render_conceptual_html(const FeedbackReport& report);
/// Receipt page for NONE reports.
std::string render_receipt_html(const FeedbackReport& report);
std::string render_html(const FeedbackReport& report);

/// Plain-text rendering of any report, for terminals.
std::string render_text(const FeedbackReport& report);

}  // namespace tutorforge::feedback
