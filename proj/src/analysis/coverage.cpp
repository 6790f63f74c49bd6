#include "tutorforge/analysis/coverage.hpp"

#include <algorithm>
#include <map>

#include "tutorforge/runtime/trace_json.hpp"

namespace tutorforge::analysis {

namespace {

KindCount count_kind(const lang::EntitySet& catalog_kind, const lang::EntitySet& covered) {
    KindCount out;
    out.total = catalog_kind.size();
    for (const auto& e : catalog_kind) {
        if (covered.contains(e)) ++out.covered;
    }
    return out;
}

nlohmann::ordered_json count_to_json(const KindCount& count) {
    return {{"covered", count.covered}, {"total", count.total}, {"pct", count.pct()}};
}

KindCount count_from_json(const nlohmann::json& json) {
    return {json.at("covered").get<std::size_t>(), json.at("total").get<std::size_t>()};
}

}  // namespace

Redundancy find_redundant(std::span<const runtime::TestRunResult> results) {
    Redundancy out;
    lang::EntitySet kept;
    for (const auto& result : results) {
        const auto& covered = result.coverage.covered;
        if (std::includes(kept.begin(), kept.end(), covered.begin(), covered.end())) {
            ++out.count;
            out.names.push_back(result.test_name);
        } else {
            kept.insert(covered.begin(), covered.end());
        }
    }
    return out;
}

MetricsRecord compute_metrics(const lang::EntityCatalog& catalog, std::span<const runtime::TestRunResult> results) {
    const auto covered = runtime::union_coverage(results);
    MetricsRecord m;
    m.lines = count_kind(catalog.lines, covered);
    m.branches = count_kind(catalog.branch_arms, covered);
    m.conditions = count_kind(catalog.condition_outcomes, covered);
    m.line_pct = m.lines.pct();
    m.branch_pct = m.branches.pct();
    m.condition_pct = m.conditions.pct();
    auto redundancy = find_redundant(results);
    m.redundant_count = redundancy.count;
    m.redundant_names = std::move(redundancy.names);
    m.total_tests = results.size();
    return m;
}

ConceptGapReport find_missing_reference_tests(const suite::AssignmentBundle& bundle,
                                              std::span<const runtime::TestRunResult> student_results) {
    const auto covered = runtime::union_coverage(student_results);
    ConceptGapReport report;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < bundle.reference_suite.tests.size(); ++i) {
        const auto& test = bundle.reference_suite.tests[i];
        MissingTest missing;
        for (const auto& e : bundle.reference_results.at(i).coverage.covered) {
            if (!covered.contains(e)) missing.uncovered.insert(e);
        }
        if (missing.uncovered.empty()) continue;
        missing.name = test.name;
        missing.concepts = test.concepts;
        for (const auto& c : test.concepts) ++counts[c];
        report.missing_tests.push_back(std::move(missing));
    }
    for (const auto& [id, count] : counts) report.gap_concepts.push_back({id, count});
    std::stable_sort(report.gap_concepts.begin(), report.gap_concepts.end(),
                     [](const ConceptGap& a, const ConceptGap& b) { return a.missing_tests > b.missing_tests; });
    return report;
}

SubmissionError::SubmissionError(Kind kind, std::string message, std::vector<std::string> details)
    : std::runtime_error(std::move(message)), kind_(kind), details_(std::move(details)) {}

const lang::SourceProgram& analyzed_program(const suite::AssignmentBundle& bundle,
                                            const lang::SourceProgram* student_program) {
    return bundle.mode == suite::Mode::Development && student_program ? *student_program : bundle.reference_program;
}

SubmissionAnalysis analyze_submission(const suite::AssignmentBundle& bundle, const suite::TestSuite& student_suite,
                                      const lang::SourceProgram* student_program,
                                      const runtime::ExecutionLimits& limits) {
    limits.validate();
    SubmissionAnalysis out;
    out.development = bundle.mode == suite::Mode::Development;
    if (out.development) {
        if (!student_program) {
            throw SubmissionError(SubmissionError::Kind::MissingProgram,
                                  "assignment '" + bundle.id + "' is in DEVELOPMENT mode and needs a program");
        }
        const auto report = suite::check_interface(*student_program, bundle.interface);
        if (!report.conformant()) {
            std::vector<std::string> details;
            for (const auto& issue : report.issues) details.push_back(issue.message);
            throw SubmissionError(SubmissionError::Kind::InterfaceMismatch,
                                  "program does not implement the assignment interface", std::move(details));
        }
        out.catalog = lang::extract_entities(*student_program);
        out.results = runtime::run_suite(*student_program, student_suite, limits);
        out.reference_results = runtime::run_suite(bundle.reference_program, student_suite, limits);
    } else {
        if (student_program) {
            throw SubmissionError(SubmissionError::Kind::UnexpectedProgram,
                                  "assignment '" + bundle.id + "' is in LEARNING mode and takes tests only");
        }
        out.catalog = bundle.catalog;
        out.results = runtime::run_suite(bundle.reference_program, student_suite, limits);
        out.reference_results = out.results;
    }
    out.metrics = compute_metrics(out.catalog, out.results);
    out.gap = find_missing_reference_tests(bundle, out.reference_results);
    return out;
}

nlohmann::ordered_json metrics_to_json(const MetricsRecord& m) {
    return {{"line_pct", m.line_pct},
            {"branch_pct", m.branch_pct},
            {"condition_pct", m.condition_pct},
            {"redundant_count", m.redundant_count},
            {"redundant_names", m.redundant_names},
            {"total_tests", m.total_tests},
            {"lines", count_to_json(m.lines)},
            {"branches", count_to_json(m.branches)},
            {"conditions", count_to_json(m.conditions)}};
}

MetricsRecord metrics_from_json(const nlohmann::json& json) {
    MetricsRecord m;
    m.line_pct = json.at("line_pct").get<double>();
    m.branch_pct = json.at("branch_pct").get<double>();
    m.condition_pct = json.at("condition_pct").get<double>();
    m.redundant_count = json.at("redundant_count").get<std::size_t>();
    m.redundant_names = json.at("redundant_names").get<std::vector<std::string>>();
    m.total_tests = json.at("total_tests").get<std::size_t>();
    m.lines = count_from_json(json.at("lines"));
    m.branches = count_from_json(json.at("branches"));
    m.conditions = count_from_json(json.at("conditions"));
    return m;
}

nlohmann::ordered_json gap_to_json(const lang::SourceProgram& reference, const ConceptGapReport& gap) {
    auto missing = nlohmann::ordered_json::array();
    for (const auto& t : gap.missing_tests) {
        missing.push_back({{"test", t.name},
                           {"concepts", t.concepts},
                           {"entities", runtime::entities_to_json(reference, t.uncovered)}});
    }
    auto concepts = nlohmann::ordered_json::array();
    for (const auto& c : gap.gap_concepts) concepts.push_back({{"concept", c.concept_id}, {"missing_tests", c.missing_tests}});
    return {{"missing_tests", missing}, {"gap_concepts", concepts}};
}

}  // namespace tutorforge::analysis
