#include "tutorforge/service/pipeline.hpp"

#include "tutorforge/lang/parser.hpp"

namespace tutorforge::service {

nlohmann::ordered_json PipelineOutput::metrics_json() const { return analysis::metrics_to_json(analysis.metrics); }

nlohmann::ordered_json PipelineOutput::gap_json(const suite::AssignmentBundle& bundle) const {
    return analysis::gap_to_json(bundle.reference_program, analysis.gap);
}

nlohmann::ordered_json PipelineOutput::feedback_json() const { return feedback::feedback_to_json(report); }

nlohmann::ordered_json PipelineOutput::results_json() const {
    auto out = nlohmann::ordered_json::array();
    for (const auto& r : analysis.results) {
        out.push_back({{"test", r.test_name}, {"verdict", runtime::verdict_name(r.verdict)}, {"message", r.message}});
    }
    return out;
}

void PipelineInput::set_sources(const std::string& suite_text, const std::optional<std::string>& program_text) {
    suites = {{kSuitePath, suite_text}};
    program.reset();
    if (program_text) program = lang::SourceInput{kProgramPath, *program_text};
}

PipelineOutput run_pipeline(const suite::AssignmentBundle& bundle, const PipelineInput& input) {
    input.grade.validate();
    input.limits.validate();
    PipelineOutput out;
    const auto student_suite = suite::make_suite(input.suites, suite::TestOrigin::Student);
    if (input.program) out.program = lang::parse_program(input.program->path, input.program->text);
    const auto* program = out.program ? &*out.program : nullptr;
    out.analysis = analysis::analyze_submission(bundle, student_suite, program, input.limits);
    const auto receipt = feedback::make_receipt(input.submission_id, input.timestamp, input.attempt, out.analysis.results);
    out.report = feedback::feedback_for_submission(bundle, out.analysis, program, input.mode, receipt);
    out.grade = analytics::compute_grade(out.analysis.metrics, input.grade);
    return out;
}

}  // namespace tutorforge::service
