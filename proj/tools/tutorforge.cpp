// tutorforge: offline access to the submission pipeline, plus the server.
//
// Exit codes: 0 ok, 1 environment (files, store, port), 2 input that does
// not parse or fit the bundle, 3 bundle fails validation.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tutorforge/service/http.hpp"
#include "tutorforge/service/platform.hpp"

namespace fs = std::filesystem;
using namespace tutorforge;

namespace {

enum Exit { kOk = 0, kEnvironment = 1, kInput = 2, kBundle = 3 };

struct EnvironmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EnvironmentError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw EnvironmentError("cannot write " + path);
}

// Shared by analyze, feedback and grade.
struct PipelineArgs {
    std::string bundle;
    std::vector<std::string> suites;
    std::string program;
    std::uint64_t max_steps = runtime::ExecutionLimits{}.max_steps;
    std::uint32_t max_depth = runtime::ExecutionLimits{}.max_call_depth;
    std::string submission_id = "local";
    std::string timestamp = "1970-01-01T00:00:00Z";

    void add_to(CLI::App& cmd) {
        cmd.add_option("bundle", bundle, "Assignment bundle directory")->required()->check(CLI::ExistingDirectory);
        cmd.add_option("suite", suites, "Student test file(s)")->required();
        cmd.add_option("--program", program, "Student program (Development mode)");
        cmd.add_option("--max-steps", max_steps, "Step budget per test");
        cmd.add_option("--max-depth", max_depth, "Call depth limit");
        cmd.add_option("--submission-id", submission_id, "Id printed on the receipt");
        cmd.add_option("--timestamp", timestamp, "Timestamp printed on the receipt");
    }

    service::PipelineInput input() const {
        service::PipelineInput in;
        for (const auto& path : suites) in.suites.push_back({fs::path(path).filename().string(), read_text(path)});
        if (!program.empty()) in.program = lang::SourceInput{fs::path(program).filename().string(), read_text(program)};
        in.submission_id = submission_id;
        in.timestamp = timestamp;
        in.limits.max_steps = max_steps;
        in.limits.max_call_depth = max_depth;
        return in;
    }
};

std::string fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
    return buffer;
}

std::string metrics_text(const analysis::MetricsRecord& m) {
    auto count = [](const analysis::KindCount& k) {
        return " (" + std::to_string(k.covered) + "/" + std::to_string(k.total) + ")";
    };
    std::string out;
    out += "line coverage       " + fixed(m.line_pct, 1) + "%" + count(m.lines) + "\n";
    out += "branch coverage     " + fixed(m.branch_pct, 1) + "%" + count(m.branches) + "\n";
    out += "condition coverage  " + fixed(m.condition_pct, 1) + "%" + count(m.conditions) + "\n";
    out += "redundant tests     " + std::to_string(m.redundant_count) + " of " + std::to_string(m.total_tests);
    for (std::size_t i = 0; i < m.redundant_names.size(); ++i) out += (i ? ", " : ": ") + m.redundant_names[i];
    return out + "\n";
}

std::string gap_text(const analysis::ConceptGapReport& gap) {
    if (gap.empty()) return "missing reference tests: none\n";
    std::string out = "missing reference tests: " + std::to_string(gap.missing_tests.size()) + "\n";
    for (const auto& t : gap.missing_tests) {
        out += "  " + t.name + " [";
        for (std::size_t i = 0; i < t.concepts.size(); ++i) out += (i ? ", " : "") + t.concepts[i];
        out += "]\n";
    }
    out += "concept gap:\n";
    for (const auto& c : gap.gap_concepts) out += "  " + c.concept_id + " " + std::to_string(c.missing_tests) + "\n";
    return out;
}

analytics::GradeConfig parse_weights(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw CLI::ValidationError("--weights", "expected COVERAGE,REDUNDANCY");
    analytics::GradeConfig config;
    try {
        config.w_coverage = std::stod(text.substr(0, comma));
        config.w_redundancy = std::stod(text.substr(comma + 1));
        config.validate();
    } catch (const std::exception& e) {
        throw CLI::ValidationError("--weights", e.what());
    }
    return config;
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

fs::path store_path(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("TUTORFORGE_STORE"); env && *env) return env;
    throw EnvironmentError("no store: pass --store or set TUTORFORGE_STORE");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TutorForge: test-suite analysis, feedback and grading for TutorLang assignments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tutorforge 0.1.0");

    std::string format;
    std::string output;

    PipelineArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "Coverage metrics and concept gap of a test suite");
    analyze_args.add_to(*analyze);
    analyze->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

    PipelineArgs feedback_args;
    std::string mode_text;
    auto* feedback_cmd = app.add_subcommand("feedback", "Render the feedback report a student would see");
    feedback_args.add_to(*feedback_cmd);
    feedback_cmd->add_option("--mode", mode_text, "NONE, DETAILED or CONCEPTUAL (default: bundle setting)")
        ->check(CLI::IsMember({"NONE", "DETAILED", "CONCEPTUAL"}, CLI::ignore_case));
    feedback_cmd->add_option("--format", format, "html, json or text")->check(CLI::IsMember({"html", "json", "text"}));
    feedback_cmd->add_option("-o,--output", output, "Output file (default: stdout)");

    PipelineArgs grade_args;
    std::string weights;
    auto* grade = app.add_subcommand("grade", "Grade a test suite");
    grade_args.add_to(*grade);
    grade->add_option("--weights", weights, "COVERAGE,REDUNDANCY weights, default 0.7,0.3");
    grade->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

    std::string validate_dir;
    auto* validate = app.add_subcommand("validate", "Check that an assignment bundle loads");
    validate->add_option("bundle", validate_dir, "Assignment bundle directory")->required();

    std::string dataset, survey, phase_text = "all";
    auto* stats = app.add_subcommand("stats", "Group comparison tables for a study dataset");
    stats->add_option("dataset", dataset, "Per-submission records CSV")->required();
    stats->add_option("survey", survey, "Survey responses CSV");
    stats->add_option("--phase", phase_text, "pretest, treatment, posttest or all")
        ->check(CLI::IsMember({"pretest", "treatment", "posttest", "all"}, CLI::ignore_case));
    stats->add_option("--format", format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
    stats->add_option("-o,--output", output, "Output file (default: stdout)");

    std::string store_flag, host = "127.0.0.1", static_dir;
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the web service");
    serve->add_option("--store", store_flag, "Data directory (default: $TUTORFORGE_STORE)");
    serve->add_option("--host", host, "Address to bind");
    serve->add_option("--port", port, "Port; 0 picks a free one")->check(CLI::Range(0, 65535));
    serve->add_option("--static", static_dir, "Directory served at /");

    std::string institution, institution_name, admin_id, admin_name;
    auto* bootstrap = app.add_subcommand("bootstrap", "Create the first institution and administrator");
    bootstrap->add_option("--store", store_flag, "Data directory (default: $TUTORFORGE_STORE)");
    bootstrap->add_option("--institution", institution, "Institution id")->required();
    bootstrap->add_option("--institution-name", institution_name, "Display name");
    bootstrap->add_option("--admin", admin_id, "Administrator user id")->required();
    bootstrap->add_option("--admin-name", admin_name, "Display name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Bad usage is an environment problem, not a TutorLang parse error.
        const int code = app.exit(e);
        return code == 0 ? kOk : kEnvironment;
    }

    try {
        if (*validate) {
            const auto bundle = suite::load_bundle(validate_dir);
            std::cout << bundle.id << ": ok (" << bundle.reference_suite.size() << " reference tests, "
                      << bundle.catalog.size() << " coverage entities)\n";
            return kOk;
        }

        if (*analyze || *feedback_cmd || *grade) {
            const auto& args = *analyze ? analyze_args : *feedback_cmd ? feedback_args : grade_args;
            const auto bundle = suite::load_bundle(args.bundle);
            auto input = args.input();
            input.mode = bundle.feedback_mode;
            if (!mode_text.empty()) {
                std::string upper = mode_text;
                for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                input.mode = *suite::parse_feedback_mode(upper);
            }
            if (!weights.empty()) input.grade = parse_weights(weights);
            const auto out = service::run_pipeline(bundle, input);

            if (*analyze) {
                if (format == "text") {
                    write_output(metrics_text(out.analysis.metrics) + gap_text(out.analysis.gap), output);
                } else {
                    nlohmann::ordered_json j{{"bundle", bundle.id}, {"metrics", out.metrics_json()}, {"gap", out.gap_json(bundle)}};
                    write_output(j.dump(2) + "\n", output);
                }
            } else if (*feedback_cmd) {
                if (format == "json") {
                    write_output(out.feedback_json().dump(2) + "\n", output);
                } else if (format == "text") {
                    write_output(feedback::render_text(out.report), output);
                } else {
                    write_output(feedback::render_html(out.report), output);
                }
            } else if (format == "json") {
                nlohmann::ordered_json j{{"grade", out.grade}, {"metrics", out.metrics_json()}};
                write_output(j.dump(2) + "\n", output);
            } else {
                write_output(fixed(out.grade, 2) + "\n", output);
            }
            return kOk;
        }

        if (*stats) {
            std::string text;
            try {
                const auto records = analytics::parse_records_csv(read_text(dataset));
                std::vector<analytics::Phase> phases{analytics::Phase::Pretest, analytics::Phase::Treatment,
                                                     analytics::Phase::Posttest};
                if (phase_text != "all") {
                    std::string upper = phase_text;
                    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                    phases = {*analytics::parse_phase(upper)};
                }
                std::vector<analytics::GroupStats> tables;
                for (const auto phase : phases) tables.push_back(analytics::group_summary(records, phase));
                if (!survey.empty()) tables.push_back(analytics::survey_summary(analytics::parse_survey_csv(read_text(survey))));
                for (std::size_t i = 0; i < tables.size(); ++i) {
                    if (format == "csv") {
                        text += (i ? "\n# " : "# ") + tables[i].title + "\n" + analytics::export_csv(tables[i]);
                    } else {
                        text += (i ? "\n" : "") + analytics::export_text(tables[i]);
                    }
                }
            } catch (const analytics::DataError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kInput;
            } catch (const analytics::InsufficientData& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kInput;
            }
            write_output(text, output);
            return kOk;
        }

        if (*bootstrap) {
            service::Platform platform(std::make_unique<service::FileStore>(store_path(store_flag)));
            const auto issued = platform.bootstrap(institution, institution_name.empty() ? institution : institution_name,
                                                   admin_id, admin_name);
            std::cout << issued.token << "\n";
            return kOk;
        }

        if (*serve) {
            service::Platform platform(std::make_unique<service::FileStore>(store_path(store_flag)));
            service::HttpOptions options;
            if (!static_dir.empty()) {
                if (!fs::is_directory(static_dir)) throw EnvironmentError("no such directory: " + static_dir);
                options.static_dir = static_dir;
            }
            service::HttpServer server(platform, options);
            const int bound = server.bind(host, port);
            if (bound < 0) throw EnvironmentError("cannot bind " + host + ":" + std::to_string(port));
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "listening on http://" << host << ":" << bound << std::endl;
            server.listen();
            g_server = nullptr;
            return kOk;
        }
    } catch (const lang::ParseError& e) {
        std::cerr << e.path() << ":" << e.line() << ":" << e.column() << ": " << e.detail() << "\n";
        return kInput;
    } catch (const analysis::SubmissionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
        return kInput;
    } catch (const suite::BundleError& e) {
        std::cerr << "invalid bundle (" << suite::bundle_error_kind_name(e.kind()) << "): " << e.what() << "\n";
        for (const auto& d : e.details()) std::cerr << "  " << d << "\n";
        return e.kind() == suite::BundleError::Kind::Io ? kEnvironment : kBundle;
    } catch (const service::ServiceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kEnvironment;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kEnvironment;
    }
    return kOk;
}
