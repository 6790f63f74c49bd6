// Python bindings. Structured results cross the boundary as JSON text and
// are decoded by the pure-Python wrapper in tutorforge/__init__.py.

#include <pybind11/pybind11.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>

#include <array>
#include <functional>
#include <memory>

#include "tutorforge/service/pipeline.hpp"

namespace py = pybind11;
using namespace tutorforge;

namespace {

suite::FeedbackMode mode_or(const std::optional<std::string>& text, suite::FeedbackMode fallback) {
    if (!text) return fallback;
    const auto mode = suite::parse_feedback_mode(*text);
    if (!mode) throw std::invalid_argument("unknown feedback mode '" + *text + "'");
    return *mode;
}

struct Bundle {
    suite::AssignmentBundle bundle;
};

std::string run(const Bundle& b, const std::vector<std::pair<std::string, std::string>>& suites,
                const std::optional<std::pair<std::string, std::string>>& program, const std::optional<std::string>& mode,
                double w_coverage, double w_redundancy, std::uint64_t max_steps, std::uint32_t max_depth) {
    service::PipelineInput input;
    for (const auto& [path, text] : suites) input.suites.push_back({path, text});
    if (program) input.program = lang::SourceInput{program->first, program->second};
    input.mode = mode_or(mode, b.bundle.feedback_mode);
    input.submission_id = "local";
    input.timestamp = "1970-01-01T00:00:00Z";
    input.grade = {w_coverage, w_redundancy};
    input.limits.max_steps = max_steps;
    input.limits.max_call_depth = max_depth;
    service::PipelineOutput out;
    {
        py::gil_scoped_release release;
        out = service::run_pipeline(b.bundle, input);
    }
    nlohmann::ordered_json j{{"metrics", out.metrics_json()},
                             {"gap", out.gap_json(b.bundle)},
                             {"feedback", out.feedback_json()},
                             {"grade", out.grade},
                             {"results", out.results_json()},
                             {"html", feedback::render_html(out.report)},
                             {"text", feedback::render_text(out.report)}};
    return j.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "TutorForge core bindings";

    // Exception types carry the structured fields of their C++ counterparts.
    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<std::array<py::object, 4>> errors;
    errors.call_once_and_store_result([&] {
        return std::array<py::object, 4>{py::exception<lang::ParseError>(m, "ParseError", PyExc_ValueError),
                                         py::exception<suite::BundleError>(m, "BundleError", PyExc_ValueError),
                                         py::exception<analysis::SubmissionError>(m, "SubmissionError", PyExc_ValueError),
                                         py::exception<analytics::DataError>(m, "DataError", PyExc_ValueError)};
    });
    py::register_exception_translator([](std::exception_ptr p) {
        const auto& types = errors.get_stored();
        auto raise = [](const py::object& type, const std::exception& e, const std::function<void(py::object&)>& fill) {
            py::object err = type(e.what());
            fill(err);
            py::set_error(type, err);
        };
        try {
            if (p) std::rethrow_exception(p);
        } catch (const lang::ParseError& e) {
            raise(types[0], e, [&](py::object& err) {
                err.attr("path") = e.path();
                err.attr("line") = e.line();
                err.attr("column") = e.column();
            });
        } catch (const suite::BundleError& e) {
            raise(types[1], e, [&](py::object& err) {
                err.attr("kind") = std::string(suite::bundle_error_kind_name(e.kind()));
                err.attr("details") = e.details();
            });
        } catch (const analysis::SubmissionError& e) {
            raise(types[2], e, [&](py::object& err) { err.attr("details") = e.details(); });
        } catch (const analytics::DataError& e) {
            raise(types[3], e, [](py::object&) {});
        }
    });

    py::class_<Bundle, std::shared_ptr<Bundle>>(m, "Bundle")
        .def_property_readonly("id", [](const Bundle& b) { return b.bundle.id; })
        .def_property_readonly("title", [](const Bundle& b) { return b.bundle.title; })
        .def_property_readonly("mode", [](const Bundle& b) { return std::string(suite::mode_name(b.bundle.mode)); })
        .def_property_readonly("feedback_mode",
                               [](const Bundle& b) { return std::string(suite::feedback_mode_name(b.bundle.feedback_mode)); })
        .def_property_readonly("source_visibility",
                               [](const Bundle& b) { return std::string(suite::source_visibility_name(b.bundle.source_visibility)); })
        .def_property_readonly("reference_tests", [](const Bundle& b) {
            std::vector<std::string> names;
            for (const auto& t : b.bundle.reference_suite.tests) names.push_back(t.name);
            return names;
        })
        .def_property_readonly("manifest_json", [](const Bundle& b) { return suite::manifest_to_json(b.bundle).dump(); })
        .def("__repr__", [](const Bundle& b) { return "<tutorforge.Bundle " + b.bundle.id + ">"; });

    m.def("load_bundle", [](const std::string& path) { return std::make_shared<Bundle>(Bundle{suite::load_bundle(path)}); }, py::arg("path"));
    m.def("parse_bundle", [](const std::map<std::string, std::string>& files) { return std::make_shared<Bundle>(Bundle{suite::parse_bundle(files)}); },
          py::arg("files"));
    m.def("run", &run, py::arg("bundle"), py::arg("suites"), py::arg("program"), py::arg("mode"), py::arg("w_coverage"),
          py::arg("w_redundancy"), py::arg("max_steps"), py::arg("max_depth"));

    m.def("compute_grade", [](const std::string& metrics_json, double w_coverage, double w_redundancy) {
        analytics::GradeConfig config{w_coverage, w_redundancy};
        return analytics::compute_grade(analysis::metrics_from_json(nlohmann::json::parse(metrics_json)), config);
    });
    m.def("welch_test", [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = analytics::welch_test(a, b);
        return py::dict(py::arg("n_a") = r.n_a, py::arg("n_b") = r.n_b, py::arg("mean_a") = r.mean_a,
                        py::arg("mean_b") = r.mean_b, py::arg("var_a") = r.var_a, py::arg("var_b") = r.var_b,
                        py::arg("t") = r.t, py::arg("df") = r.df, py::arg("p") = r.p);
    });
    m.def("group_summary", [](const std::string& records_csv, const std::string& phase, const std::string& format) {
        const auto parsed = analytics::parse_phase(phase);
        if (!parsed) throw std::invalid_argument("unknown phase '" + phase + "'");
        const auto stats = analytics::group_summary(analytics::parse_records_csv(records_csv), *parsed);
        return format == "csv" ? analytics::export_csv(stats) : analytics::export_text(stats);
    });
    m.def("survey_summary", [](const std::string& survey_csv, const std::string& format) {
        const auto stats = analytics::survey_summary(analytics::parse_survey_csv(survey_csv));
        return format == "csv" ? analytics::export_csv(stats) : analytics::export_text(stats);
    });
}
