#include "tutorforge/feedback/feedback.hpp"

#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace tutorforge::feedback {

namespace {

using lang::CoverageEntity;
using lang::EntityKind;

// Index of the program nodes that own branch arms and condition atoms.
struct NodeIndex {
    std::map<lang::NodeId, const lang::Stmt*> guards;
    std::map<std::pair<lang::NodeId, std::uint32_t>, const lang::Expr*> atoms;

    explicit NodeIndex(const lang::SourceProgram& program) {
        for (const auto& g : program.globals) visit(*g);
        for (const auto& fn : program.functions) {
            for (const auto& s : fn.body) visit(*s);
        }
    }

    void visit(const lang::Stmt& s) {
        if (s.is_guarded()) guards.emplace(s.id, &s);
        if (s.init) visit(*s.init);
        if (s.step) visit(*s.step);
        if (s.index) visit(*s.index);
        if (s.value) visit(*s.value);
        for (const auto& c : s.body) visit(*c);
        for (const auto& c : s.alternative) visit(*c);
    }

    void visit(const lang::Expr& e) {
        if (e.atom_index >= 0) atoms.emplace(std::make_pair(e.condition_owner, static_cast<std::uint32_t>(e.atom_index)), &e);
        for (const auto& o : e.operands) visit(*o);
    }
};

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string format_pct(double pct) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(1);
    out << pct;
    return out.str();
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        out.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

DetailedPayload build_detailed(const AnnotatedSource& source, const analysis::MetricsRecord& metrics,
                               std::span<const runtime::TestRunResult> results) {
    const auto& program = source.program;
    const auto& catalog = source.catalog;
    const auto& covered = source.covered;
    DetailedPayload out;
    out.totals = metrics;

    // Lines that carry an uncovered arm or outcome are only partially covered.
    std::set<std::pair<lang::FileIndex, std::uint32_t>> incomplete;
    for (const auto* set : {&catalog.branch_arms, &catalog.condition_outcomes}) {
        for (const auto& e : *set) {
            if (!covered.contains(e)) incomplete.emplace(e.file, e.line);
        }
    }

    for (lang::FileIndex f = 0; f < program.files.size(); ++f) {
        AnnotatedFile file;
        file.path = program.files[f].path;
        if (source.show_source) file.source = program.files[f].text;
        for (const auto& e : catalog.lines) {
            if (e.file != f) continue;
            AnnotatedLine line;
            line.line = e.line;
            if (!covered.contains(e)) {
                line.status = LineStatus::Uncovered;
            } else {
                line.status = incomplete.contains({e.file, e.line}) ? LineStatus::Partial : LineStatus::Covered;
            }
            if (source.show_source) line.text = std::string(program.line_text(e.file, e.line));
            file.lines.push_back(std::move(line));
        }
        out.files.push_back(std::move(file));
    }

    const NodeIndex index(program);
    std::map<std::tuple<lang::FileIndex, std::uint32_t, lang::NodeId>, BranchRow> branches;
    for (const auto& e : catalog.branch_arms) {
        auto& row = branches[{e.file, e.line, e.owner}];
        row.file = program.file_path(e.file);
        row.line = e.line;
        if (source.show_source) {
            if (const auto it = index.guards.find(e.owner); it != index.guards.end()) {
                row.guard = std::string(program.source_text(it->second->value->span));
            }
        }
        (e.outcome ? row.true_hit : row.false_hit) = covered.contains(e);
    }
    for (auto& [key, row] : branches) out.branches.push_back(std::move(row));

    std::map<std::tuple<lang::FileIndex, std::uint32_t, lang::NodeId, std::uint32_t>, ConditionRow> conditions;
    for (const auto& e : catalog.condition_outcomes) {
        auto& row = conditions[{e.file, e.line, e.owner, e.atom}];
        row.file = program.file_path(e.file);
        row.line = e.line;
        row.atom = e.atom;
        if (source.show_source) {
            if (const auto it = index.atoms.find({e.owner, e.atom}); it != index.atoms.end()) {
                row.text = std::string(program.source_text(it->second->span));
            }
        }
        (e.outcome ? row.true_hit : row.false_hit) = covered.contains(e);
    }
    for (auto& [key, row] : conditions) out.conditions.push_back(std::move(row));

    for (const auto& r : results) {
        if (r.verdict != runtime::Verdict::Pass) {
            out.failing_tests.push_back({r.test_name, std::string(runtime::verdict_name(r.verdict)), r.message});
        }
    }
    return out;
}

ConceptualPayload build_conceptual(const analysis::ConceptGapReport& gap, const suite::ConceptTaxonomy& taxonomy,
                                   std::string_view bundle_id) {
    ConceptualPayload out;
    out.complete = gap.empty();
    for (const auto& g : gap.gap_concepts) {
        const auto* tag = taxonomy.find(g.concept_id);
        if (!tag) throw std::logic_error("concept '" + g.concept_id + "' is not in the taxonomy");
        ConceptCard card;
        card.id = tag->id;
        card.title = tag->title;
        card.explanation = tag->explanation;
        card.missing_tests = g.missing_tests;
        for (const auto& r : tag->resources) card.resources.push_back({r.label, resource_href(bundle_id, r.url), r.kind});
        out.cards.push_back(std::move(card));
    }
    return out;
}

constexpr std::string_view kStyle = R"(body{font-family:system-ui,sans-serif;margin:2em;color:#1d1d1f}
table{border-collapse:collapse;margin:1em 0}td,th{border:1px solid #ccc;padding:.25em .6em;text-align:left}
pre.source{font-family:ui-monospace,monospace;line-height:1.35}
.ln{display:inline-block;width:3em;color:#888;text-align:right;margin-right:1em}
.covered{background:#d8f5d0}.uncovered{background:#f9d0d0}.partial{background:#fbefc4}
.hit{color:#1a7f37}.miss{color:#b42318;font-weight:bold}
.card{border:1px solid #ccc;border-radius:6px;padding:1em;margin:1em 0;max-width:40em}
.card h2{margin-top:0}.done{border-color:#1a7f37}
footer{margin-top:2em;border-top:1px solid #ccc;padding-top:.5em}
)";

std::string html_head(const std::string& title) {
    return "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" + escape_html(title) +
           "</title>\n<style>\n" + std::string(kStyle) + "</style>\n</head>\n<body>\n";
}

std::string receipt_html(const Receipt& r) {
    std::ostringstream out;
    out << "<section class=\"receipt\">\n<p>Submission " << escape_html(r.submission_id) << ", attempt " << r.attempt
        << ", received " << escape_html(r.timestamp) << ".</p>\n"
        << "<p>Tests: " << r.total_tests << " run, " << r.passed << " passed, " << r.failed << " failed, " << r.errors
        << " errors, " << r.timeouts << " timed out.</p>\n</section>\n";
    return out.str();
}

const char* hit(bool h) { return h ? "<td class=\"hit\">hit</td>" : "<td class=\"miss\">missed</td>"; }

}  // namespace

Receipt make_receipt(std::string submission_id, std::string timestamp, std::uint32_t attempt,
                     std::span<const runtime::TestRunResult> results) {
    Receipt r;
    r.submission_id = std::move(submission_id);
    r.timestamp = std::move(timestamp);
    r.attempt = attempt;
    r.total_tests = results.size();
    for (const auto& res : results) {
        switch (res.verdict) {
            case runtime::Verdict::Pass: ++r.passed; break;
            case runtime::Verdict::Fail: ++r.failed; break;
            case runtime::Verdict::Error: ++r.errors; break;
            case runtime::Verdict::Timeout: ++r.timeouts; break;
        }
    }
    return r;
}

std::string_view line_status_name(LineStatus status) {
    switch (status) {
        case LineStatus::Covered: return "covered";
        case LineStatus::Uncovered: return "uncovered";
        case LineStatus::Partial: return "partial";
    }
    return "?";
}

std::string resource_href(std::string_view bundle_id, const std::string& url) {
    switch (suite::resource_scheme(url)) {
        case suite::ResourceScheme::External: return url;
        case suite::ResourceScheme::BuiltIn:
            return "/concepts/" + url.substr(suite::builtin_concept_url("").size());
        case suite::ResourceScheme::BundleFile: break;
    }
    return "/assignments/" + std::string(bundle_id) + "/files/" + url;
}

FeedbackReport render_feedback(FeedbackMode mode, const Receipt& receipt, const analysis::MetricsRecord& metrics,
                               const analysis::ConceptGapReport& gap, const suite::ConceptTaxonomy& taxonomy,
                               std::string_view bundle_id, const AnnotatedSource* source,
                               std::span<const runtime::TestRunResult> results) {
    FeedbackReport report;
    report.mode = mode;
    report.receipt = receipt;
    switch (mode) {
        case FeedbackMode::None: break;
        case FeedbackMode::Detailed:
            if (!source) throw std::logic_error("DETAILED feedback needs annotated source");
            report.detailed = build_detailed(*source, metrics, results);
            break;
        case FeedbackMode::Conceptual: report.conceptual = build_conceptual(gap, taxonomy, bundle_id); break;
    }
    return report;
}

FeedbackReport feedback_for_submission(const suite::AssignmentBundle& bundle, const analysis::SubmissionAnalysis& analysis,
                                       const lang::SourceProgram* student_program, FeedbackMode mode,
                                       const Receipt& receipt) {
    const auto& program = analysis::analyzed_program(bundle, student_program);
    const bool show = analysis.development || bundle.source_visibility == suite::SourceVisibility::WhiteBox;
    const AnnotatedSource source{program, analysis.catalog, runtime::union_coverage(analysis.results), show};
    return render_feedback(mode, receipt, analysis.metrics, analysis.gap, bundle.taxonomy, bundle.id, &source,
                           analysis.results);
}

nlohmann::ordered_json receipt_to_json(const Receipt& r) {
    return {{"submission_id", r.submission_id},
            {"timestamp", r.timestamp},
            {"attempt", r.attempt},
            {"tests",
             {{"total", r.total_tests}, {"passed", r.passed}, {"failed", r.failed}, {"errors", r.errors}, {"timeouts", r.timeouts}}}};
}

nlohmann::ordered_json feedback_to_json(const FeedbackReport& report) {
    using nlohmann::ordered_json;
    ordered_json out{{"mode", suite::feedback_mode_name(report.mode)}, {"receipt", receipt_to_json(report.receipt)}};
    if (report.detailed) {
        const auto& d = *report.detailed;
        auto files = ordered_json::array();
        for (const auto& f : d.files) {
            auto lines = ordered_json::array();
            for (const auto& l : f.lines) {
                ordered_json line{{"line", l.line}, {"status", line_status_name(l.status)}};
                if (l.text) line["text"] = *l.text;
                lines.push_back(std::move(line));
            }
            ordered_json file{{"path", f.path}, {"lines", lines}};
            if (f.source) file["source"] = *f.source;
            files.push_back(std::move(file));
        }
        auto branches = ordered_json::array();
        for (const auto& b : d.branches) {
            ordered_json row{{"file", b.file}, {"line", b.line}};
            if (b.guard) row["guard"] = *b.guard;
            row["true"] = b.true_hit;
            row["false"] = b.false_hit;
            branches.push_back(std::move(row));
        }
        auto conditions = ordered_json::array();
        for (const auto& c : d.conditions) {
            ordered_json row{{"file", c.file}, {"line", c.line}, {"atom", c.atom}};
            if (c.text) row["text"] = *c.text;
            row["true"] = c.true_hit;
            row["false"] = c.false_hit;
            conditions.push_back(std::move(row));
        }
        auto failing = ordered_json::array();
        for (const auto& t : d.failing_tests) failing.push_back({{"name", t.name}, {"verdict", t.verdict}, {"message", t.message}});
        out["detailed"] = {{"totals", analysis::metrics_to_json(d.totals)},
                           {"files", files},
                           {"branches", branches},
                           {"conditions", conditions},
                           {"failing_tests", failing}};
    }
    if (report.conceptual) {
        auto cards = ordered_json::array();
        for (const auto& c : report.conceptual->cards) {
            auto resources = ordered_json::array();
            for (const auto& r : c.resources) {
                resources.push_back({{"label", r.label}, {"href", r.href}, {"kind", suite::resource_kind_name(r.kind)}});
            }
            cards.push_back({{"id", c.id},
                             {"title", c.title},
                             {"explanation", c.explanation},
                             {"missing_tests", c.missing_tests},
                             {"resources", resources}});
        }
        out["conceptual"] = {{"complete", report.conceptual->complete}, {"cards", cards}};
    }
    return out;
}

std::string render_detailed_html(const FeedbackReport& report) {
    if (report.mode != FeedbackMode::Detailed || !report.detailed) {
        throw std::invalid_argument("render_detailed_html needs a DETAILED report");
    }
    const auto& d = *report.detailed;
    std::ostringstream out;
    out << html_head("Coverage report") << "<h1>Coverage report</h1>\n" << receipt_html(report.receipt);
    for (const auto& f : d.files) {
        out << "<h2>" << escape_html(f.path) << "</h2>\n<pre class=\"source\">";
        std::map<std::uint32_t, LineStatus> status;
        for (const auto& l : f.lines) status.emplace(l.line, l.status);
        if (f.source) {
            const auto lines = split_lines(*f.source);
            for (std::uint32_t n = 1; n <= lines.size(); ++n) {
                const auto it = status.find(n);
                out << "<span";
                if (it != status.end()) out << " class=\"" << line_status_name(it->second) << "\"";
                out << "><span class=\"ln\">" << n << "</span>" << escape_html(lines[n - 1]) << "</span>\n";
            }
        } else {
            for (const auto& l : f.lines) {
                out << "<span class=\"" << line_status_name(l.status) << "\"><span class=\"ln\">" << l.line
                    << "</span>" << line_status_name(l.status) << "</span>\n";
            }
        }
        out << "</pre>\n";
    }
    out << "<h2>Branches</h2>\n<table class=\"branches\">\n<tr><th>Location</th><th>Guard</th><th>True</th><th>False</th></tr>\n";
    for (const auto& b : d.branches) {
        out << "<tr><td>" << escape_html(b.file) << ":" << b.line << "</td><td><code>" << escape_html(b.guard.value_or(""))
            << "</code></td>" << hit(b.true_hit) << hit(b.false_hit) << "</tr>\n";
    }
    out << "</table>\n<h2>Conditions</h2>\n<table class=\"conditions\">\n"
           "<tr><th>Location</th><th>Condition</th><th>True</th><th>False</th></tr>\n";
    for (const auto& c : d.conditions) {
        out << "<tr><td>" << escape_html(c.file) << ":" << c.line << "</td><td><code>"
            << escape_html(c.text.value_or("condition " + std::to_string(c.atom + 1))) << "</code></td>" << hit(c.true_hit)
            << hit(c.false_hit) << "</tr>\n";
    }
    out << "</table>\n";
    if (!d.failing_tests.empty()) {
        out << "<h2>Tests that did not pass</h2>\n<ul class=\"failing\">\n";
        for (const auto& t : d.failing_tests) {
            out << "<li><code>" << escape_html(t.name) << "</code> " << escape_html(t.verdict);
            if (!t.message.empty()) out << ": " << escape_html(t.message);
            out << "</li>\n";
        }
        out << "</ul>\n";
    }
    const auto& m = d.totals;
    out << "<footer class=\"totals\">\n<p>Line coverage " << format_pct(m.line_pct) << "% (" << m.lines.covered << "/"
        << m.lines.total << "), branch coverage " << format_pct(m.branch_pct) << "% (" << m.branches.covered << "/"
        << m.branches.total << "), condition coverage " << format_pct(m.condition_pct) << "% (" << m.conditions.covered
        << "/" << m.conditions.total << ").</p>\n<p>Redundant tests: " << m.redundant_count << " of " << m.total_tests;
    if (!m.redundant_names.empty()) {
        out << " (";
        for (std::size_t i = 0; i < m.redundant_names.size(); ++i) out << (i ? ", " : "") << escape_html(m.redundant_names[i]);
        out << ")";
    }
    out << ".</p>\n</footer>\n</body>\n</html>\n";
    return out.str();
}

std::string render_conceptual_html(const FeedbackReport& report) {
    if (report.mode != FeedbackMode::Conceptual || !report.conceptual) {
        throw std::invalid_argument("render_conceptual_html needs a CONCEPTUAL report");
    }
    const auto& c = *report.conceptual;
    std::ostringstream out;
    out << html_head("Testing concepts to review") << "<h1>Testing concepts to review</h1>\n"
        << receipt_html(report.receipt);
    if (c.complete) {
        out << "<section class=\"card done\">\n<h2>Every concept is covered</h2>\n"
               "<p>Your tests exercise all the behaviour the instructor's tests do. Well done.</p>\n</section>\n";
    }
    for (const auto& card : c.cards) {
        out << "<section class=\"card\" id=\"" << escape_html(card.id) << "\">\n<h2>" << escape_html(card.title)
            << "</h2>\n<p>" << escape_html(card.explanation) << "</p>\n<p class=\"count\">Missing tests related to this concept: "
            << card.missing_tests << "</p>\n<ul class=\"resources\">\n";
        for (const auto& r : card.resources) {
            out << "<li><a href=\"" << escape_html(r.href) << "\">" << escape_html(r.label) << "</a> ("
                << suite::resource_kind_name(r.kind) << ")</li>\n";
        }
        out << "</ul>\n</section>\n";
    }
    out << "</body>\n</html>\n";
    return out.str();
}

std::string render_receipt_html(const FeedbackReport& report) {
    std::ostringstream out;
    out << html_head("Submission received") << "<h1>Submission received</h1>\n" << receipt_html(report.receipt)
        << "</body>\n</html>\n";
    return out.str();
}

std::string render_html(const FeedbackReport& report) {
    switch (report.mode) {
        case FeedbackMode::Detailed: return render_detailed_html(report);
        case FeedbackMode::Conceptual: return render_conceptual_html(report);
        case FeedbackMode::None: break;
    }
    return render_receipt_html(report);
}

std::string render_text(const FeedbackReport& report) {
    std::ostringstream out;
    const auto& r = report.receipt;
    out << "Submission " << r.submission_id << " attempt " << r.attempt << " at " << r.timestamp << "\n"
        << "Tests: " << r.total_tests << " run, " << r.passed << " passed, " << r.failed << " failed, " << r.errors
        << " errors, " << r.timeouts << " timed out\n";
    if (report.detailed) {
        const auto& d = *report.detailed;
        for (const auto& f : d.files) {
            out << "\n" << f.path << "\n";
            for (const auto& l : f.lines) {
                out << "  " << l.line << "  " << line_status_name(l.status);
                if (l.text) out << "  " << *l.text;
                out << "\n";
            }
        }
        out << "\nBranches\n";
        for (const auto& b : d.branches) {
            out << "  " << b.file << ":" << b.line << "  true " << (b.true_hit ? "hit" : "missed") << ", false "
                << (b.false_hit ? "hit" : "missed");
            if (b.guard) out << "  " << *b.guard;
            out << "\n";
        }
        out << "\nConditions\n";
        for (const auto& c : d.conditions) {
            out << "  " << c.file << ":" << c.line << "  " << c.text.value_or("condition " + std::to_string(c.atom + 1))
                << "  true " << (c.true_hit ? "hit" : "missed") << ", false " << (c.false_hit ? "hit" : "missed") << "\n";
        }
        for (const auto& t : d.failing_tests) out << "\nNot passing: " << t.name << " " << t.verdict << " " << t.message << "\n";
        const auto& m = d.totals;
        out << "\nLine " << format_pct(m.line_pct) << "%  Branch " << format_pct(m.branch_pct) << "%  Condition "
            << format_pct(m.condition_pct) << "%  Redundant " << m.redundant_count << "/" << m.total_tests << "\n";
    }
    if (report.conceptual) {
        if (report.conceptual->complete) out << "\nEvery concept is covered.\n";
        for (const auto& card : report.conceptual->cards) {
            out << "\n" << card.title << " (" << card.missing_tests << " missing)\n  " << card.explanation << "\n";
            for (const auto& res : card.resources) out << "  - " << res.label << ": " << res.href << "\n";
        }
    }
    return out.str();
}

}  // namespace tutorforge::feedback
