#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "bundle_factory.hpp"
#include "tutorforge/feedback/feedback.hpp"
#include "tutorforge/lang/parser.hpp"

using namespace tutorforge;
using feedback::FeedbackMode;

namespace {

const std::filesystem::path kAssignments = std::filesystem::path(TUTORFORGE_SOURCE_DIR) / "assignments";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string without_tests(std::string text, const std::vector<std::string>& names) {
    for (const auto& name : names) {
        const auto at = text.find("test " + name + " {");
        REQUIRE(at != std::string::npos);
        const auto start = text.rfind("//@concepts", at);
        text.erase(start, text.find("\n}\n", at) + 3 - start);
    }
    return text;
}

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto at = haystack.find(needle); at != std::string::npos; at = haystack.find(needle, at + 1)) ++n;
    return n;
}

struct QueueCase {
    suite::AssignmentBundle bundle = suite::load_bundle(kAssignments / "queue");
    analysis::SubmissionAnalysis analysis;

    explicit QueueCase(const std::string& suite_text) {
        analysis = analysis::analyze_submission(
            bundle, suite::make_suite("student_test.tl", suite_text, suite::TestOrigin::Student), nullptr);
    }

    feedback::FeedbackReport report(FeedbackMode mode) const {
        const auto receipt = feedback::make_receipt("s-1", "2026-01-05T10:00:00Z", 1, analysis.results);
        return feedback::feedback_for_submission(bundle, analysis, nullptr, mode, receipt);
    }
};

std::string queue_without_empty_tests() {
    return without_tests(read_file(kAssignments / "queue" / "tests" / "queue_test.tl"),
                         {"dequeue_on_empty_throws", "peek_on_empty_throws"});
}

const char* const kGuardProgram =
    "func g(x: int) -> int {\n"
    "    if (x > 0 && x < 10) {\n"
    "        return 1;\n"
    "    }\n"
    "    return 0;\n"
    "}\n";

feedback::FeedbackReport guard_report(const std::string& tests) {
    const auto program = lang::parse_program("g.tl", kGuardProgram);
    const auto catalog = lang::extract_entities(program);
    const auto results =
        runtime::run_suite(program, suite::make_suite("t.tl", tests, suite::TestOrigin::Student));
    const feedback::AnnotatedSource source{program, catalog, runtime::union_coverage(results), true};
    const auto metrics = analysis::compute_metrics(catalog, results);
    return feedback::render_feedback(FeedbackMode::Detailed, feedback::make_receipt("s", "t", 1, results), metrics, {},
                                     suite::default_taxonomy(), "g", &source, results);
}

}  // namespace

TEST_CASE("NONE mode yields a receipt only") {
    const QueueCase c(queue_without_empty_tests());
    const auto json = feedback::feedback_to_json(c.report(FeedbackMode::None));
    CHECK(json.size() == 2);
    CHECK(json["mode"] == "NONE");
    CHECK(json["receipt"]["tests"]["total"] == 6);
    CHECK(json["receipt"]["tests"]["passed"] == 6);
    const auto text = json.dump();
    CHECK(text.find("pct") == std::string::npos);
    CHECK(text.find("queue.tl") == std::string::npos);
    CHECK(text.find("concept") == std::string::npos);
}

TEST_CASE("CONCEPTUAL mode: cards for the missing concepts with their resources") {
    const QueueCase c(queue_without_empty_tests());
    const auto report = c.report(FeedbackMode::Conceptual);
    REQUIRE(report.conceptual);
    CHECK_FALSE(report.detailed);
    const auto& cards = report.conceptual->cards;
    REQUIRE(cards.size() == 2);
    CHECK(cards[0].id == "boundary-conditions");
    CHECK(cards[1].id == "exception-handling");
    REQUIRE(cards[0].resources.size() == 2);
    CHECK(cards[0].resources[0].href == "/assignments/queue/files/resources/queue-edges.md");
    CHECK(cards[0].resources[1].href == "/concepts/boundary-conditions");

    const auto text = feedback::feedback_to_json(report).dump();
    for (const auto& t : c.bundle.reference_suite.tests) CHECK(text.find(t.name) == std::string::npos);
    CHECK_FALSE(std::regex_search(text, std::regex(R"(\.tl:\d)")));
    CHECK(text.find("line_pct") == std::string::npos);
}

TEST_CASE("DETAILED mode: uncovered throw lines listed with numbers, no concepts") {
    const QueueCase c(queue_without_empty_tests());
    const auto report = c.report(FeedbackMode::Detailed);
    REQUIRE(report.detailed);
    CHECK_FALSE(report.conceptual);
    std::vector<std::uint32_t> uncovered;
    for (const auto& l : report.detailed->files.at(0).lines) {
        if (l.status == feedback::LineStatus::Uncovered) {
            uncovered.push_back(l.line);
            CHECK(l.text.value().find("throw EmptyQueue;") != std::string::npos);
        }
    }
    CHECK(uncovered == std::vector<std::uint32_t>{17, 26});
    const auto text = feedback::feedback_to_json(report).dump();
    for (const auto& concept_tag : suite::default_taxonomy().concepts()) {
        CHECK(text.find(concept_tag.id) == std::string::npos);
    }
    CHECK(text.find("resources") == std::string::npos);
}

TEST_CASE("DETAILED mode hides reference source text for black-box bundles") {
    const auto bundle = suite::load_bundle(kAssignments / "calendar");
    const auto analysis = analysis::analyze_submission(
        bundle, suite::make_suite("s.tl", "test a { assert_true(is_leap(2024)); }\n", suite::TestOrigin::Student), nullptr);
    const auto report = feedback::feedback_for_submission(bundle, analysis, nullptr, FeedbackMode::Detailed,
                                                          feedback::make_receipt("s", "t", 1, analysis.results));
    const auto text = feedback::feedback_to_json(report).dump();
    CHECK(text.find("year % 4") == std::string::npos);
    CHECK(text.find("\"source\"") == std::string::npos);
    CHECK_FALSE(report.detailed->files[0].lines.empty());
    CHECK(feedback::render_detailed_html(report).find("year % 4") == std::string::npos);
}

TEST_CASE("line status distinguishes partial coverage") {
    const auto report = guard_report("test a { g(5); }\n");
    const auto& lines = report.detailed->files[0].lines;
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].status == feedback::LineStatus::Partial);
    CHECK(lines[1].status == feedback::LineStatus::Covered);
    CHECK(lines[2].status == feedback::LineStatus::Uncovered);
}

TEST_CASE("detailed HTML: fully covered program has no uncovered lines") {
    const auto html = feedback::render_detailed_html(guard_report(
        "test a { g(5); }\ntest b { g(-1); }\ntest c { g(10); }\n"));
    CHECK(count(html, "class=\"uncovered\"") == 0);
    CHECK(count(html, "class=\"partial\"") == 0);
    CHECK(count(html, "class=\"covered\"") == 3);
    CHECK(html.find("Line coverage 100.0% (3/3)") != std::string::npos);
}

TEST_CASE("detailed HTML: the 75% example shows x < 10 true hit, false missed") {
    const auto report = guard_report("test a { g(5); }\ntest b { g(-1); }\n");
    REQUIRE(report.detailed->conditions.size() == 2);
    const auto& second = report.detailed->conditions[1];
    CHECK(second.text == "x < 10");
    CHECK(second.true_hit);
    CHECK_FALSE(second.false_hit);
    const auto html = feedback::render_detailed_html(report);
    CHECK(html.find("<td>g.tl:2</td><td><code>x &lt; 10</code></td><td class=\"hit\">hit</td><td class=\"miss\">missed</td>") !=
          std::string::npos);
    CHECK(html.find("condition coverage 75.0% (3/4)") != std::string::npos);
}

TEST_CASE("detailed HTML: empty suite classes every executable line uncovered") {
    const auto html = feedback::render_detailed_html(guard_report(""));
    CHECK(count(html, "class=\"uncovered\"") == 3);
    CHECK(count(html, "class=\"covered\"") == 0);
}

TEST_CASE("conceptual HTML: completion card when nothing is missing") {
    const QueueCase c(read_file(kAssignments / "queue" / "tests" / "queue_test.tl"));
    const auto html = feedback::render_conceptual_html(c.report(FeedbackMode::Conceptual));
    CHECK(count(html, "<section class=\"card") == 1);
    CHECK(html.find("Every concept is covered") != std::string::npos);
}

TEST_CASE("conceptual HTML: cards in count-then-id order with resources, no locations") {
    const QueueCase c(queue_without_empty_tests());
    const auto html = feedback::render_conceptual_html(c.report(FeedbackMode::Conceptual));
    const auto boundary = html.find("id=\"boundary-conditions\"");
    const auto exception = html.find("id=\"exception-handling\"");
    REQUIRE(boundary != std::string::npos);
    REQUIRE(exception != std::string::npos);
    CHECK(boundary < exception);
    CHECK(html.find("href=\"/concepts/boundary-conditions\"") != std::string::npos);
    CHECK(html.find("href=\"/concepts/exception-handling\"") != std::string::npos);
    CHECK_FALSE(std::regex_search(html, std::regex(R"([A-Za-z_]\.tl:\d|line \d)")));
}

TEST_CASE("renderers reject reports of the wrong mode") {
    const QueueCase c(queue_without_empty_tests());
    CHECK_THROWS_AS(feedback::render_detailed_html(c.report(FeedbackMode::Conceptual)), std::invalid_argument);
    CHECK_THROWS_AS(feedback::render_conceptual_html(c.report(FeedbackMode::Detailed)), std::invalid_argument);
    CHECK_THROWS_AS(feedback::render_feedback(FeedbackMode::Detailed, {}, {}, {}, suite::default_taxonomy(), "q", nullptr),
                    std::logic_error);
}

TEST_CASE("rendering is deterministic") {
    for (auto mode : {FeedbackMode::None, FeedbackMode::Detailed, FeedbackMode::Conceptual}) {
        const QueueCase a(queue_without_empty_tests());
        const QueueCase b(queue_without_empty_tests());
        CHECK(feedback::feedback_to_json(a.report(mode)).dump() == feedback::feedback_to_json(b.report(mode)).dump());
        CHECK(feedback::render_html(a.report(mode)) == feedback::render_html(b.report(mode)));
        CHECK(feedback::render_text(a.report(mode)) == feedback::render_text(b.report(mode)));
    }
}

TEST_CASE("property: conceptual reports over random bundles never leak test names or locations") {
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        CAPTURE(seed);
        auto random = oracle::make_random_bundle(seed, FeedbackMode::Conceptual);
        const auto& bundle = random.bundle;
        std::string student;
        for (const auto& src : random.test_sources) {
            if (std::bernoulli_distribution(0.5)(rng)) student += src + "\n";
        }
        const auto analysis = analysis::analyze_submission(
            bundle, suite::make_suite("student_test.tl", student, suite::TestOrigin::Student), nullptr);
        const auto report = feedback::feedback_for_submission(bundle, analysis, nullptr, FeedbackMode::Conceptual,
                                                              feedback::make_receipt("s", "t", 1, analysis.results));
        const auto json = feedback::feedback_to_json(report).dump();
        const auto html = feedback::render_conceptual_html(report);
        for (const auto& name : random.test_names) {
            CHECK(json.find(name) == std::string::npos);
            CHECK(html.find(name) == std::string::npos);
        }
        for (const auto& e : bundle.catalog.all()) {
            const auto token = "gen.tl:" + std::to_string(e.line);
            CHECK(json.find(token) == std::string::npos);
            CHECK(html.find(token) == std::string::npos);
        }
    }
}
