#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tutorforge/service/platform.hpp"

using namespace tutorforge;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = TUTORFORGE_SOURCE_DIR;
const fs::path kQueue = kRoot / "assignments" / "queue";
const fs::path kPartial = kRoot / "tests" / "data" / "cli" / "queue_partial_test.tl";
const fs::path kGolden = kRoot / "tests" / "golden" / "cli";

struct Run {
    int exit = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string quote(const std::string& arg) {
    std::string out = "'";
    for (char c : arg) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

Run run(const std::vector<std::string>& args, const std::string& env = {}) {
    const auto err_path = fs::temp_directory_path() / ("tutorforge-cli-err-" + std::to_string(::getpid()));
    std::string command = env.empty() ? "" : env + " ";
    command += quote(TUTORFORGE_CLI);
    for (const auto& a : args) command += " " + quote(a);
    command += " 2>" + quote(err_path.string());
    Run result;
    FILE* pipe = ::popen(command.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buffer{};
    while (const auto n = std::fread(buffer.data(), 1, buffer.size(), pipe)) result.out.append(buffer.data(), n);
    const int status = ::pclose(pipe);
    result.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.err = read_file(err_path);
    fs::remove(err_path);
    return result;
}

void check_golden(const std::string& name, const std::string& actual) {
    const auto path = kGolden / name;
    if (std::getenv("TUTORFORGE_UPDATE_GOLDEN")) {
        std::ofstream(path, std::ios::binary) << actual;
        return;
    }
    const auto expected = read_file(path);
    REQUIRE_MESSAGE(!expected.empty(), "missing golden file " << path);
    CHECK_MESSAGE(actual == expected, "output differs from " << path);
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("tutorforge-cli-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("analyze: reference suite, empty suite, malformed suite") {
    const auto full = run({"analyze", kQueue.string(), (kQueue / "tests" / "queue_test.tl").string()});
    REQUIRE(full.exit == 0);
    const auto j = nlohmann::json::parse(full.out);
    CHECK(j.at("metrics").at("line_pct") == 100.0);
    CHECK(j.at("metrics").at("branch_pct") == 100.0);
    CHECK(j.at("metrics").at("condition_pct") == 100.0);
    CHECK(j.at("gap").at("missing_tests").empty());

    const auto empty_path = scratch("empty_test.tl");
    std::ofstream(empty_path) << "// nothing yet\n";
    const auto empty = run({"analyze", kQueue.string(), empty_path.string()});
    REQUIRE(empty.exit == 0);
    const auto e = nlohmann::json::parse(empty.out);
    CHECK(e.at("metrics").at("line_pct") == 0.0);
    CHECK(e.at("gap").at("missing_tests").size() == 8);

    const auto bad_path = scratch("bad_test.tl");
    std::ofstream(bad_path) << "test x {\n    assert_eq(1, );\n}\n";
    const auto bad = run({"analyze", kQueue.string(), bad_path.string()});
    CHECK(bad.exit == 2);
    CHECK(bad.err.rfind("bad_test.tl:2:", 0) == 0);
    CHECK(bad.out.empty());
}

TEST_CASE("exit codes: bundle invalid, missing files, bad usage, mode mismatch") {
    const auto bundle = scratch("broken_bundle");
    fs::remove_all(bundle);
    fs::copy(kQueue, bundle, fs::copy_options::recursive);
    std::ofstream(bundle / "manifest.json") << "{\"id\": \"queue\"";
    CHECK(run({"validate", bundle.string()}).exit == 3);
    CHECK(run({"analyze", bundle.string(), kPartial.string()}).exit == 3);
    CHECK(run({"validate", kQueue.string()}).exit == 0);

    CHECK(run({"analyze", kQueue.string(), "/nonexistent/suite.tl"}).exit == 1);
    CHECK(run({"analyze", "/nonexistent/bundle", kPartial.string()}).exit == 1);
    CHECK(run({"feedback", kQueue.string(), kPartial.string(), "--mode", "LOUD"}).exit == 1);
    CHECK(run({}).exit == 1);

    const auto calculator = kRoot / "assignments" / "calculator";
    const auto missing_program = run({"analyze", calculator.string(), (calculator / "tests" / "calculator_test.tl").string()});
    CHECK(missing_program.exit == 2);
    CHECK_FALSE(missing_program.err.empty());
}

TEST_CASE("grade: perfect, empty, partial and custom weights") {
    const auto calculator = kRoot / "assignments" / "calculator";
    CHECK(run({"grade", calculator.string(), (calculator / "tests" / "calculator_test.tl").string(), "--program",
               (calculator / "reference" / "calculator.tl").string()})
              .out == "100.00\n");
    const auto empty_path = scratch("empty_test.tl");
    std::ofstream(empty_path) << "";
    CHECK(run({"grade", kQueue.string(), empty_path.string()}).out == "0.00\n");

    // 13/16 lines, 5/8 arms, 3/4 outcomes, 1 of 4 tests redundant.
    const double coverage = (100.0 * 13 / 16 + 100.0 * 5 / 8 + 100.0 * 3 / 4) / 3;
    const auto partial = run({"grade", kQueue.string(), kPartial.string(), "--format", "json"});
    REQUIRE(partial.exit == 0);
    CHECK(nlohmann::json::parse(partial.out).at("grade").get<double>() ==
          doctest::Approx(0.7 * coverage + 0.3 * 100 * 0.75).epsilon(1e-12));
    const auto weighted = run({"grade", kQueue.string(), kPartial.string(), "--weights", "1,0", "--format", "json"});
    CHECK(nlohmann::json::parse(weighted.out).at("grade").get<double>() == doctest::Approx(coverage).epsilon(1e-12));
    CHECK(run({"grade", kQueue.string(), kPartial.string(), "--weights", "0.9,0.3"}).exit == 1);
}

TEST_CASE("feedback golden files for the three modes") {
    for (const char* mode : {"NONE", "DETAILED", "CONCEPTUAL"}) {
        const auto html = run({"feedback", kQueue.string(), kPartial.string(), "--mode", mode});
        REQUIRE(html.exit == 0);
        std::string lower = mode;
        for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        check_golden("feedback_" + lower + ".html", html.out);
        const auto json = run({"feedback", kQueue.string(), kPartial.string(), "--mode", mode, "--format", "json"});
        check_golden("feedback_" + lower + ".json", json.out);
    }
    const auto out_file = scratch("report.html");
    CHECK(run({"feedback", kQueue.string(), kPartial.string(), "-o", out_file.string()}).exit == 0);
    CHECK(read_file(out_file) == read_file(kGolden / "feedback_conceptual.html"));
}

TEST_CASE("CLI and service give identical feedback for identical input") {
    // The service names the uploaded suite submission_test.tl.
    const auto suite_path = scratch("submission_test.tl");
    fs::copy_file(kPartial, suite_path, fs::copy_options::overwrite_existing);

    service::Platform platform(std::make_unique<service::MemoryStore>(), [] { return std::string("2026-01-05T10:00:00Z"); });
    const auto admin = platform.authenticate(platform.bootstrap("uni", "", "root", "").token);
    const auto prof = platform.authenticate(platform.create_user(admin, {"prof", "", service::Role::Instructor}).token);
    const auto ann = platform.authenticate(platform.create_user(admin, {"ann", "", service::Role::Student}).token);
    platform.register_bundle(prof, suite::read_bundle_files(kQueue));
    platform.upsert_course(prof, {{"id", "c"}, {"roster", {"ann"}}, {"assignments", {"queue"}}});

    for (const auto mode : {suite::FeedbackMode::None, suite::FeedbackMode::Detailed, suite::FeedbackMode::Conceptual}) {
        platform.set_feedback_mode(prof, "c", "queue", mode);
        const auto record = platform.submit(ann, {"queue", std::nullopt, read_file(kPartial), std::nullopt});
        const auto cli = run({"feedback", kQueue.string(), suite_path.string(), "--format", "json", "--mode",
                              std::string(suite::feedback_mode_name(mode)), "--submission-id", record.id, "--timestamp",
                              record.timestamp});
        REQUIRE(cli.exit == 0);
        auto from_cli = nlohmann::ordered_json::parse(cli.out);
        // Attempt numbers come from the platform history.
        from_cli["receipt"]["attempt"] = record.attempt;
        CHECK(from_cli.dump() == record.feedback->dump());

        const auto metrics = run({"analyze", kQueue.string(), suite_path.string()});
        CHECK(nlohmann::ordered_json::parse(metrics.out).at("metrics").dump() == record.metrics->dump());
    }
}

TEST_CASE("stats: tables, CSV golden file, symmetric data") {
    const auto data = kRoot / "tests" / "data" / "study";
    const auto text = run({"stats", (data / "records.csv").string(), (data / "survey.csv").string()});
    REQUIRE(text.exit == 0);
    check_golden("stats.txt", text.out);
    const auto csv = run({"stats", (data / "records.csv").string(), (data / "survey.csv").string(), "--format", "csv"});
    REQUIRE(csv.exit == 0);
    check_golden("stats.csv", csv.out);
    CHECK(text.out.find("35.0") != std::string::npos);
    CHECK(text.out.find("35.7") != std::string::npos);

    const auto symmetric = run({"stats", (data / "symmetric.csv").string(), "--phase", "treatment", "--format", "csv"});
    REQUIRE(symmetric.exit == 0);
    std::istringstream lines(symmetric.out);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("variable,", 0) == 0) continue;
        ++rows;
        CHECK_MESSAGE(line.find(",1.000000,no") != std::string::npos, line);
    }
    CHECK(rows == 5);

    const auto bad = scratch("bad.csv");
    std::ofstream(bad) << "student_id,group\nx,A\n";
    CHECK(run({"stats", bad.string()}).exit == 2);
}

TEST_CASE("serve and bootstrap need a usable store") {
    CHECK(run({"serve", "--store", "/proc/tutorforge-no-store", "--port", "0"}).exit == 1);
    CHECK(run({"bootstrap", "--institution", "u", "--admin", "a"}, "TUTORFORGE_STORE=").exit == 1);
    const auto store = scratch("store");
    fs::remove_all(store);
    const auto first = run({"bootstrap", "--institution", "u", "--admin", "a"}, "TUTORFORGE_STORE=" + quote(store.string()));
    CHECK(first.exit == 0);
    CHECK(first.out.rfind("tf_", 0) == 0);
    CHECK(run({"bootstrap", "--store", store.string(), "--institution", "u", "--admin", "a"}).exit == 1);
    fs::remove_all(store.parent_path());
}
