#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tutorforge/lang/ast.hpp"
#include "tutorforge/lang/entities.hpp"
#include "tutorforge/suite/test_suite.hpp"

namespace tutorforge::runtime {

enum class Verdict { Pass, Fail, Error, Timeout };

std::string_view verdict_name(Verdict verdict);

struct ExecutionLimits {
    std::uint64_t max_steps = 1'000'000;
    std::uint32_t max_call_depth = 256;

    /// Throws std::invalid_argument unless both limits are >= 1 and the call
    /// depth fits the interpreter's native stack (<= kMaxCallDepthCap).
    void validate() const;

    static constexpr std::uint32_t kMaxCallDepthCap = 1024;
};

struct CoverageVector {
    lang::EntitySet covered;

    bool subset_of(const lang::EntitySet& other) const;
    bool operator==(const CoverageVector&) const = default;
};

struct TestRunResult {
    std::string test_name;
    Verdict verdict = Verdict::Pass;
    CoverageVector coverage;  // retained for FAIL/ERROR/TIMEOUT as well
    std::string message;
    std::uint64_t steps = 0;

    bool operator==(const TestRunResult&) const = default;
};

/// Runs one test in a fresh interpreter (fresh globals) with coverage recording.
TestRunResult run_test(const lang::SourceProgram& program, const suite::TestCase& test,
                       const ExecutionLimits& limits = {});

/// Runs every test in suite order. Per-test failures are captured in results.
std::vector<TestRunResult> run_suite(const lang::SourceProgram& program, const suite::TestSuite& suite,
                                     const ExecutionLimits& limits = {});

lang::EntitySet union_coverage(std::span<const TestRunResult> results);

}  // namespace tutorforge::runtime
