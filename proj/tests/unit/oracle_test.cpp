#include <doctest.h>

#include <chrono>

#include "program_generator.hpp"
#include "reference_tracer.hpp"
#include "tutorforge/lang/entities.hpp"
#include "tutorforge/lang/parser.hpp"
#include "tutorforge/runtime/runtime.hpp"
#include "tutorforge/suite/test_suite.hpp"

using namespace tutorforge;

namespace {

runtime::Verdict to_verdict(oracle::Outcome outcome) {
    switch (outcome) {
        case oracle::Outcome::Pass: return runtime::Verdict::Pass;
        case oracle::Outcome::Fail: return runtime::Verdict::Fail;
        case oracle::Outcome::Error: return runtime::Verdict::Error;
        case oracle::Outcome::Timeout: return runtime::Verdict::Timeout;
    }
    return runtime::Verdict::Error;
}

}  // namespace

TEST_CASE("instrumented coverage matches the reference tracer on random programs") {
    const auto start = std::chrono::steady_clock::now();
    std::size_t compared = 0;
    std::size_t with_conditions = 0;
    for (std::uint64_t seed = 1; seed <= 150; ++seed) {
        CAPTURE(seed);
        const auto generated = oracle::generate_case(seed);
        const auto program = lang::parse_program("gen.tl", generated.program);
        const auto suite = suite::make_suite("gen_test.tl", generated.tests, suite::TestOrigin::Student);
        runtime::ExecutionLimits limits;
        limits.max_steps = 200'000;
        const auto results = runtime::run_suite(program, suite, limits);
        REQUIRE(results.size() == suite.size());
        for (std::size_t i = 0; i < results.size(); ++i) {
            CAPTURE(suite.tests[i].name);
            const auto traced = oracle::trace_test(program, *suite.tests[i].decl, limits.max_steps,
                                                   limits.max_call_depth);
            CHECK(results[i].verdict == to_verdict(traced.outcome));
            CHECK(results[i].coverage.covered == traced.coverage);
            ++compared;
            for (const auto& e : traced.coverage) {
                if (e.kind == lang::EntityKind::ConditionOutcome) {
                    ++with_conditions;
                    break;
                }
            }
        }
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(compared >= 100);
    CHECK(with_conditions > 0);
    CHECK(elapsed < std::chrono::seconds(60));
}
