#include "bundle_factory.hpp"

#include <random>

#include "program_generator.hpp"
#include "tutorforge/lang/parser.hpp"

namespace oracle {

using namespace tutorforge;

RandomBundle make_random_bundle(std::uint64_t seed, suite::FeedbackMode mode) {
    const auto generated = generate_case(seed);
    std::mt19937_64 rng(seed * 7919 + 1);
    const auto& concepts = suite::default_taxonomy().concepts();

    RandomBundle out;
    std::string annotated;
    std::size_t at = 0;
    int index = 0;
    while ((at = generated.tests.find("test t", at)) != std::string::npos) {
        const auto end = generated.tests.find("\n}\n", at) + 3;
        std::string decl = generated.tests.substr(at, end - at);
        const std::string name = "reference_case_" + std::to_string(index++);
        decl.replace(0, decl.find(' ', 5), "test " + name);
        std::string tags;
        const int count = std::uniform_int_distribution<int>(1, 3)(rng);
        for (int c = 0; c < count; ++c) {
            const auto& id = concepts[std::uniform_int_distribution<std::size_t>(0, concepts.size() - 1)(rng)].id;
            tags += (c ? ", " : "") + id;
        }
        annotated += "//@concepts: " + tags + "\n" + decl + "\n";
        out.test_names.push_back(name);
        out.test_sources.push_back(decl);
        at = end;
    }

    auto& b = out.bundle;
    b.id = "random-" + std::to_string(seed);
    b.title = "Random " + std::to_string(seed);
    b.feedback_mode = mode;
    b.source_visibility = suite::SourceVisibility::WhiteBox;
    b.reference_program = lang::parse_program("gen.tl", generated.program);
    b.reference_suite = suite::make_suite("gen_test.tl", annotated, suite::TestOrigin::Reference);
    b.catalog = lang::extract_entities(b.reference_program);
    b.reference_results = runtime::run_suite(b.reference_program, b.reference_suite);
    b.taxonomy = suite::default_taxonomy();
    return out;
}

}  // namespace oracle
