#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tutorforge/suite/bundle.hpp"

namespace oracle {

struct RandomBundle {
    tutorforge::suite::AssignmentBundle bundle;
    std::vector<std::string> test_names;     // reference test names
    std::vector<std::string> test_sources;   // one declaration per test, without annotation
};

/// A bundle built around a generated program and test file. Each reference
/// test carries 1-3 random default-taxonomy concepts. The coverage gate of
/// parse_bundle is skipped, so reference coverage may be partial.
RandomBundle make_random_bundle(std::uint64_t seed, tutorforge::suite::FeedbackMode mode);

}  // namespace oracle
