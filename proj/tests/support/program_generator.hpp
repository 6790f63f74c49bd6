#pragma once

#include <cstdint>
#include <string>

namespace oracle {

struct GeneratedCase {
    std::string program;  // TutorLang program text
    std::string tests;    // TutorLang test file text
    int statements = 0;   // statement count of the program
    int test_count = 0;
};

/// Random terminating TutorLang program with at most `max_statements`
/// statements, plus a random test file that calls its functions.
GeneratedCase generate_case(std::uint64_t seed, int max_statements = 50);

}  // namespace oracle
