#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <string_view>

namespace tutorforge::lang::detail {

struct BuiltinInfo {
    std::string_view name;
    std::size_t min_args;
    std::size_t max_args;
    bool test_only;
};

inline constexpr std::size_t kVariadic = std::numeric_limits<std::size_t>::max();

inline constexpr std::array<BuiltinInfo, 11> kBuiltins{{
    {"len", 1, 1, false},
    {"push", 2, 2, false},
    {"slice", 3, 3, false},
    {"substr", 3, 3, false},
    {"char_at", 2, 2, false},
    {"to_int", 1, 1, false},
    {"str", 1, 1, false},
    {"call", 1, kVariadic, false},
    {"assert_eq", 2, 2, true},
    {"assert_true", 1, 1, true},
    {"assert_throws", 2, 2, true},
}};

inline const BuiltinInfo* find_builtin(std::string_view name) {
    for (const auto& info : kBuiltins) {
        if (info.name == name) return &info;
    }
    return nullptr;
}

}  // namespace tutorforge::lang::detail
