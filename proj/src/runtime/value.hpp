#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tutorforge/lang/ast.hpp"

namespace tutorforge::runtime::detail {

struct Unit {
    bool operator==(const Unit&) const = default;
};

using IntArray = std::vector<std::int64_t>;
using Value = std::variant<Unit, std::int64_t, bool, std::string, IntArray>;

inline lang::TypeKind type_of(const Value& value) {
    switch (value.index()) {
        case 1: return lang::TypeKind::Int;
        case 2: return lang::TypeKind::Bool;
        case 3: return lang::TypeKind::String;
        case 4: return lang::TypeKind::IntArray;
        default: return lang::TypeKind::Void;
    }
}

inline std::string render(const Value& value) {
    switch (value.index()) {
        case 1: return std::to_string(std::get<std::int64_t>(value));
        case 2: return std::get<bool>(value) ? "true" : "false";
        case 3: return "\"" + std::get<std::string>(value) + "\"";
        case 4: {
            std::string out = "[";
            const auto& items = std::get<IntArray>(value);
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(items[i]);
            }
            return out + "]";
        }
        default: return "void";
    }
}

// Non-local exits of the interpreter.

/// A TutorLang-level exception; catchable by try/catch.
struct ThrownException {
    std::string name;
    std::string message;
};

struct AssertionFailed {
    std::string message;
};

/// Type errors and other faults that TutorLang code cannot catch.
struct RuntimeFault {
    std::string message;
};

struct StepBudgetExhausted {};

}  // namespace tutorforge::runtime::detail
