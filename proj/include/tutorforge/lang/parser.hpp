#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tutorforge/lang/ast.hpp"

namespace tutorforge::lang {

/// Syntax or static-semantic error in TutorLang source.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string path, std::uint32_t line, std::uint32_t column, std::string message);

    const std::string& path() const noexcept { return path_; }
    std::uint32_t line() const noexcept { return line_; }
    std::uint32_t column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string path_;
    std::uint32_t line_;
    std::uint32_t column_;
    std::string detail_;
};

struct SourceInput {
    std::string path;
    std::string text;
};

/// Parses and statically checks a program made of one or more files.
/// Throws ParseError on the first error; no partial program is returned.
SourceProgram parse_program(std::span<const SourceInput> sources);
SourceProgram parse_program(std::string path, std::string text);

/// Parses a test file: a sequence of `test name { ... }` declarations, each
/// optionally preceded by a `//@concepts: a, b` annotation.
TestFile parse_tests(std::string path, std::string text);

/// Canonical structural dump of a program (node ids, kinds, spans, payloads).
/// Two parses of identical sources yield identical dumps.
std::string dump_ast(const SourceProgram& program);

}  // namespace tutorforge::lang
