#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tutorforge::lang {

using NodeId = std::uint32_t;
using FileIndex = std::uint32_t;

struct SourceSpan {
    FileIndex file = 0;
    std::uint32_t line = 0;
    std::uint32_t column = 0;
    // Byte range [begin, end) of the node within its file text.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
};

enum class TypeKind : std::uint8_t { Void, Int, Bool, String, IntArray };

std::string_view type_name(TypeKind type);

enum class ExprKind : std::uint8_t {
    IntLiteral,
    BoolLiteral,
    StringLiteral,
    ArrayLiteral,
    Variable,
    Negate,
    Not,
    And,
    Or,
    Binary,
    Call,
    Index,
};

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge };

std::string_view binary_op_symbol(BinaryOp op);

struct Expr {
    NodeId id = 0;
    ExprKind kind = ExprKind::IntLiteral;
    SourceSpan span;
    BinaryOp op = BinaryOp::Add;
    std::int64_t int_value = 0;
    bool bool_value = false;
    std::string text;  // identifier, callee or string literal contents
    std::vector<std::unique_ptr<Expr>> operands;

    // Instrumentation annotations, only meaningful on program (not test) nodes.
    bool instrumented = false;
    NodeId condition_owner = 0;  // root of the enclosing compound boolean expression
    int atom_index = -1;         // >= 0 iff this node is an atomic condition of a compound expression
};

using ExprPtr = std::unique_ptr<Expr>;

enum class StmtKind : std::uint8_t {
    VarDecl,
    Assign,
    IndexAssign,
    If,
    While,
    For,
    Return,
    Throw,
    Try,
    ExprStmt,
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
    NodeId id = 0;
    StmtKind kind = StmtKind::ExprStmt;
    SourceSpan span;
    // VarDecl/Assign/IndexAssign: target variable. Throw: exception name.
    // Try: catch binding.
    std::string name;
    std::string catch_filter;  // Try: exception name to catch, empty catches all
    std::optional<TypeKind> declared_type;
    ExprPtr index;  // IndexAssign
    ExprPtr value;  // initializer, assigned value, guard, return value, thrown message, expression
    std::vector<StmtPtr> body;         // then-branch, loop body, try block
    std::vector<StmtPtr> alternative;  // else-branch, catch block
    StmtPtr init;                      // For
    StmtPtr step;                      // For

    bool instrumented = false;
    NodeId line_owner = 0;  // first statement (pre-order) starting on the same source line

    bool is_guarded() const noexcept {
        return (kind == StmtKind::If || kind == StmtKind::While || kind == StmtKind::For) && value != nullptr;
    }
};

struct Param {
    std::string name;
    TypeKind type = TypeKind::Int;
    SourceSpan span;
};

struct Function {
    NodeId id = 0;
    std::string name;
    std::vector<Param> params;
    TypeKind return_type = TypeKind::Void;
    std::vector<StmtPtr> body;
    SourceSpan span;
};

struct SourceFile {
    std::string path;
    std::string text;
};

/// A parsed TutorLang program. Node ids are unique and assigned in pre-order
/// over globals then functions, file by file.
struct SourceProgram {
    std::vector<SourceFile> files;
    std::vector<StmtPtr> globals;  // top-level VarDecl statements
    std::vector<Function> functions;
    NodeId node_count = 0;

    const Function* find_function(std::string_view name) const;
    const std::string& file_path(FileIndex file) const { return files.at(file).path; }
    std::string_view source_text(const SourceSpan& span) const;
    std::string_view line_text(FileIndex file, std::uint32_t line) const;
};

struct TestDecl {
    NodeId id = 0;
    std::string name;
    std::vector<std::string> concepts;  // from the `//@concepts:` annotation preceding the test
    std::vector<StmtPtr> body;
    SourceSpan span;
    std::string source;  // exact declaration text
};

struct TestFile {
    SourceFile file;
    std::vector<std::shared_ptr<const TestDecl>> tests;
};

}  // namespace tutorforge::lang
