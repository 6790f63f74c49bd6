#include "tutorforge/lang/parser.hpp"

#include <charconv>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "builtins.hpp"
#include "lexer.hpp"

namespace tutorforge::lang {

using detail::Tok;
using detail::Token;

ParseError::ParseError(std::string path, std::uint32_t line, std::uint32_t column, std::string message)
    : std::runtime_error(path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      path_(std::move(path)),
      line_(line),
      column_(column),
      detail_(std::move(message)) {}

std::string_view type_name(TypeKind type) {
    switch (type) {
        case TypeKind::Void: return "void";
        case TypeKind::Int: return "int";
        case TypeKind::Bool: return "bool";
        case TypeKind::String: return "string";
        case TypeKind::IntArray: return "int[]";
    }
    return "?";
}

std::string_view binary_op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Mod: return "%";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
    }
    return "?";
}

const Function* SourceProgram::find_function(std::string_view name) const {
    for (const auto& fn : functions) {
        if (fn.name == name) return &fn;
    }
    return nullptr;
}

std::string_view SourceProgram::source_text(const SourceSpan& span) const {
    const std::string& text = files.at(span.file).text;
    if (span.begin > span.end || span.end > text.size()) return {};
    return std::string_view(text).substr(span.begin, span.end - span.begin);
}

std::string_view SourceProgram::line_text(FileIndex file, std::uint32_t line) const {
    const std::string_view text = files.at(file).text;
    std::size_t start = 0;
    for (std::uint32_t current = 1; current < line; ++current) {
        start = text.find('\n', start);
        if (start == std::string_view::npos) return {};
        ++start;
    }
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view out = text.substr(start, stop - start);
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    return out;
}

namespace {

constexpr int kMaxNesting = 200;

class Parser {
public:
    Parser(std::string path, std::string_view text, FileIndex file)
        : path_(std::move(path)), text_(text), file_(file) {
        auto lexed = detail::lex(path_, text_);
        tokens_ = std::move(lexed.tokens);
        annotations_ = std::move(lexed.annotations);
    }

    void parse_program_file(SourceProgram& program) {
        while (!check(Tok::End)) {
            if (check(Tok::KwFunc)) {
                program.functions.push_back(parse_function());
            } else if (check(Tok::KwVar)) {
                auto decl = parse_var_decl();
                expect(Tok::Semicolon);
                finish(*decl);
                program.globals.push_back(std::move(decl));
            } else {
                fail_here("expected 'func' or 'var' at top level");
            }
        }
    }

    std::vector<std::shared_ptr<TestDecl>> parse_test_file() {
        std::vector<std::shared_ptr<TestDecl>> tests;
        std::size_t next_annotation = 0;
        std::uint32_t previous_end_line = 0;
        while (!check(Tok::End)) {
            if (!check(Tok::KwTest)) fail_here("expected 'test' declaration");
            auto decl = std::make_shared<TestDecl>();
            const Token& kw = peek();
            decl->span = span_of(kw);
            // Annotations between the previous declaration and this one belong to it.
            while (next_annotation < annotations_.size() && annotations_[next_annotation].line < kw.line) {
                const auto& note = annotations_[next_annotation++];
                if (note.line <= previous_end_line) continue;
                for (auto& concept_id : split_concepts(note.payload)) decl->concepts.push_back(std::move(concept_id));
            }
            advance();
            decl->name = expect(Tok::Ident).text;
            decl->body = parse_block();
            decl->span.end = previous().end;
            decl->source = std::string(text_.substr(decl->span.begin, decl->span.end - decl->span.begin));
            previous_end_line = previous().line;
            tests.push_back(std::move(decl));
        }
        return tests;
    }

private:
    static std::vector<std::string> split_concepts(std::string_view payload) {
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= payload.size()) {
            std::size_t comma = payload.find(',', start);
            if (comma == std::string_view::npos) comma = payload.size();
            std::string_view item = payload.substr(start, comma - start);
            while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
            while (!item.empty() && (item.back() == ' ' || item.back() == '\t' || item.back() == '\r')) {
                item.remove_suffix(1);
            }
            if (!item.empty()) out.emplace_back(item);
            start = comma + 1;
        }
        return out;
    }

    // --- token plumbing -------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[idx];
    }
    const Token& previous() const { return tokens_[pos_ == 0 ? 0 : pos_ - 1]; }
    bool check(Tok kind) const { return peek().kind == kind; }
    const Token& advance() {
        const Token& tok = tokens_[pos_];
        if (pos_ + 1 < tokens_.size()) ++pos_;
        return tok;
    }
    bool accept(Tok kind) {
        if (!check(kind)) return false;
        advance();
        return true;
    }
    const Token& expect(Tok kind) {
        if (!check(kind)) {
            std::string message = "expected ";
            message += detail::describe(kind);
            message += " but found ";
            message += detail::describe(peek().kind);
            fail_here(std::move(message));
        }
        return advance();
    }

    [[noreturn]] void fail_here(std::string message) const {
        throw ParseError(path_, peek().line, peek().column, std::move(message));
    }
    [[noreturn]] void fail_at(const SourceSpan& span, std::string message) const {
        throw ParseError(path_, span.line, span.column, std::move(message));
    }

    SourceSpan span_of(const Token& tok) const {
        return SourceSpan{file_, tok.line, tok.column, tok.begin, tok.end};
    }
    void finish(Stmt& stmt) const { stmt.span.end = previous().end; }
    void finish(Expr& expr) const { expr.span.end = previous().end; }

    struct DepthGuard {
        DepthGuard(Parser& parser) : parser_(parser) {
            if (++parser_.depth_ > kMaxNesting) parser_.fail_here("nesting too deep");
        }
        ~DepthGuard() { --parser_.depth_; }
        Parser& parser_;
    };

    // --- declarations -----------------------------------------------------

    TypeKind parse_type(bool allow_void) {
        if (accept(Tok::KwInt)) {
            if (accept(Tok::LBracket)) {
                expect(Tok::RBracket);
                return TypeKind::IntArray;
            }
            return TypeKind::Int;
        }
        if (accept(Tok::KwBool)) return TypeKind::Bool;
        if (accept(Tok::KwString)) return TypeKind::String;
        if (allow_void && accept(Tok::KwVoid)) return TypeKind::Void;
        fail_here("expected a type");
    }

    Function parse_function() {
        Function fn;
        fn.span = span_of(advance());
        fn.name = expect(Tok::Ident).text;
        expect(Tok::LParen);
        if (!check(Tok::RParen)) {
            do {
                Param param;
                const Token& name = expect(Tok::Ident);
                param.name = name.text;
                param.span = span_of(name);
                expect(Tok::Colon);
                param.type = parse_type(false);
                fn.params.push_back(std::move(param));
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
        fn.return_type = TypeKind::Void;
        if (accept(Tok::Arrow)) fn.return_type = parse_type(true);
        fn.body = parse_block();
        fn.span.end = previous().end;
        return fn;
    }

    std::vector<StmtPtr> parse_block() {
        DepthGuard guard(*this);
        expect(Tok::LBrace);
        std::vector<StmtPtr> stmts;
        while (!check(Tok::RBrace)) {
            if (check(Tok::End)) fail_here("expected '}' before end of input");
            stmts.push_back(parse_statement());
        }
        advance();
        return stmts;
    }

    // --- statements -------------------------------------------------------

    StmtPtr make_stmt(StmtKind kind, const Token& first) const {
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = kind;
        stmt->span = span_of(first);
        return stmt;
    }

    StmtPtr parse_statement() {
        DepthGuard guard(*this);
        const Token& first = peek();
        switch (first.kind) {
            case Tok::KwVar: {
                auto stmt = parse_var_decl();
                expect(Tok::Semicolon);
                finish(*stmt);
                return stmt;
            }
            case Tok::KwIf: return parse_if();
            case Tok::KwWhile: {
                auto stmt = make_stmt(StmtKind::While, advance());
                expect(Tok::LParen);
                stmt->value = parse_expression();
                expect(Tok::RParen);
                stmt->body = parse_block();
                finish(*stmt);
                return stmt;
            }
            case Tok::KwFor: {
                auto stmt = make_stmt(StmtKind::For, advance());
                expect(Tok::LParen);
                if (!check(Tok::Semicolon)) stmt->init = parse_simple();
                expect(Tok::Semicolon);
                if (!check(Tok::Semicolon)) stmt->value = parse_expression();
                expect(Tok::Semicolon);
                if (!check(Tok::RParen)) {
                    stmt->step = parse_simple();
                    if (stmt->step->kind == StmtKind::VarDecl) fail_at(stmt->step->span, "declaration not allowed in for-step");
                }
                expect(Tok::RParen);
                stmt->body = parse_block();
                finish(*stmt);
                return stmt;
            }
            case Tok::KwReturn: {
                auto stmt = make_stmt(StmtKind::Return, advance());
                if (!check(Tok::Semicolon)) stmt->value = parse_expression();
                expect(Tok::Semicolon);
                finish(*stmt);
                return stmt;
            }
            case Tok::KwThrow: {
                auto stmt = make_stmt(StmtKind::Throw, advance());
                stmt->name = expect(Tok::Ident).text;
                if (accept(Tok::LParen)) {
                    stmt->value = parse_expression();
                    expect(Tok::RParen);
                }
                expect(Tok::Semicolon);
                finish(*stmt);
                return stmt;
            }
            case Tok::KwTry: {
                auto stmt = make_stmt(StmtKind::Try, advance());
                stmt->body = parse_block();
                expect(Tok::KwCatch);
                expect(Tok::LParen);
                const std::string first_name = expect(Tok::Ident).text;
                if (check(Tok::Ident)) {
                    stmt->catch_filter = first_name;
                    stmt->name = advance().text;
                } else {
                    stmt->name = first_name;
                }
                expect(Tok::RParen);
                stmt->alternative = parse_block();
                finish(*stmt);
                return stmt;
            }
            case Tok::LBrace: fail_here("nested blocks are not statements; use if/while/for");
            default: {
                auto stmt = parse_simple();
                if (stmt->kind == StmtKind::VarDecl) fail_at(stmt->span, "unexpected declaration");
                expect(Tok::Semicolon);
                finish(*stmt);
                return stmt;
            }
        }
    }

    StmtPtr parse_if() {
        auto stmt = make_stmt(StmtKind::If, advance());
        expect(Tok::LParen);
        stmt->value = parse_expression();
        expect(Tok::RParen);
        stmt->body = parse_block();
        if (accept(Tok::KwElse)) {
            if (check(Tok::KwIf)) {
                DepthGuard guard(*this);
                stmt->alternative.push_back(parse_if());
            } else {
                stmt->alternative = parse_block();
            }
        }
        finish(*stmt);
        return stmt;
    }

    StmtPtr parse_var_decl() {
        auto stmt = make_stmt(StmtKind::VarDecl, advance());
        stmt->name = expect(Tok::Ident).text;
        if (accept(Tok::Colon)) stmt->declared_type = parse_type(false);
        expect(Tok::Assign);
        stmt->value = parse_expression();
        finish(*stmt);
        return stmt;
    }

    // Assignment, indexed assignment, declaration, or expression statement.
    StmtPtr parse_simple() {
        if (check(Tok::KwVar)) {
            auto stmt = parse_var_decl();
            return stmt;
        }
        const Token& first = peek();
        ExprPtr target = parse_expression();
        if (accept(Tok::Assign)) {
            ExprPtr value = parse_expression();
            if (target->kind == ExprKind::Variable) {
                auto stmt = make_stmt(StmtKind::Assign, first);
                stmt->name = target->text;
                stmt->value = std::move(value);
                finish(*stmt);
                return stmt;
            }
            if (target->kind == ExprKind::Index && target->operands[0]->kind == ExprKind::Variable) {
                auto stmt = make_stmt(StmtKind::IndexAssign, first);
                stmt->name = target->operands[0]->text;
                stmt->index = std::move(target->operands[1]);
                stmt->value = std::move(value);
                finish(*stmt);
                return stmt;
            }
            fail_at(target->span, "invalid assignment target");
        }
        auto stmt = make_stmt(StmtKind::ExprStmt, first);
        stmt->value = std::move(target);
        finish(*stmt);
        return stmt;
    }

    // --- expressions ------------------------------------------------------

    ExprPtr make_expr(ExprKind kind, const SourceSpan& start) const {
        auto expr = std::make_unique<Expr>();
        expr->kind = kind;
        expr->span = start;
        return expr;
    }

    ExprPtr parse_expression() {
        DepthGuard guard(*this);
        return parse_or();
    }

    ExprPtr parse_or() {
        ExprPtr left = parse_and();
        while (check(Tok::PipePipe) || check(Tok::KwOr)) {
            advance();
            auto node = make_expr(ExprKind::Or, left->span);
            node->operands.push_back(std::move(left));
            node->operands.push_back(parse_and());
            finish(*node);
            left = std::move(node);
        }
        return left;
    }

    ExprPtr parse_and() {
        ExprPtr left = parse_comparison();
        while (check(Tok::AmpAmp) || check(Tok::KwAnd)) {
            advance();
            auto node = make_expr(ExprKind::And, left->span);
            node->operands.push_back(std::move(left));
            node->operands.push_back(parse_comparison());
            finish(*node);
            left = std::move(node);
        }
        return left;
    }

    ExprPtr parse_comparison() {
        ExprPtr left = parse_additive();
        BinaryOp op;
        switch (peek().kind) {
            case Tok::EqEq: op = BinaryOp::Eq; break;
            case Tok::NotEq: op = BinaryOp::Ne; break;
            case Tok::Less: op = BinaryOp::Lt; break;
            case Tok::LessEq: op = BinaryOp::Le; break;
            case Tok::Greater: op = BinaryOp::Gt; break;
            case Tok::GreaterEq: op = BinaryOp::Ge; break;
            default: return left;
        }
        advance();
        auto node = make_expr(ExprKind::Binary, left->span);
        node->op = op;
        node->operands.push_back(std::move(left));
        node->operands.push_back(parse_additive());
        finish(*node);
        switch (peek().kind) {
            case Tok::EqEq:
            case Tok::NotEq:
            case Tok::Less:
            case Tok::LessEq:
            case Tok::Greater:
            case Tok::GreaterEq: fail_here("comparison operators do not chain");
            default: break;
        }
        return node;
    }

    ExprPtr parse_additive() {
        ExprPtr left = parse_multiplicative();
        while (check(Tok::Plus) || check(Tok::Minus)) {
            const BinaryOp op = advance().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            auto node = make_expr(ExprKind::Binary, left->span);
            node->op = op;
            node->operands.push_back(std::move(left));
            node->operands.push_back(parse_multiplicative());
            finish(*node);
            left = std::move(node);
        }
        return left;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr left = parse_unary();
        while (check(Tok::Star) || check(Tok::Slash) || check(Tok::Percent)) {
            const Tok kind = advance().kind;
            auto node = make_expr(ExprKind::Binary, left->span);
            node->op = kind == Tok::Star ? BinaryOp::Mul : kind == Tok::Slash ? BinaryOp::Div : BinaryOp::Mod;
            node->operands.push_back(std::move(left));
            node->operands.push_back(parse_unary());
            finish(*node);
            left = std::move(node);
        }
        return left;
    }

    ExprPtr parse_unary() {
        DepthGuard guard(*this);
        if (check(Tok::Minus) || check(Tok::Bang) || check(Tok::KwNot)) {
            const Token& op = advance();
            if (op.kind == Tok::Minus && check(Tok::Int)) {
                // Fold negative literals so INT64_MIN is expressible.
                const Token& digits = advance();
                auto node = make_expr(ExprKind::IntLiteral, span_of(op));
                node->int_value = parse_int("-" + digits.text, op);
                finish(*node);
                return node;
            }
            auto node = make_expr(op.kind == Tok::Minus ? ExprKind::Negate : ExprKind::Not, span_of(op));
            node->operands.push_back(parse_unary());
            finish(*node);
            return node;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr expr = parse_primary();
        while (true) {
            if (check(Tok::LParen)) {
                if (expr->kind != ExprKind::Variable) fail_here("only named functions can be called");
                advance();
                expr->kind = ExprKind::Call;
                if (!check(Tok::RParen)) {
                    do {
                        expr->operands.push_back(parse_expression());
                    } while (accept(Tok::Comma));
                }
                expect(Tok::RParen);
                finish(*expr);
            } else if (check(Tok::LBracket)) {
                advance();
                auto node = make_expr(ExprKind::Index, expr->span);
                node->operands.push_back(std::move(expr));
                node->operands.push_back(parse_expression());
                expect(Tok::RBracket);
                finish(*node);
                expr = std::move(node);
            } else {
                return expr;
            }
        }
    }

    std::int64_t parse_int(const std::string& digits, const Token& at) const {
        std::int64_t value = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc() || ptr != digits.data() + digits.size()) {
            throw ParseError(path_, at.line, at.column, "integer literal out of range");
        }
        return value;
    }

    ExprPtr parse_primary() {
        const Token& tok = peek();
        switch (tok.kind) {
            case Tok::Int: {
                advance();
                auto node = make_expr(ExprKind::IntLiteral, span_of(tok));
                node->int_value = parse_int(tok.text, tok);
                return node;
            }
            case Tok::String: {
                advance();
                auto node = make_expr(ExprKind::StringLiteral, span_of(tok));
                node->text = tok.text;
                return node;
            }
            case Tok::KwTrue:
            case Tok::KwFalse: {
                advance();
                auto node = make_expr(ExprKind::BoolLiteral, span_of(tok));
                node->bool_value = tok.kind == Tok::KwTrue;
                return node;
            }
            case Tok::Ident: {
                advance();
                auto node = make_expr(ExprKind::Variable, span_of(tok));
                node->text = tok.text;
                return node;
            }
            case Tok::LParen: {
                advance();
                ExprPtr inner = parse_expression();
                expect(Tok::RParen);
                return inner;
            }
            case Tok::LBracket: {
                advance();
                auto node = make_expr(ExprKind::ArrayLiteral, span_of(tok));
                if (!check(Tok::RBracket)) {
                    do {
                        node->operands.push_back(parse_expression());
                    } while (accept(Tok::Comma));
                }
                expect(Tok::RBracket);
                finish(*node);
                return node;
            }
            default: {
                std::string message = "expected an expression but found ";
                message += detail::describe(tok.kind);
                fail_here(std::move(message));
            }
        }
    }

    std::string path_;
    std::string_view text_;
    FileIndex file_;
    std::vector<Token> tokens_;
    std::vector<detail::Annotation> annotations_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

// ---------------------------------------------------------------------------
// Post-pass: pre-order ids, line owners, compound-condition atoms.

class Annotator {
public:
    explicit Annotator(bool instrument) : instrument_(instrument) {}

    void stmt(Stmt& s, bool counts_as_line) {
        s.id = next_++;
        s.instrumented = instrument_;
        if (counts_as_line && instrument_) {
            const auto key = std::make_pair(s.span.file, s.span.line);
            auto [it, inserted] = line_owners_.try_emplace(key, s.id);
            s.line_owner = it->second;
        }
        switch (s.kind) {
            case StmtKind::IndexAssign:
                expr(*s.index);
                expr(*s.value);
                break;
            case StmtKind::If:
            case StmtKind::While:
                expr(*s.value);
                block(s.body);
                block(s.alternative);
                break;
            case StmtKind::For:
                if (s.init) stmt(*s.init, false);
                if (s.value) expr(*s.value);
                if (s.step) stmt(*s.step, false);
                block(s.body);
                break;
            case StmtKind::Try:
                block(s.body);
                block(s.alternative);
                break;
            default:
                if (s.value) expr(*s.value);
                break;
        }
    }

    void block(std::vector<StmtPtr>& stmts) {
        for (auto& s : stmts) stmt(*s, true);
    }

    void expr(Expr& e) {
        if (is_logical(e)) {
            condition_root(e);
            return;
        }
        e.id = next_++;
        e.instrumented = instrument_;
        for (auto& operand : e.operands) expr(*operand);
    }

    NodeId next_id() { return next_++; }
    NodeId count() const { return next_; }

private:
    static bool is_logical(const Expr& e) {
        return e.kind == ExprKind::And || e.kind == ExprKind::Or || e.kind == ExprKind::Not;
    }

    void condition_root(Expr& root) {
        int atoms = 0;
        logical(root, root.id, atoms, /*is_root=*/true);
    }

    // Numbers the logical skeleton in pre-order; non-logical leaves become atoms,
    // numbered left to right, and are walked for nested compound expressions.
    void logical(Expr& e, NodeId owner, int& atoms, bool is_root) {
        e.id = next_++;
        e.instrumented = instrument_;
        if (is_root) owner = e.id;
        e.condition_owner = owner;
        for (auto& operand : e.operands) {
            if (is_logical(*operand)) {
                logical(*operand, owner, atoms, false);
            } else {
                const int index = atoms++;
                expr(*operand);
                operand->condition_owner = owner;
                operand->atom_index = index;
            }
        }
    }

    bool instrument_;
    NodeId next_ = 1;
    std::map<std::pair<FileIndex, std::uint32_t>, NodeId> line_owners_;
};

// ---------------------------------------------------------------------------
// Static checks: name resolution, arity, return shape.

class Checker {
public:
    Checker(const SourceProgram& program, bool is_test, std::string test_path = {})
        : program_(program), is_test_(is_test), test_path_(std::move(test_path)) {}

    void check_program() {
        std::unordered_set<std::string> names;
        for (const auto& fn : program_.functions) {
            if (detail::find_builtin(fn.name)) fail(fn.span, "function '" + fn.name + "' shadows a builtin");
            if (!names.insert(fn.name).second) fail(fn.span, "duplicate function '" + fn.name + "'");
        }
        scopes_.emplace_back();
        for (const auto& global : program_.globals) {
            check_expr(*global->value);
            declare(*global);
        }
        globals_ = scopes_.back();
        scopes_.clear();
        for (const auto& fn : program_.functions) {
            current_return_ = fn.return_type;
            scopes_.clear();
            scopes_.emplace_back();
            for (const auto& param : fn.params) {
                if (!scopes_.back().insert(param.name).second) {
                    fail(param.span, "duplicate parameter '" + param.name + "'");
                }
            }
            check_block(fn.body);
        }
    }

    void check_test(const TestDecl& test) {
        scopes_.clear();
        scopes_.emplace_back();
        in_function_ = false;
        check_block(test.body);
    }

private:
    [[noreturn]] void fail(const SourceSpan& span, std::string message) const {
        const std::string path = is_test_ ? test_path_ : program_.files.at(span.file).path;
        throw ParseError(path, span.line, span.column, std::move(message));
    }

    void declare(const Stmt& decl) {
        if (!scopes_.back().insert(decl.name).second) fail(decl.span, "redeclaration of '" + decl.name + "'");
    }

    bool resolves(const std::string& name) const {
        for (const auto& scope : scopes_) {
            if (scope.contains(name)) return true;
        }
        return globals_.contains(name);
    }

    void require_variable(const std::string& name, const SourceSpan& span) const {
        // Test bodies may reference program globals, which are not known here.
        if (is_test_) return;
        if (!resolves(name)) fail(span, "undeclared variable '" + name + "'");
    }

    void check_block(const std::vector<StmtPtr>& stmts) {
        scopes_.emplace_back();
        for (const auto& s : stmts) check_stmt(*s);
        scopes_.pop_back();
    }

    void check_stmt(const Stmt& s) {
        switch (s.kind) {
            case StmtKind::VarDecl:
                check_expr(*s.value);
                declare(s);
                break;
            case StmtKind::Assign:
                require_variable(s.name, s.span);
                check_expr(*s.value);
                break;
            case StmtKind::IndexAssign:
                require_variable(s.name, s.span);
                check_expr(*s.index);
                check_expr(*s.value);
                break;
            case StmtKind::If:
                check_expr(*s.value);
                check_block(s.body);
                check_block(s.alternative);
                break;
            case StmtKind::While:
                check_expr(*s.value);
                check_block(s.body);
                break;
            case StmtKind::For:
                scopes_.emplace_back();
                if (s.init) check_stmt(*s.init);
                if (s.value) check_expr(*s.value);
                if (s.step) check_stmt(*s.step);
                check_block(s.body);
                scopes_.pop_back();
                break;
            case StmtKind::Return:
                if (!in_function_) fail(s.span, "return outside of a function");
                if (s.value && current_return_ == TypeKind::Void) fail(s.span, "void function cannot return a value");
                if (!s.value && current_return_ != TypeKind::Void) fail(s.span, "missing return value");
                if (s.value) check_expr(*s.value);
                break;
            case StmtKind::Throw:
                if (s.value) check_expr(*s.value);
                break;
            case StmtKind::Try:
                check_block(s.body);
                scopes_.emplace_back();
                scopes_.back().insert(s.name);
                check_block(s.alternative);
                scopes_.pop_back();
                break;
            case StmtKind::ExprStmt: check_expr(*s.value); break;
        }
    }

    void check_expr(const Expr& e) {
        switch (e.kind) {
            case ExprKind::Variable: require_variable(e.text, e.span); break;
            case ExprKind::Call: check_call(e); return;
            default: break;
        }
        for (const auto& operand : e.operands) check_expr(*operand);
    }

    void check_call(const Expr& e) {
        const std::size_t argc = e.operands.size();
        if (const auto* builtin = detail::find_builtin(e.text)) {
            if (builtin->test_only && !is_test_) fail(e.span, "'" + e.text + "' is only available in tests");
            if (argc < builtin->min_args || argc > builtin->max_args) {
                fail(e.span, "wrong number of arguments to '" + e.text + "'");
            }
            if (e.text == "assert_throws") {
                if (e.operands[0]->kind != ExprKind::Call) fail(e.span, "assert_throws expects a call expression");
                const auto& name = *e.operands[1];
                if (name.kind != ExprKind::Variable && name.kind != ExprKind::StringLiteral) {
                    fail(name.span, "assert_throws expects an exception name");
                }
                check_expr(*e.operands[0]);
                return;
            }
        } else if (!is_test_) {
            const Function* fn = program_.find_function(e.text);
            if (!fn) fail(e.span, "call to undefined function '" + e.text + "'");
            if (fn->params.size() != argc) fail(e.span, "wrong number of arguments to '" + e.text + "'");
        }
        for (const auto& operand : e.operands) check_expr(*operand);
    }

    const SourceProgram& program_;
    bool is_test_;
    std::string test_path_;
    bool in_function_ = true;
    TypeKind current_return_ = TypeKind::Void;
    std::vector<std::unordered_set<std::string>> scopes_;
    std::unordered_set<std::string> globals_;
};

// --- AST dump -------------------------------------------------------------

void dump_expr(std::ostringstream& out, const Expr& e, int depth) {
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "expr#" << e.id << " k" << static_cast<int>(e.kind)
        << " @" << e.span.file << ':' << e.span.line << ':' << e.span.column << " [" << e.span.begin << ','
        << e.span.end << ")";
    if (e.kind == ExprKind::Binary) out << " op" << binary_op_symbol(e.op);
    if (e.kind == ExprKind::IntLiteral) out << " =" << e.int_value;
    if (e.kind == ExprKind::BoolLiteral) out << " =" << (e.bool_value ? "true" : "false");
    if (!e.text.empty()) out << " '" << e.text << "'";
    if (e.atom_index >= 0 || e.condition_owner != 0) out << " cond" << e.condition_owner << '/' << e.atom_index;
    out << '\n';
    for (const auto& operand : e.operands) dump_expr(out, *operand, depth + 1);
}

void dump_stmt(std::ostringstream& out, const Stmt& s, int depth);

void dump_block(std::ostringstream& out, const char* label, const std::vector<StmtPtr>& stmts, int depth) {
    if (stmts.empty()) return;
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << label << '\n';
    for (const auto& s : stmts) dump_stmt(out, *s, depth + 1);
}

void dump_stmt(std::ostringstream& out, const Stmt& s, int depth) {
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "stmt#" << s.id << " k" << static_cast<int>(s.kind)
        << " @" << s.span.file << ':' << s.span.line << ':' << s.span.column << " [" << s.span.begin << ','
        << s.span.end << ") line_owner=" << s.line_owner;
    if (!s.name.empty()) out << " name=" << s.name;
    if (!s.catch_filter.empty()) out << " filter=" << s.catch_filter;
    if (s.declared_type) out << " type=" << type_name(*s.declared_type);
    out << '\n';
    if (s.init) dump_stmt(out, *s.init, depth + 1);
    if (s.index) dump_expr(out, *s.index, depth + 1);
    if (s.value) dump_expr(out, *s.value, depth + 1);
    if (s.step) dump_stmt(out, *s.step, depth + 1);
    dump_block(out, "body", s.body, depth + 1);
    dump_block(out, "alternative", s.alternative, depth + 1);
}

}  // namespace

SourceProgram parse_program(std::span<const SourceInput> sources) {
    SourceProgram program;
    for (const auto& source : sources) {
        const auto file = static_cast<FileIndex>(program.files.size());
        program.files.push_back(SourceFile{source.path, source.text});
        Parser parser(source.path, program.files.back().text, file);
        parser.parse_program_file(program);
    }
    Annotator annotator(/*instrument=*/true);
    for (auto& global : program.globals) annotator.stmt(*global, true);
    for (auto& fn : program.functions) {
        fn.id = annotator.next_id();
        annotator.block(fn.body);
    }
    program.node_count = annotator.count() - 1;
    Checker(program, /*is_test=*/false).check_program();
    return program;
}

SourceProgram parse_program(std::string path, std::string text) {
    const SourceInput input{std::move(path), std::move(text)};
    return parse_program(std::span<const SourceInput>(&input, 1));
}

TestFile parse_tests(std::string path, std::string text) {
    TestFile out;
    out.file = SourceFile{std::move(path), std::move(text)};
    Parser parser(out.file.path, out.file.text, 0);
    auto tests = parser.parse_test_file();

    SourceProgram empty;
    Checker checker(empty, /*is_test=*/true, out.file.path);
    Annotator annotator(/*instrument=*/false);
    std::unordered_set<std::string> names;
    for (auto& shared : tests) {
        TestDecl& test = *shared;
        if (!names.insert(test.name).second) {
            throw ParseError(out.file.path, test.span.line, test.span.column, "duplicate test '" + test.name + "'");
        }
        test.id = annotator.next_id();
        for (auto& s : test.body) annotator.stmt(*s, false);
        checker.check_test(test);
    }
    out.tests.assign(tests.begin(), tests.end());
    return out;
}

std::string dump_ast(const SourceProgram& program) {
    std::ostringstream out;
    for (const auto& file : program.files) out << "file " << file.path << '\n';
    for (const auto& global : program.globals) dump_stmt(out, *global, 0);
    for (const auto& fn : program.functions) {
        out << "func#" << fn.id << ' ' << fn.name << '(';
        for (const auto& param : fn.params) out << param.name << ':' << type_name(param.type) << ',';
        out << ") -> " << type_name(fn.return_type) << " @" << fn.span.file << ':' << fn.span.line << '\n';
        for (const auto& s : fn.body) dump_stmt(out, *s, 1);
    }
    return out.str();
}

}  // namespace tutorforge::lang
