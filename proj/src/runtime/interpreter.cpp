#include <algorithm>
#include <charconv>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "tutorforge/runtime/runtime.hpp"
#include "value.hpp"

namespace tutorforge::runtime {

using namespace detail;
using lang::CoverageEntity;
using lang::Expr;
using lang::ExprKind;
using lang::Stmt;
using lang::StmtKind;
using lang::TypeKind;

std::string_view verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Error: return "ERROR";
        case Verdict::Timeout: return "TIMEOUT";
    }
    return "?";
}

void ExecutionLimits::validate() const {
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (max_call_depth < 1) throw std::invalid_argument("max_call_depth must be >= 1");
    if (max_call_depth > kMaxCallDepthCap) {
        throw std::invalid_argument("max_call_depth must be <= " + std::to_string(kMaxCallDepthCap));
    }
}

bool CoverageVector::subset_of(const lang::EntitySet& other) const {
    return std::includes(other.begin(), other.end(), covered.begin(), covered.end());
}

namespace {

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

struct Slot {
    Value value;
    TypeKind type;
};

using Scope = std::unordered_map<std::string, Slot>;

struct Frame {
    std::vector<Scope> scopes;
    TypeKind return_type = TypeKind::Void;
    Value return_value;
};

enum class Flow { Normal, Return };

class Interpreter {
public:
    Interpreter(const lang::SourceProgram& program, const ExecutionLimits& limits, lang::EntitySet& coverage)
        : program_(program), limits_(limits), coverage_(coverage) {}

    void initialize_globals() {
        frames_.emplace_back();
        frames_.back().scopes.emplace_back();
        for (const auto& global : program_.globals) {
            tick();
            record_line(*global);
            Value value = eval(*global->value);
            globals_[global->name] = Slot{value, checked_decl_type(*global, value)};
        }
        frames_.pop_back();
    }

    void run_body(const std::vector<lang::StmtPtr>& body) {
        frames_.emplace_back();
        exec_block(body);
        frames_.pop_back();
    }

    std::uint64_t steps() const { return steps_; }

private:
    // --- bookkeeping ------------------------------------------------------

    void tick() {
        if (++steps_ > limits_.max_steps) throw StepBudgetExhausted{};
    }

    void record_line(const Stmt& s) {
        if (s.line_owner != 0) coverage_.insert(CoverageEntity::make_line(s.span.file, s.span.line, s.line_owner));
    }

    [[noreturn]] void fault(const lang::SourceSpan& span, const std::string& message) const {
        std::string where;
        if (span.line != 0) where = "line " + std::to_string(span.line) + ": ";
        throw RuntimeFault{where + message};
    }

    struct ScopeGuard {
        explicit ScopeGuard(Frame& frame) : frame_(frame) { frame_.scopes.emplace_back(); }
        ~ScopeGuard() { frame_.scopes.pop_back(); }
        ScopeGuard(const ScopeGuard&) = delete;
        ScopeGuard& operator=(const ScopeGuard&) = delete;
        Frame& frame_;
    };

    Slot* lookup(const std::string& name) {
        auto& scopes = frames_.back().scopes;
        for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
            if (auto found = it->find(name); found != it->end()) return &found->second;
        }
        if (auto found = globals_.find(name); found != globals_.end()) return &found->second;
        return nullptr;
    }

    Slot& lookup_or_fault(const std::string& name, const lang::SourceSpan& span) {
        Slot* slot = lookup(name);
        if (!slot) fault(span, "undefined variable '" + name + "'");
        return *slot;
    }

    TypeKind checked_decl_type(const Stmt& decl, const Value& value) {
        const TypeKind actual = type_of(value);
        if (actual == TypeKind::Void) fault(decl.span, "cannot store a void value in '" + decl.name + "'");
        if (decl.declared_type && *decl.declared_type != actual) {
            fault(decl.span, "type mismatch: '" + decl.name + "' is " + std::string(lang::type_name(*decl.declared_type)) +
                                 " but value is " + std::string(lang::type_name(actual)));
        }
        return decl.declared_type.value_or(actual);
    }

    // --- statements -------------------------------------------------------

    Flow exec_block(const std::vector<lang::StmtPtr>& stmts) {
        ScopeGuard scope(frames_.back());
        for (const auto& s : stmts) {
            if (exec(*s) == Flow::Return) return Flow::Return;
        }
        return Flow::Normal;
    }

    bool eval_guard(const Stmt& s) {
        const Value value = eval(*s.value);
        if (!std::holds_alternative<bool>(value)) fault(s.value->span, "condition must be bool");
        const bool taken = std::get<bool>(value);
        if (s.instrumented) coverage_.insert(CoverageEntity::make_arm(s.span.file, s.span.line, s.id, taken));
        return taken;
    }

    Flow exec(const Stmt& s) {
        tick();
        record_line(s);
        Frame& frame = frames_.back();
        switch (s.kind) {
            case StmtKind::VarDecl: {
                Value value = eval(*s.value);
                const TypeKind type = checked_decl_type(s, value);
                frames_.back().scopes.back()[s.name] = Slot{std::move(value), type};
                return Flow::Normal;
            }
            case StmtKind::Assign: {
                Value value = eval(*s.value);
                Slot& slot = lookup_or_fault(s.name, s.span);
                if (type_of(value) != slot.type) {
                    fault(s.span, "type mismatch assigning " + std::string(lang::type_name(type_of(value))) + " to '" +
                                      s.name + "'");
                }
                slot.value = std::move(value);
                return Flow::Normal;
            }
            case StmtKind::IndexAssign: {
                const Value index = eval(*s.index);
                const Value value = eval(*s.value);
                Slot& slot = lookup_or_fault(s.name, s.span);
                if (slot.type != TypeKind::IntArray) fault(s.span, "'" + s.name + "' is not an array");
                auto& items = std::get<IntArray>(slot.value);
                const std::int64_t i = expect_int(index, s.index->span);
                const std::int64_t v = expect_int(value, s.value->span);
                if (i < 0 || static_cast<std::uint64_t>(i) >= items.size()) throw_index_error(i, items.size());
                items[static_cast<std::size_t>(i)] = v;
                return Flow::Normal;
            }
            case StmtKind::If:
                if (eval_guard(s)) return exec_block(s.body);
                return exec_block(s.alternative);
            case StmtKind::While:
                while (eval_guard(s)) {
                    if (exec_block(s.body) == Flow::Return) return Flow::Return;
                }
                return Flow::Normal;
            case StmtKind::For: {
                ScopeGuard scope(frame);
                if (s.init) exec(*s.init);
                while (!s.value || eval_guard(s)) {
                    if (exec_block(s.body) == Flow::Return) return Flow::Return;
                    if (s.step) exec(*s.step);
                }
                return Flow::Normal;
            }
            case StmtKind::Return:
                frame.return_value = s.value ? eval(*s.value) : Value{Unit{}};
                return Flow::Return;
            case StmtKind::Throw: {
                std::string message;
                if (s.value) {
                    const Value value = eval(*s.value);
                    message = std::holds_alternative<std::string>(value) ? std::get<std::string>(value) : render(value);
                }
                throw ThrownException{s.name, std::move(message)};
            }
            case StmtKind::Try: {
                std::optional<ThrownException> caught;
                try {
                    return exec_block(s.body);
                } catch (ThrownException& ex) {
                    if (!s.catch_filter.empty() && s.catch_filter != ex.name) throw;
                    caught = std::move(ex);
                }
                ScopeGuard scope(frame);
                frame.scopes.back()[s.name] = Slot{Value{caught->name}, TypeKind::String};
                return exec_block(s.alternative);
            }
            case StmtKind::ExprStmt: eval(*s.value); return Flow::Normal;
        }
        return Flow::Normal;
    }

    // --- expressions ------------------------------------------------------

    std::int64_t expect_int(const Value& value, const lang::SourceSpan& span) const {
        if (!std::holds_alternative<std::int64_t>(value)) {
            fault(span, "expected int but got " + std::string(lang::type_name(type_of(value))));
        }
        return std::get<std::int64_t>(value);
    }

    const std::string& expect_string(const Value& value, const lang::SourceSpan& span) const {
        if (!std::holds_alternative<std::string>(value)) {
            fault(span, "expected string but got " + std::string(lang::type_name(type_of(value))));
        }
        return std::get<std::string>(value);
    }

    [[noreturn]] static void throw_index_error(std::int64_t index, std::size_t size) {
        throw ThrownException{"IndexError", "index " + std::to_string(index) + " out of range for length " +
                                                std::to_string(size)};
    }

    // Evaluates an operand of and/or/not and records its outcome when it is an atom.
    bool eval_condition(const Expr& e) {
        const Value value = eval(e);
        if (!std::holds_alternative<bool>(value)) fault(e.span, "logical operand must be bool");
        const bool outcome = std::get<bool>(value);
        if (e.instrumented && e.atom_index >= 0) {
            coverage_.insert(CoverageEntity::make_condition(e.span.file, e.span.line, e.condition_owner,
                                                            static_cast<std::uint32_t>(e.atom_index), outcome));
        }
        return outcome;
    }

    Value eval(const Expr& e) {
        tick();
        switch (e.kind) {
            case ExprKind::IntLiteral: return e.int_value;
            case ExprKind::BoolLiteral: return e.bool_value;
            case ExprKind::StringLiteral: return e.text;
            case ExprKind::ArrayLiteral: {
                IntArray items;
                items.reserve(e.operands.size());
                for (const auto& operand : e.operands) items.push_back(expect_int(eval(*operand), operand->span));
                return items;
            }
            case ExprKind::Variable: return lookup_or_fault(e.text, e.span).value;
            case ExprKind::Negate: return wrap_sub(0, expect_int(eval(*e.operands[0]), e.span));
            case ExprKind::Not: return !eval_condition(*e.operands[0]);
            case ExprKind::And:
                if (!eval_condition(*e.operands[0])) return false;
                return eval_condition(*e.operands[1]);
            case ExprKind::Or:
                if (eval_condition(*e.operands[0])) return true;
                return eval_condition(*e.operands[1]);
            case ExprKind::Binary: return eval_binary(e);
            case ExprKind::Index: {
                const Value target = eval(*e.operands[0]);
                const std::int64_t i = expect_int(eval(*e.operands[1]), e.operands[1]->span);
                if (const auto* items = std::get_if<IntArray>(&target)) {
                    if (i < 0 || static_cast<std::uint64_t>(i) >= items->size()) throw_index_error(i, items->size());
                    return (*items)[static_cast<std::size_t>(i)];
                }
                if (const auto* text = std::get_if<std::string>(&target)) {
                    if (i < 0 || static_cast<std::uint64_t>(i) >= text->size()) throw_index_error(i, text->size());
                    return std::string(1, (*text)[static_cast<std::size_t>(i)]);
                }
                fault(e.span, "value is not indexable");
            }
            case ExprKind::Call: return eval_call(e);
        }
        fault(e.span, "unknown expression");
    }

    Value eval_binary(const Expr& e) {
        const Value lhs = eval(*e.operands[0]);
        const Value rhs = eval(*e.operands[1]);
        using lang::BinaryOp;
        switch (e.op) {
            case BinaryOp::Eq:
            case BinaryOp::Ne: {
                if (lhs.index() != rhs.index()) {
                    fault(e.span, "cannot compare " + std::string(lang::type_name(type_of(lhs))) + " with " +
                                      std::string(lang::type_name(type_of(rhs))));
                }
                return (lhs == rhs) == (e.op == BinaryOp::Eq);
            }
            case BinaryOp::Lt:
            case BinaryOp::Le:
            case BinaryOp::Gt:
            case BinaryOp::Ge: {
                int order = 0;
                if (std::holds_alternative<std::string>(lhs) && std::holds_alternative<std::string>(rhs)) {
                    const int c = std::get<std::string>(lhs).compare(std::get<std::string>(rhs));
                    order = (c > 0) - (c < 0);
                } else {
                    const std::int64_t a = expect_int(lhs, e.operands[0]->span);
                    const std::int64_t b = expect_int(rhs, e.operands[1]->span);
                    order = (a > b) - (a < b);
                }
                switch (e.op) {
                    case BinaryOp::Lt: return order < 0;
                    case BinaryOp::Le: return order <= 0;
                    case BinaryOp::Gt: return order > 0;
                    default: return order >= 0;
                }
            }
            case BinaryOp::Add:
                if (std::holds_alternative<std::string>(lhs) && std::holds_alternative<std::string>(rhs)) {
                    return std::get<std::string>(lhs) + std::get<std::string>(rhs);
                }
                return wrap_add(expect_int(lhs, e.operands[0]->span), expect_int(rhs, e.operands[1]->span));
            default: break;
        }
        const std::int64_t a = expect_int(lhs, e.operands[0]->span);
        const std::int64_t b = expect_int(rhs, e.operands[1]->span);
        switch (e.op) {
            case BinaryOp::Sub: return wrap_sub(a, b);
            case BinaryOp::Mul: return wrap_mul(a, b);
            case BinaryOp::Div:
            case BinaryOp::Mod:
                if (b == 0) throw ThrownException{"DivideByZero", "division by zero"};
                if (a == std::numeric_limits<std::int64_t>::min() && b == -1) {
                    return e.op == BinaryOp::Div ? a : std::int64_t{0};
                }
                return e.op == BinaryOp::Div ? a / b : a % b;
            default: break;
        }
        fault(e.span, "unsupported operator");
    }

    std::vector<Value> eval_args(const Expr& e, std::size_t skip = 0) {
        std::vector<Value> args;
        args.reserve(e.operands.size() - skip);
        for (std::size_t i = skip; i < e.operands.size(); ++i) args.push_back(eval(*e.operands[i]));
        return args;
    }

    Value eval_call(const Expr& e) {
        const std::string& name = e.text;
        if (name == "assert_throws") return builtin_assert_throws(e);
        if (const lang::Function* fn = program_.find_function(name)) return call_function(*fn, eval_args(e), e);
        if (name == "call") {
            const Value target = eval(*e.operands[0]);
            const std::string& callee = expect_string(target, e.operands[0]->span);
            const lang::Function* fn = program_.find_function(callee);
            if (!fn) throw ThrownException{"UnknownFunction", "no function named '" + callee + "'"};
            return call_function(*fn, eval_args(e, 1), e);
        }
        return call_builtin(e, eval_args(e));
    }

    Value call_function(const lang::Function& fn, std::vector<Value> args, const Expr& site) {
        if (depth_ >= limits_.max_call_depth) {
            fault(site.span, "maximum call depth of " + std::to_string(limits_.max_call_depth) + " exceeded");
        }
        if (args.size() != fn.params.size()) {
            fault(site.span, "'" + fn.name + "' expects " + std::to_string(fn.params.size()) + " argument(s) but got " +
                                 std::to_string(args.size()));
        }
        Frame frame;
        frame.return_type = fn.return_type;
        frame.scopes.emplace_back();
        for (std::size_t i = 0; i < args.size(); ++i) {
            const auto& param = fn.params[i];
            if (type_of(args[i]) != param.type) {
                fault(site.span, "argument '" + param.name + "' of '" + fn.name + "' expects " +
                                     std::string(lang::type_name(param.type)) + " but got " +
                                     std::string(lang::type_name(type_of(args[i]))));
            }
            frame.scopes.back()[param.name] = Slot{std::move(args[i]), param.type};
        }

        struct CallGuard {
            Interpreter& self;
            ~CallGuard() {
                self.frames_.pop_back();
                --self.depth_;
            }
        };
        frames_.push_back(std::move(frame));
        ++depth_;
        CallGuard guard{*this};

        const Flow flow = exec_block(fn.body);
        Value result = flow == Flow::Return ? std::move(frames_.back().return_value) : Value{Unit{}};
        if (type_of(result) != fn.return_type) {
            if (fn.return_type == TypeKind::Void) fault(site.span, "'" + fn.name + "' returned a value");
            if (flow != Flow::Return) fault(site.span, "'" + fn.name + "' finished without returning a value");
            fault(site.span, "'" + fn.name + "' returned " + std::string(lang::type_name(type_of(result))) +
                                 " but is declared " + std::string(lang::type_name(fn.return_type)));
        }
        return result;
    }

    Value builtin_assert_throws(const Expr& e) {
        const Expr& name_expr = *e.operands[1];
        const std::string& expected = name_expr.text;
        try {
            eval(*e.operands[0]);
        } catch (ThrownException& ex) {
            if (ex.name == expected) return Unit{};
            throw AssertionFailed{"assert_throws: expected " + expected + " but " + ex.name + " was thrown"};
        }
        throw AssertionFailed{"assert_throws: expected " + expected + " but nothing was thrown"};
    }

    Value call_builtin(const Expr& e, std::vector<Value> args) {
        const std::string& name = e.text;
        auto arg_span = [&](std::size_t i) { return e.operands[i]->span; };
        if (name == "len") {
            if (const auto* text = std::get_if<std::string>(&args[0])) return static_cast<std::int64_t>(text->size());
            if (const auto* items = std::get_if<IntArray>(&args[0])) return static_cast<std::int64_t>(items->size());
            fault(e.span, "len expects a string or int[]");
        }
        if (name == "push") {
            if (!std::holds_alternative<IntArray>(args[0])) fault(arg_span(0), "push expects an int[]");
            IntArray items = std::get<IntArray>(std::move(args[0]));
            items.push_back(expect_int(args[1], arg_span(1)));
            return items;
        }
        if (name == "slice") {
            if (!std::holds_alternative<IntArray>(args[0])) fault(arg_span(0), "slice expects an int[]");
            const auto& items = std::get<IntArray>(args[0]);
            const std::int64_t from = expect_int(args[1], arg_span(1));
            const std::int64_t to = expect_int(args[2], arg_span(2));
            const auto size = static_cast<std::int64_t>(items.size());
            if (from < 0 || to < from || to > size) {
                throw ThrownException{"IndexError", "slice [" + std::to_string(from) + ", " + std::to_string(to) +
                                                        ") out of range for length " + std::to_string(size)};
            }
            return IntArray(items.begin() + from, items.begin() + to);
        }
        if (name == "substr") {
            const std::string& text = expect_string(args[0], arg_span(0));
            const std::int64_t start = expect_int(args[1], arg_span(1));
            const std::int64_t count = expect_int(args[2], arg_span(2));
            const auto size = static_cast<std::int64_t>(text.size());
            if (start < 0 || count < 0 || start > size || count > size - start) {
                throw ThrownException{"IndexError", "substr out of range for length " + std::to_string(size)};
            }
            return text.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(count));
        }
        if (name == "char_at") {
            const std::string& text = expect_string(args[0], arg_span(0));
            const std::int64_t i = expect_int(args[1], arg_span(1));
            if (i < 0 || static_cast<std::uint64_t>(i) >= text.size()) throw_index_error(i, text.size());
            return std::string(1, text[static_cast<std::size_t>(i)]);
        }
        if (name == "to_int") {
            const std::string& text = expect_string(args[0], arg_span(0));
            std::int64_t value = 0;
            const char* first = text.data();
            const char* last = text.data() + text.size();
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (text.empty() || ec != std::errc() || ptr != last) {
                throw ThrownException{"ValueError", "not an integer: \"" + text + "\""};
            }
            return value;
        }
        if (name == "str") {
            if (const auto* text = std::get_if<std::string>(&args[0])) return *text;
            return render(args[0]);
        }
        if (name == "assert_eq") {
            if (args[0] != args[1]) {
                throw AssertionFailed{"assert_eq: expected " + render(args[1]) + " but got " + render(args[0])};
            }
            return Unit{};
        }
        if (name == "assert_true") {
            if (!std::holds_alternative<bool>(args[0])) fault(arg_span(0), "assert_true expects a bool");
            if (!std::get<bool>(args[0])) throw AssertionFailed{"assert_true: condition was false"};
            return Unit{};
        }
        fault(e.span, "call to undefined function '" + name + "'");
    }

    const lang::SourceProgram& program_;
    const ExecutionLimits& limits_;
    lang::EntitySet& coverage_;
    Scope globals_;
    std::deque<Frame> frames_;  // references must survive nested pushes
    std::uint32_t depth_ = 0;
    std::uint64_t steps_ = 0;
};

}  // namespace

TestRunResult run_test(const lang::SourceProgram& program, const suite::TestCase& test, const ExecutionLimits& limits) {
    limits.validate();
    TestRunResult result;
    result.test_name = test.name;
    Interpreter interpreter(program, limits, result.coverage.covered);
    try {
        interpreter.initialize_globals();
        interpreter.run_body(test.decl->body);
        result.verdict = Verdict::Pass;
    } catch (const AssertionFailed& failure) {
        result.verdict = Verdict::Fail;
        result.message = failure.message;
    } catch (const ThrownException& ex) {
        result.verdict = Verdict::Error;
        result.message = "uncaught " + ex.name + (ex.message.empty() ? "" : ": " + ex.message);
    } catch (const RuntimeFault& fault) {
        result.verdict = Verdict::Error;
        result.message = fault.message;
    } catch (const StepBudgetExhausted&) {
        result.verdict = Verdict::Timeout;
        result.message = "step budget of " + std::to_string(limits.max_steps) + " exhausted";
    }
    result.steps = interpreter.steps();
    return result;
}

std::vector<TestRunResult> run_suite(const lang::SourceProgram& program, const suite::TestSuite& suite,
                                     const ExecutionLimits& limits) {
    std::vector<TestRunResult> results;
    results.reserve(suite.tests.size());
    for (const auto& test : suite.tests) results.push_back(run_test(program, test, limits));
    return results;
}

lang::EntitySet union_coverage(std::span<const TestRunResult> results) {
    lang::EntitySet out;
    for (const auto& result : results) out.insert(result.coverage.covered.begin(), result.coverage.covered.end());
    return out;
}

}  // namespace tutorforge::runtime
