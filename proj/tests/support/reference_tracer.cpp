#include "reference_tracer.hpp"

#include <climits>
#include <map>
#include <stdexcept>
#include <variant>

namespace oracle {

using namespace tutorforge::lang;

namespace {

using Array = std::vector<std::int64_t>;
struct Nothing {
    bool operator==(const Nothing&) const { return true; }
};
using Val = std::variant<Nothing, std::int64_t, bool, std::string, Array>;

struct Thrown {
    std::string name;
};
struct Failed {};
struct Faulted {};
struct OutOfSteps {};

struct ReturnSignal {
    Val value;
};

class Tracer {
public:
    Tracer(const SourceProgram& program, std::uint64_t max_steps, std::uint32_t max_depth)
        : program_(program), max_steps_(max_steps), max_depth_(max_depth) {}

    std::vector<Event> log;

    void run(const TestDecl& test) {
        env_.push_back({});
        env_.back().emplace_back();
        for (const auto& g : program_.globals) {
            step();
            log.push_back({EventKind::Statement, g.get(), -1});
            Val v = eval(*g->value);
            if (v.index() == 0) throw Faulted{};
            if (g->declared_type && type_index(*g->declared_type) != v.index()) throw Faulted{};
            globals_[g->name] = v;
        }
        env_.clear();
        env_.push_back({});
        block(test.body);
    }

private:
    static std::size_t type_index(TypeKind t) {
        switch (t) {
            case TypeKind::Int: return 1;
            case TypeKind::Bool: return 2;
            case TypeKind::String: return 3;
            case TypeKind::IntArray: return 4;
            default: return 0;
        }
    }

    void step() {
        if (++steps_ > max_steps_) throw OutOfSteps{};
    }

    Val* find(const std::string& name) {
        auto& frame = env_.back();
        for (auto it = frame.rbegin(); it != frame.rend(); ++it) {
            auto hit = it->find(name);
            if (hit != it->end()) return &hit->second;
        }
        auto hit = globals_.find(name);
        return hit == globals_.end() ? nullptr : &hit->second;
    }

    void block(const std::vector<StmtPtr>& stmts) {
        env_.back().emplace_back();
        try {
            for (const auto& s : stmts) stmt(*s);
        } catch (...) {
            env_.back().pop_back();
            throw;
        }
        env_.back().pop_back();
    }

    bool guard(const Expr& e) {
        Val v = eval(e);
        if (v.index() != 2) throw Faulted{};
        return std::get<bool>(v);
    }

    std::int64_t as_int(const Val& v) {
        if (v.index() != 1) throw Faulted{};
        return std::get<std::int64_t>(v);
    }

    void stmt(const Stmt& s) {
        step();
        log.push_back({EventKind::Statement, &s, -1});
        switch (s.kind) {
            case StmtKind::VarDecl: {
                Val v = eval(*s.value);
                if (v.index() == 0) throw Faulted{};
                if (s.declared_type && type_index(*s.declared_type) != v.index()) throw Faulted{};
                env_.back().back()[s.name] = v;
                break;
            }
            case StmtKind::Assign: {
                Val v = eval(*s.value);
                Val* slot = find(s.name);
                if (!slot || slot->index() != v.index()) throw Faulted{};
                *slot = v;
                break;
            }
            case StmtKind::IndexAssign: {
                Val i = eval(*s.index);
                Val v = eval(*s.value);
                Val* slot = find(s.name);
                if (!slot || slot->index() != 4) throw Faulted{};
                auto& a = std::get<Array>(*slot);
                std::int64_t idx = as_int(i);
                std::int64_t val = as_int(v);
                if (idx < 0 || idx >= static_cast<std::int64_t>(a.size())) throw Thrown{"IndexError"};
                a[static_cast<std::size_t>(idx)] = val;
                break;
            }
            case StmtKind::If:
                if (guard(*s.value)) {
                    block(s.body);
                } else {
                    block(s.alternative);
                }
                break;
            case StmtKind::While:
                while (guard(*s.value)) block(s.body);
                break;
            case StmtKind::For:
                env_.back().emplace_back();
                try {
                    if (s.init) stmt(*s.init);
                    while (!s.value || guard(*s.value)) {
                        block(s.body);
                        if (s.step) stmt(*s.step);
                    }
                } catch (...) {
                    env_.back().pop_back();
                    throw;
                }
                env_.back().pop_back();
                break;
            case StmtKind::Return: throw ReturnSignal{s.value ? eval(*s.value) : Val{Nothing{}}};
            case StmtKind::Throw:
                if (s.value) eval(*s.value);
                throw Thrown{s.name};
            case StmtKind::Try: {
                std::string caught;
                try {
                    block(s.body);
                    break;
                } catch (Thrown& t) {
                    if (!s.catch_filter.empty() && s.catch_filter != t.name) throw;
                    caught = t.name;
                }
                env_.back().emplace_back();
                env_.back().back()[s.name] = Val{caught};
                try {
                    block(s.alternative);
                } catch (...) {
                    env_.back().pop_back();
                    throw;
                }
                env_.back().pop_back();
                break;
            }
            case StmtKind::ExprStmt: eval(*s.value); break;
        }
    }

    Val eval(const Expr& e) {
        step();
        Val v = eval_inner(e);
        log.push_back({EventKind::Expression, &e, v.index() == 2 ? (std::get<bool>(v) ? 1 : 0) : -1});
        return v;
    }

    Val eval_inner(const Expr& e) {
        switch (e.kind) {
            case ExprKind::IntLiteral: return e.int_value;
            case ExprKind::BoolLiteral: return e.bool_value;
            case ExprKind::StringLiteral: return e.text;
            case ExprKind::ArrayLiteral: {
                Array a;
                for (const auto& o : e.operands) a.push_back(as_int(eval(*o)));
                return a;
            }
            case ExprKind::Variable: {
                Val* slot = find(e.text);
                if (!slot) throw Faulted{};
                return *slot;
            }
            case ExprKind::Negate: return static_cast<std::int64_t>(0ULL - static_cast<std::uint64_t>(as_int(eval(*e.operands[0]))));
            case ExprKind::Not: return !guard(*e.operands[0]);
            case ExprKind::And: return guard(*e.operands[0]) ? guard(*e.operands[1]) : false;
            case ExprKind::Or: return guard(*e.operands[0]) ? true : guard(*e.operands[1]);
            case ExprKind::Binary: {
                Val l = eval(*e.operands[0]);
                Val r = eval(*e.operands[1]);
                if (e.op == BinaryOp::Eq || e.op == BinaryOp::Ne) {
                    if (l.index() != r.index()) throw Faulted{};
                    return (l == r) == (e.op == BinaryOp::Eq);
                }
                if (l.index() == 3 && r.index() == 3) {
                    const auto& a = std::get<std::string>(l);
                    const auto& b = std::get<std::string>(r);
                    switch (e.op) {
                        case BinaryOp::Add: return a + b;
                        case BinaryOp::Lt: return a < b;
                        case BinaryOp::Le: return a <= b;
                        case BinaryOp::Gt: return a > b;
                        case BinaryOp::Ge: return a >= b;
                        default: throw Faulted{};
                    }
                }
                const std::int64_t a = as_int(l);
                const std::int64_t b = as_int(r);
                const auto ua = static_cast<std::uint64_t>(a);
                const auto ub = static_cast<std::uint64_t>(b);
                switch (e.op) {
                    case BinaryOp::Add: return static_cast<std::int64_t>(ua + ub);
                    case BinaryOp::Sub: return static_cast<std::int64_t>(ua - ub);
                    case BinaryOp::Mul: return static_cast<std::int64_t>(ua * ub);
                    case BinaryOp::Div:
                        if (b == 0) throw Thrown{"DivideByZero"};
                        if (a == LLONG_MIN && b == -1) return a;
                        return a / b;
                    case BinaryOp::Mod:
                        if (b == 0) throw Thrown{"DivideByZero"};
                        if (a == LLONG_MIN && b == -1) return std::int64_t{0};
                        return a % b;
                    case BinaryOp::Lt: return a < b;
                    case BinaryOp::Le: return a <= b;
                    case BinaryOp::Gt: return a > b;
                    case BinaryOp::Ge: return a >= b;
                    default: throw Faulted{};
                }
            }
            case ExprKind::Index: {
                Val t = eval(*e.operands[0]);
                std::int64_t i = as_int(eval(*e.operands[1]));
                if (t.index() == 4) {
                    const auto& a = std::get<Array>(t);
                    if (i < 0 || i >= static_cast<std::int64_t>(a.size())) throw Thrown{"IndexError"};
                    return a[static_cast<std::size_t>(i)];
                }
                if (t.index() == 3) {
                    const auto& s = std::get<std::string>(t);
                    if (i < 0 || i >= static_cast<std::int64_t>(s.size())) throw Thrown{"IndexError"};
                    return std::string(1, s[static_cast<std::size_t>(i)]);
                }
                throw Faulted{};
            }
            case ExprKind::Call: return call(e);
        }
        throw Faulted{};
    }

    Val invoke(const Function& fn, std::vector<Val> args) {
        if (depth_ >= max_depth_) throw Faulted{};
        if (args.size() != fn.params.size()) throw Faulted{};
        std::vector<std::map<std::string, Val>> frame(1);
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i].index() != type_index(fn.params[i].type)) throw Faulted{};
            frame[0][fn.params[i].name] = args[i];
        }
        env_.push_back(std::move(frame));
        ++depth_;
        Val result = Nothing{};
        bool returned = false;
        try {
            block(fn.body);
        } catch (ReturnSignal& r) {
            result = std::move(r.value);
            returned = true;
        } catch (...) {
            env_.pop_back();
            --depth_;
            throw;
        }
        env_.pop_back();
        --depth_;
        (void)returned;
        if (result.index() != type_index(fn.return_type)) throw Faulted{};
        return result;
    }

    Val call(const Expr& e) {
        const std::string& name = e.text;
        if (name == "assert_throws") {
            try {
                eval(*e.operands[0]);
            } catch (Thrown& t) {
                if (t.name == e.operands[1]->text) return Nothing{};
                throw Failed{};
            }
            throw Failed{};
        }
        if (const Function* fn = program_.find_function(name)) {
            std::vector<Val> args;
            for (const auto& o : e.operands) args.push_back(eval(*o));
            return invoke(*fn, std::move(args));
        }
        std::vector<Val> args;
        for (const auto& o : e.operands) args.push_back(eval(*o));
        if (name == "call") {
            if (args[0].index() != 3) throw Faulted{};
            const Function* fn = program_.find_function(std::get<std::string>(args[0]));
            if (!fn) throw Thrown{"UnknownFunction"};
            args.erase(args.begin());
            return invoke(*fn, std::move(args));
        }
        if (name == "len") {
            if (args[0].index() == 3) return static_cast<std::int64_t>(std::get<std::string>(args[0]).size());
            if (args[0].index() == 4) return static_cast<std::int64_t>(std::get<Array>(args[0]).size());
            throw Faulted{};
        }
        if (name == "push") {
            if (args[0].index() != 4) throw Faulted{};
            Array a = std::get<Array>(args[0]);
            a.push_back(as_int(args[1]));
            return a;
        }
        if (name == "slice") {
            if (args[0].index() != 4) throw Faulted{};
            const Array& a = std::get<Array>(args[0]);
            std::int64_t from = as_int(args[1]), to = as_int(args[2]);
            if (from < 0 || to < from || to > static_cast<std::int64_t>(a.size())) throw Thrown{"IndexError"};
            return Array(a.begin() + from, a.begin() + to);
        }
        if (name == "substr") {
            if (args[0].index() != 3) throw Faulted{};
            const std::string& s = std::get<std::string>(args[0]);
            std::int64_t start = as_int(args[1]), count = as_int(args[2]);
            const auto n = static_cast<std::int64_t>(s.size());
            if (start < 0 || count < 0 || start + count > n) throw Thrown{"IndexError"};
            return s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(count));
        }
        if (name == "char_at") {
            if (args[0].index() != 3) throw Faulted{};
            const std::string& s = std::get<std::string>(args[0]);
            std::int64_t i = as_int(args[1]);
            if (i < 0 || i >= static_cast<std::int64_t>(s.size())) throw Thrown{"IndexError"};
            return std::string(1, s[static_cast<std::size_t>(i)]);
        }
        if (name == "to_int") {
            if (args[0].index() != 3) throw Faulted{};
            const std::string& s = std::get<std::string>(args[0]);
            std::size_t i = 0;
            bool negative = false;
            if (i < s.size() && s[i] == '-') {
                negative = true;
                ++i;
            }
            if (i == s.size()) throw Thrown{"ValueError"};
            // Accumulate as negative to reach INT64_MIN.
            std::int64_t acc = 0;
            for (; i < s.size(); ++i) {
                if (s[i] < '0' || s[i] > '9') throw Thrown{"ValueError"};
                const int d = s[i] - '0';
                if (acc < (LLONG_MIN + d) / 10) throw Thrown{"ValueError"};
                acc = acc * 10 - d;
            }
            if (!negative) {
                if (acc == LLONG_MIN) throw Thrown{"ValueError"};
                acc = -acc;
            }
            return acc;
        }
        if (name == "str") {
            if (args[0].index() == 3) return args[0];
            if (args[0].index() == 1) return std::to_string(std::get<std::int64_t>(args[0]));
            if (args[0].index() == 2) return std::string(std::get<bool>(args[0]) ? "true" : "false");
            if (args[0].index() == 4) {
                std::string out = "[";
                const auto& a = std::get<Array>(args[0]);
                for (std::size_t i = 0; i < a.size(); ++i) out += (i ? ", " : "") + std::to_string(a[i]);
                return out + "]";
            }
            throw Faulted{};
        }
        if (name == "assert_eq") {
            if (!(args[0] == args[1])) throw Failed{};
            return Nothing{};
        }
        if (name == "assert_true") {
            if (args[0].index() != 2) throw Faulted{};
            if (!std::get<bool>(args[0])) throw Failed{};
            return Nothing{};
        }
        throw Faulted{};
    }

    const SourceProgram& program_;
    std::uint64_t max_steps_;
    std::uint32_t max_depth_;
    std::uint64_t steps_ = 0;
    std::uint32_t depth_ = 0;
    std::map<std::string, Val> globals_;
    std::vector<std::vector<std::map<std::string, Val>>> env_;
};

// --- structural analysis ---------------------------------------------------

struct Structure {
    std::map<const void*, CoverageEntity> line_of_stmt;
    std::map<const void*, const Stmt*> guard_owner;
    struct Atom {
        NodeId root;
        std::uint32_t index;
        FileIndex file;
        std::uint32_t line;
    };
    std::map<const void*, Atom> atoms;
};

bool is_logical(const Expr& e) { return e.kind == ExprKind::And || e.kind == ExprKind::Or || e.kind == ExprKind::Not; }

void walk_expr(Structure& st, const Expr& e);

void flatten(Structure& st, const Expr& e, NodeId root, std::uint32_t& counter) {
    for (const auto& o : e.operands) {
        if (is_logical(*o)) {
            flatten(st, *o, root, counter);
        } else {
            st.atoms[o.get()] = {root, counter++, o->span.file, o->span.line};
            walk_expr(st, *o);
        }
    }
}

void walk_expr(Structure& st, const Expr& e) {
    if (is_logical(e)) {
        std::uint32_t counter = 0;
        flatten(st, e, e.id, counter);
        return;
    }
    for (const auto& o : e.operands) walk_expr(st, *o);
}

void collect_line_stmts(std::vector<const Stmt*>& out, const Stmt& s, bool listed) {
    if (listed) out.push_back(&s);
    if (s.init) collect_line_stmts(out, *s.init, false);
    if (s.step) collect_line_stmts(out, *s.step, false);
    for (const auto& c : s.body) collect_line_stmts(out, *c, true);
    for (const auto& c : s.alternative) collect_line_stmts(out, *c, true);
}

void walk_stmt_exprs(Structure& st, const Stmt& s) {
    if (s.is_guarded()) st.guard_owner[s.value.get()] = &s;
    if (s.init) walk_stmt_exprs(st, *s.init);
    if (s.step) walk_stmt_exprs(st, *s.step);
    if (s.index) walk_expr(st, *s.index);
    if (s.value) walk_expr(st, *s.value);
    for (const auto& c : s.body) walk_stmt_exprs(st, *c);
    for (const auto& c : s.alternative) walk_stmt_exprs(st, *c);
}

Structure analyze(const SourceProgram& program) {
    Structure st;
    std::vector<const Stmt*> listed;
    for (const auto& g : program.globals) collect_line_stmts(listed, *g, true);
    for (const auto& fn : program.functions) {
        for (const auto& s : fn.body) collect_line_stmts(listed, *s, true);
    }
    std::map<std::pair<FileIndex, std::uint32_t>, NodeId> owner;
    for (const Stmt* s : listed) {
        auto key = std::make_pair(s->span.file, s->span.line);
        auto it = owner.find(key);
        if (it == owner.end() || s->id < it->second) owner[key] = s->id;
    }
    for (const Stmt* s : listed) {
        st.line_of_stmt[s] = CoverageEntity::make_line(s->span.file, s->span.line, owner[{s->span.file, s->span.line}]);
    }
    for (const auto& g : program.globals) walk_stmt_exprs(st, *g);
    for (const auto& fn : program.functions) {
        for (const auto& s : fn.body) walk_stmt_exprs(st, *s);
    }
    return st;
}

}  // namespace

EntitySet derive_coverage(const SourceProgram& program, const std::vector<Event>& log) {
    const Structure st = analyze(program);
    EntitySet out;
    for (const Event& ev : log) {
        if (ev.kind == EventKind::Statement) {
            if (auto it = st.line_of_stmt.find(ev.node); it != st.line_of_stmt.end()) out.insert(it->second);
            continue;
        }
        if (ev.bool_value < 0) continue;
        const bool value = ev.bool_value == 1;
        if (auto it = st.guard_owner.find(ev.node); it != st.guard_owner.end()) {
            const Stmt& s = *it->second;
            out.insert(CoverageEntity::make_arm(s.span.file, s.span.line, s.id, value));
        }
        if (auto it = st.atoms.find(ev.node); it != st.atoms.end()) {
            const auto& atom = it->second;
            out.insert(CoverageEntity::make_condition(atom.file, atom.line, atom.root, atom.index, value));
        }
    }
    return out;
}

EntitySet enumerate_entities(const SourceProgram& program) {
    const Structure st = analyze(program);
    EntitySet out;
    for (const auto& [node, entity] : st.line_of_stmt) out.insert(entity);
    for (const auto& [node, s] : st.guard_owner) {
        out.insert(CoverageEntity::make_arm(s->span.file, s->span.line, s->id, true));
        out.insert(CoverageEntity::make_arm(s->span.file, s->span.line, s->id, false));
    }
    for (const auto& [node, atom] : st.atoms) {
        for (bool v : {true, false}) out.insert(CoverageEntity::make_condition(atom.file, atom.line, atom.root, atom.index, v));
    }
    return out;
}

TraceResult trace_test(const SourceProgram& program, const TestDecl& test, std::uint64_t max_steps,
                       std::uint32_t max_depth) {
    TraceResult result;
    Tracer tracer(program, max_steps, max_depth);
    try {
        tracer.run(test);
        result.outcome = Outcome::Pass;
    } catch (const Failed&) {
        result.outcome = Outcome::Fail;
    } catch (const Thrown&) {
        result.outcome = Outcome::Error;
    } catch (const Faulted&) {
        result.outcome = Outcome::Error;
    } catch (const ReturnSignal&) {
        result.outcome = Outcome::Error;
    } catch (const OutOfSteps&) {
        result.outcome = Outcome::Timeout;
    }
    result.log = std::move(tracer.log);
    result.coverage = derive_coverage(program, result.log);
    return result;
}

}  // namespace oracle
