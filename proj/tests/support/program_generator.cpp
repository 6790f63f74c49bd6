#include "program_generator.hpp"

#include <random>
#include <vector>

namespace oracle {

namespace {

class Generator {
public:
    Generator(std::uint64_t seed, int max_statements) : rng_(seed), budget_(max_statements) {}

    GeneratedCase run() {
        GeneratedCase out;
        std::vector<std::string> lines;
        const int global_count = pick(0, 2);
        for (int g = 0; g < global_count && budget_ > 8; ++g) {
            const std::string name = "g" + std::to_string(g);
            lines.push_back("var " + name + " = " + std::to_string(pick(-3, 9)) + ";");
            globals_.push_back(name);
            spend();
        }
        const int function_count = pick(1, 4);
        for (int f = 0; f < function_count && budget_ > 2; ++f) {
            current_function_ = f;
            const int arity = pick(1, 3);
            std::vector<std::string> params;
            std::string header = "func f" + std::to_string(f) + "(";
            for (int p = 0; p < arity; ++p) {
                params.push_back("p" + std::to_string(p));
                header += (p ? ", " : "") + params.back() + ": int";
            }
            header += ") -> int {";
            lines.push_back(header);
            std::vector<std::string> scope = globals_;
            scope.insert(scope.end(), params.begin(), params.end());
            // Keep room for this function's final return and later functions.
            const int reserve = (function_count - f - 1) * 2 + 1;
            block(lines, scope, 1, 0, reserve);
            lines.push_back("    return " + int_expr(scope, 0) + ";");
            spend();
            lines.push_back("}");
            arities_.push_back(arity);
        }
        for (const auto& line : lines) out.program += line + "\n";
        out.statements = spent_;

        const int test_count = pick(1, 6);
        current_function_ = static_cast<int>(arities_.size());
        for (int t = 0; t < test_count; ++t) {
            out.tests += "test t" + std::to_string(t) + " {\n" + test_body() + "}\n";
        }
        out.test_count = test_count;
        return out;
    }

private:
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
    void spend() {
        --budget_;
        ++spent_;
    }

    static std::string indent(int depth) { return std::string(static_cast<std::size_t>(depth) * 4, ' '); }

    std::string literal() { return std::to_string(pick(-4, 12)); }

    std::string call_expr(const std::vector<std::string>& scope, int depth) {
        const int callee = pick(0, current_function_ - 1);
        std::string out = "f" + std::to_string(callee) + "(";
        for (int a = 0; a < arities_[static_cast<std::size_t>(callee)]; ++a) {
            out += (a ? ", " : "") + int_expr(scope, depth + 1);
        }
        return out + ")";
    }

    std::string int_expr(const std::vector<std::string>& scope, int depth) {
        const int choice = depth >= 2 ? pick(0, 1) : pick(0, 8);
        switch (choice) {
            case 0: return literal();
            case 1: return scope.empty() ? literal() : scope[static_cast<std::size_t>(pick(0, static_cast<int>(scope.size()) - 1))];
            case 2: return "(" + int_expr(scope, depth + 1) + " + " + int_expr(scope, depth + 1) + ")";
            case 3: return "(" + int_expr(scope, depth + 1) + " - " + int_expr(scope, depth + 1) + ")";
            case 4: return int_expr(scope, depth + 1) + " * " + int_expr(scope, depth + 1);
            case 5: return "(" + int_expr(scope, depth + 1) + " / " + (chance(0.7) ? std::to_string(pick(1, 4)) : int_expr(scope, depth + 1)) + ")";
            case 6: return "(" + int_expr(scope, depth + 1) + " % " + std::to_string(pick(2, 5)) + ")";
            case 7:
                if (current_function_ > 0 && depth == 0) return call_expr(scope, depth);
                return literal();
            default: return "-" + int_expr(scope, depth + 1);
        }
    }

    std::string bool_expr(const std::vector<std::string>& scope, int depth) {
        static const char* const kComparisons[] = {"<", "<=", ">", ">=", "==", "!="};
        const int choice = depth >= 2 ? 0 : pick(0, 7);
        switch (choice) {
            case 0:
            case 1:
            case 2: return int_expr(scope, 1) + " " + kComparisons[pick(0, 5)] + " " + int_expr(scope, 1);
            case 3: return "(" + bool_expr(scope, depth + 1) + (chance(0.8) ? " && " : " and ") + bool_expr(scope, depth + 1) + ")";
            case 4: return "(" + bool_expr(scope, depth + 1) + (chance(0.8) ? " || " : " or ") + bool_expr(scope, depth + 1) + ")";
            case 5: return (chance(0.8) ? "!(" : "not (") + bool_expr(scope, depth + 1) + ")";
            case 6: return chance(0.5) ? "true" : "false";
            default:
                return "(" + bool_expr(scope, depth + 1) + " && (" + bool_expr(scope, depth + 1) + " || " +
                       bool_expr(scope, depth + 1) + "))";
        }
    }

    // Emits statements into `lines` until the budget (minus `reserve`) or a random stop.
    void block(std::vector<std::string>& lines, std::vector<std::string> scope, int depth, int loop_depth,
               int reserve) {
        const int wanted = pick(1, 4);
        for (int i = 0; i < wanted && budget_ - reserve > 1; ++i) {
            statement(lines, scope, depth, loop_depth, reserve);
        }
    }

    std::string simple(std::vector<std::string>& scope) {
        const int choice = pick(0, 2);
        spend();
        if (choice == 0 || assignable(scope).empty()) {
            const std::string name = "v" + std::to_string(counter_++);
            std::string line = "var " + name + " = " + int_expr(scope, 0) + ";";
            scope.push_back(name);
            return line;
        }
        if (choice == 1 && current_function_ > 0) return call_expr(scope, 0) + ";";
        const auto targets = assignable(scope);
        const std::string& target = targets[static_cast<std::size_t>(pick(0, static_cast<int>(targets.size()) - 1))];
        return target + " = " + int_expr(scope, 0) + ";";
    }

    std::vector<std::string> assignable(const std::vector<std::string>& scope) const {
        std::vector<std::string> out;
        for (const auto& name : scope) {
            if (name[0] != 'i' && name[0] != 'c') out.push_back(name);
        }
        return out;
    }

    void statement(std::vector<std::string>& lines, std::vector<std::string>& scope, int depth, int loop_depth,
                   int reserve) {
        const std::string pad = indent(depth);
        const bool nested_ok = depth < 4 && budget_ - reserve > 4;
        const int choice = nested_ok ? pick(0, 9) : 0;
        switch (choice) {
            case 0:
            case 1:
            case 2: {
                std::string line = pad + simple(scope);
                if (chance(0.15) && budget_ - reserve > 1) line += " " + simple(scope);
                lines.push_back(line);
                return;
            }
            case 3:
            case 4: {
                spend();
                lines.push_back(pad + "if (" + bool_expr(scope, 0) + ") {");
                block(lines, scope, depth + 1, loop_depth, reserve);
                if (chance(0.5) && budget_ - reserve > 2) {
                    if (chance(0.4)) {
                        spend();
                        lines.push_back(pad + "} else if (" + bool_expr(scope, 0) + ") {");
                        block(lines, scope, depth + 1, loop_depth, reserve);
                    }
                    lines.push_back(pad + "} else {");
                    block(lines, scope, depth + 1, loop_depth, reserve);
                }
                lines.push_back(pad + "}");
                return;
            }
            case 5: {
                if (loop_depth >= 2) return statement(lines, scope, depth, 99, reserve);
                const std::string counter = "c" + std::to_string(counter_++);
                spend();
                spend();
                lines.push_back(pad + "var " + counter + " = 0;");
                scope.push_back(counter);
                lines.push_back(pad + "while (" + bool_expr(scope, 1) + " && " + counter + " < " +
                                std::to_string(pick(1, 3)) + ") {");
                spend();
                lines.push_back(indent(depth + 1) + counter + " = " + counter + " + 1;");
                block(lines, scope, depth + 1, loop_depth + 1, reserve);
                lines.push_back(pad + "}");
                return;
            }
            case 6: {
                if (loop_depth >= 2) return statement(lines, scope, depth, 99, reserve);
                const std::string var = "i" + std::to_string(counter_++);
                spend();
                lines.push_back(pad + "for (var " + var + " = 0; " + var + " < " + std::to_string(pick(0, 3)) + "; " +
                                var + " = " + var + " + 1) {");
                auto inner = scope;
                inner.push_back(var);
                block(lines, inner, depth + 1, loop_depth + 1, reserve);
                lines.push_back(pad + "}");
                return;
            }
            case 7: {
                spend();
                spend();
                lines.push_back(pad + "if (" + bool_expr(scope, 0) + ") {");
                lines.push_back(indent(depth + 1) + "throw Err" + std::to_string(pick(0, 2)) + ";");
                lines.push_back(pad + "}");
                return;
            }
            case 8: {
                spend();
                lines.push_back(pad + "try {");
                block(lines, scope, depth + 1, loop_depth, reserve);
                lines.push_back(pad + (chance(0.3) ? "} catch (Err0 e) {" : "} catch (e) {"));
                block(lines, scope, depth + 1, loop_depth, reserve);
                lines.push_back(pad + "}");
                return;
            }
            default: {
                spend();
                spend();
                lines.push_back(pad + "if (" + bool_expr(scope, 0) + ") {");
                lines.push_back(indent(depth + 1) + "return " + int_expr(scope, 0) + ";");
                lines.push_back(pad + "}");
                return;
            }
        }
    }

    std::string args_for(int callee) {
        std::string out;
        for (int a = 0; a < arities_[static_cast<std::size_t>(callee)]; ++a) out += (a ? ", " : "") + literal();
        return out;
    }

    std::string test_body() {
        std::string out;
        const int calls = pick(1, 3);
        for (int c = 0; c < calls; ++c) {
            const int callee = pick(0, static_cast<int>(arities_.size()) - 1);
            const std::string call = "f" + std::to_string(callee) + "(" + args_for(callee) + ")";
            switch (pick(0, 3)) {
                case 0: out += "    assert_eq(" + call + ", " + literal() + ");\n"; break;
                case 1: out += "    assert_true(" + call + " > " + literal() + ");\n"; break;
                case 2: out += "    assert_throws(" + call + ", Err" + std::to_string(pick(0, 2)) + ");\n"; break;
                default: out += "    var r" + std::to_string(c) + " = " + call + ";\n"; break;
            }
        }
        return out;
    }

    std::mt19937_64 rng_;
    int budget_;
    int spent_ = 0;
    int counter_ = 0;
    int current_function_ = 0;
    std::vector<std::string> globals_;
    std::vector<int> arities_;
};

}  // namespace

GeneratedCase generate_case(std::uint64_t seed, int max_statements) { return Generator(seed, max_statements).run(); }

}  // namespace oracle
