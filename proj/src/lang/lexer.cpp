#include "lexer.hpp"

#include <array>
#include <cctype>
#include <utility>

#include "tutorforge/lang/parser.hpp"

namespace tutorforge::lang::detail {

namespace {

constexpr std::string_view kConceptsMarker = "//@concepts:";

constexpr std::array<std::pair<std::string_view, Tok>, 20> kKeywords{{
    {"func", Tok::KwFunc},     {"var", Tok::KwVar},       {"if", Tok::KwIf},
    {"else", Tok::KwElse},     {"while", Tok::KwWhile},   {"for", Tok::KwFor},
    {"return", Tok::KwReturn}, {"throw", Tok::KwThrow},   {"try", Tok::KwTry},
    {"catch", Tok::KwCatch},   {"test", Tok::KwTest},     {"true", Tok::KwTrue},
    {"false", Tok::KwFalse},   {"and", Tok::KwAnd},       {"or", Tok::KwOr},
    {"not", Tok::KwNot},       {"int", Tok::KwInt},       {"bool", Tok::KwBool},
    {"string", Tok::KwString}, {"void", Tok::KwVoid},
}};

class Lexer {
public:
    Lexer(std::string_view path, std::string_view text) : path_(path), text_(text) {}

    LexResult run() {
        LexResult out;
        while (true) {
            skip_trivia(out.annotations);
            if (at_end()) {
                Token end;
                end.kind = Tok::End;
                end.line = line_;
                end.column = column_;
                end.begin = end.end = static_cast<std::uint32_t>(pos_);
                out.tokens.push_back(std::move(end));
                return out;
            }
            out.tokens.push_back(next_token());
        }
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    [[noreturn]] void fail(std::uint32_t line, std::uint32_t column, std::string message) const {
        throw ParseError(std::string(path_), line, column, std::move(message));
    }

    void skip_trivia(std::vector<Annotation>& annotations) {
        while (!at_end()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                const std::uint32_t line = line_;
                const std::size_t start = pos_;
                while (!at_end() && peek() != '\n') advance();
                const std::string_view comment = text_.substr(start, pos_ - start);
                if (comment.starts_with(kConceptsMarker)) {
                    annotations.push_back({line, std::string(comment.substr(kConceptsMarker.size()))});
                }
            } else if (c == '/' && peek(1) == '*') {
                const std::uint32_t line = line_, column = column_;
                advance();
                advance();
                while (!(peek() == '*' && peek(1) == '/')) {
                    if (at_end()) fail(line, column, "unterminated block comment");
                    advance();
                }
                advance();
                advance();
            } else {
                return;
            }
        }
    }

    Token next_token() {
        Token tok;
        tok.line = line_;
        tok.column = column_;
        tok.begin = static_cast<std::uint32_t>(pos_);
        const char c = peek();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance();
            tok.text = std::string(text_.substr(start, pos_ - start));
            tok.kind = Tok::Ident;
            for (const auto& [word, kind] : kKeywords) {
                if (word == tok.text) {
                    tok.kind = kind;
                    break;
                }
            }
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
            if (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_') {
                fail(line_, column_, "invalid character in integer literal");
            }
            tok.text = std::string(text_.substr(start, pos_ - start));
            tok.kind = Tok::Int;
        } else if (c == '"') {
            tok.kind = Tok::String;
            advance();
            while (peek() != '"') {
                if (at_end() || peek() == '\n') fail(tok.line, tok.column, "unterminated string literal");
                if (peek() == '\\') {
                    advance();
                    switch (peek()) {
                        case 'n': tok.text.push_back('\n'); break;
                        case 't': tok.text.push_back('\t'); break;
                        case '"': tok.text.push_back('"'); break;
                        case '\\': tok.text.push_back('\\'); break;
                        default: fail(line_, column_, "unknown escape sequence");
                    }
                    advance();
                } else {
                    tok.text.push_back(peek());
                    advance();
                }
            }
            advance();
        } else {
            tok.kind = punctuation();
        }
        tok.end = static_cast<std::uint32_t>(pos_);
        return tok;
    }

    Tok punctuation() {
        const char c = peek();
        const char n = peek(1);
        auto two = [&](Tok kind) {
            advance();
            advance();
            return kind;
        };
        auto one = [&](Tok kind) {
            advance();
            return kind;
        };
        switch (c) {
            case '(': return one(Tok::LParen);
            case ')': return one(Tok::RParen);
            case '{': return one(Tok::LBrace);
            case '}': return one(Tok::RBrace);
            case '[': return one(Tok::LBracket);
            case ']': return one(Tok::RBracket);
            case ',': return one(Tok::Comma);
            case ';': return one(Tok::Semicolon);
            case ':': return one(Tok::Colon);
            case '+': return one(Tok::Plus);
            case '*': return one(Tok::Star);
            case '/': return one(Tok::Slash);
            case '%': return one(Tok::Percent);
            case '-': return n == '>' ? two(Tok::Arrow) : one(Tok::Minus);
            case '=': return n == '=' ? two(Tok::EqEq) : one(Tok::Assign);
            case '!': return n == '=' ? two(Tok::NotEq) : one(Tok::Bang);
            case '<': return n == '=' ? two(Tok::LessEq) : one(Tok::Less);
            case '>': return n == '=' ? two(Tok::GreaterEq) : one(Tok::Greater);
            case '&':
                if (n == '&') return two(Tok::AmpAmp);
                break;
            case '|':
                if (n == '|') return two(Tok::PipePipe);
                break;
            default: break;
        }
        std::string message = "unexpected character '";
        message.push_back(c);
        message += "'";
        fail(line_, column_, std::move(message));
    }

    std::string_view path_;
    std::string_view text_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t column_ = 1;
};

}  // namespace

std::string_view describe(Tok tok) {
    switch (tok) {
        case Tok::End: return "end of input";
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer literal";
        case Tok::String: return "string literal";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Comma: return "','";
        case Tok::Semicolon: return "';'";
        case Tok::Colon: return "':'";
        case Tok::Arrow: return "'->'";
        case Tok::Assign: return "'='";
        case Tok::EqEq: return "'=='";
        case Tok::NotEq: return "'!='";
        case Tok::Less: return "'<'";
        case Tok::LessEq: return "'<='";
        case Tok::Greater: return "'>'";
        case Tok::GreaterEq: return "'>='";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::Percent: return "'%'";
        case Tok::AmpAmp: return "'&&'";
        case Tok::PipePipe: return "'||'";
        case Tok::Bang: return "'!'";
        default: break;
    }
    for (const auto& [word, kind] : kKeywords) {
        if (kind == tok) return word;
    }
    return "token";
}

LexResult lex(std::string_view path, std::string_view text) { return Lexer(path, text).run(); }

}  // namespace tutorforge::lang::detail
