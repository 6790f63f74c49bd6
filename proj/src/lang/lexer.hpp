#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tutorforge::lang::detail {

enum class Tok : std::uint8_t {
    End,
    Ident,
    Int,
    String,
    // keywords
    KwFunc,
    KwVar,
    KwIf,
    KwElse,
    KwWhile,
    KwFor,
    KwReturn,
    KwThrow,
    KwTry,
    KwCatch,
    KwTest,
    KwTrue,
    KwFalse,
    KwAnd,
    KwOr,
    KwNot,
    KwInt,
    KwBool,
    KwString,
    KwVoid,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semicolon,
    Colon,
    Arrow,
    Assign,
    EqEq,
    NotEq,
    Less,
    LessEq,
    Greater,
    GreaterEq,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    AmpAmp,
    PipePipe,
    Bang,
};

std::string_view describe(Tok tok);

struct Token {
    Tok kind = Tok::End;
    std::string text;  // identifier name, decoded string literal, or digits
    std::uint32_t line = 1;
    std::uint32_t column = 1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
};

struct Annotation {
    std::uint32_t line = 0;
    std::string payload;  // text after `//@concepts:`
};

struct LexResult {
    std::vector<Token> tokens;  // always terminated by Tok::End
    std::vector<Annotation> annotations;
};

/// Throws ParseError on malformed input.
LexResult lex(std::string_view path, std::string_view text);

}  // namespace tutorforge::lang::detail
