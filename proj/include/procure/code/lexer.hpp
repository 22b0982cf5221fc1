#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace procure::code {

enum class TokenKind { Name, Number, String, Op, Newline, Indent, Dedent, EndMarker };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t begin = 0;  // offset into the original source
  std::size_t end = 0;
  int line = 1;
};

/// Tokenizes Python 3 source. Emits NEWLINE/INDENT/DEDENT the way CPython's
/// tokenizer does; comments and blank lines produce nothing.
/// Throws SyntaxError on malformed input.
std::vector<Token> tokenize(std::string_view source);

/// Tokenizes an embedded expression (an f-string replacement field) as if it
/// were wrapped in parentheses. Offsets are shifted by `base`.
std::vector<Token> tokenize_expression(std::string_view text, std::size_t base, int line);

bool is_keyword(std::string_view word);
bool is_builtin(std::string_view word);

}  // namespace procure::code
