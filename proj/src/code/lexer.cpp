#include "procure/code/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "procure/errors.hpp"

namespace procure::code {
namespace {

constexpr std::string_view kKeywords[] = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};

constexpr std::string_view kBuiltins[] = {
    "abs", "all", "any", "ascii", "bin", "bool", "breakpoint", "bytearray", "bytes",
    "callable", "chr", "classmethod", "compile", "complex", "delattr", "dict", "dir",
    "divmod", "enumerate", "eval", "exec", "filter", "float", "format", "frozenset",
    "getattr", "globals", "hasattr", "hash", "help", "hex", "id", "input", "int",
    "isinstance", "issubclass", "iter", "len", "list", "locals", "map", "max",
    "memoryview", "min", "next", "object", "oct", "open", "ord", "pow", "print",
    "property", "range", "repr", "reversed", "round", "set", "setattr", "slice",
    "sorted", "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip",
    "__import__", "__name__", "__file__", "__doc__", "Exception", "BaseException",
    "ValueError", "TypeError", "KeyError", "IndexError", "ZeroDivisionError",
    "AssertionError", "AttributeError", "RuntimeError", "StopIteration",
    "NotImplementedError", "NotImplemented", "OverflowError", "ArithmeticError",
    "LookupError", "NameError", "RecursionError", "Ellipsis", "aiter", "anext",
    "exit", "quit"};

// Longest-first so that the first match is the maximal munch.
constexpr std::string_view kOperators[] = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", ">>", "<<", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@",  "&",  "|",  "^",  "~",  "<",  ">",
    "(",   ")",   "[",   "]",   "{",   "}",  ",",  ":",  ";",  ".",  "=",  "!",
    "`"};

bool is_name_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) != 0 || c == '_' || u >= 0x80;
}

bool is_name_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_' || u >= 0x80;
}

bool is_string_prefix(std::string_view word) {
  if (word.size() > 2) return false;
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "r" || lower == "b" || lower == "u" || lower == "f" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf";
}

class Lexer {
 public:
  Lexer(std::string_view src, std::size_t base, int line, bool expression_mode)
      : src_(src), base_(base), line_(line), expression_mode_(expression_mode) {}

  std::vector<Token> run() {
    bool at_line_start = !expression_mode_;
    while (true) {
      if (at_line_start) {
        if (!handle_indentation()) break;
        at_line_start = false;
      }
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\f' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '\\') {
        std::size_t next = pos_ + 1;
        if (next < src_.size() && src_[next] == '\r') ++next;
        if (next < src_.size() && src_[next] == '\n') {
          pos_ = next + 1;
          ++line_;
        } else if (next >= src_.size()) {
          fail(pos_, "unexpected EOF after line continuation");
        } else {
          fail(pos_, "unexpected character after line continuation character");
        }
      } else if (c == '\n') {
        if (brackets_.empty() && !expression_mode_) {
          push(TokenKind::Newline, pos_, pos_ + 1, "\n");
          at_line_start = true;
        }
        ++pos_;
        ++line_;
      } else if (is_name_start(c)) {
        lex_name();
      } else if (std::isdigit(static_cast<unsigned char>(c)) != 0 ||
                 (c == '.' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) != 0)) {
        lex_number();
      } else if (c == '"' || c == '\'') {
        lex_string(pos_);
      } else {
        lex_operator();
      }
    }
    if (!brackets_.empty()) fail(src_.size(), "unexpected EOF: unclosed '" + std::string(1, brackets_.back()) + "'");
    if (!expression_mode_) {
      if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline &&
          tokens_.back().kind != TokenKind::Dedent) {
        push(TokenKind::Newline, src_.size(), src_.size(), "");
      }
      while (indents_.size() > 1) {
        indents_.pop_back();
        push(TokenKind::Dedent, src_.size(), src_.size(), "");
      }
    }
    push(TokenKind::EndMarker, src_.size(), src_.size(), "");
    return std::move(tokens_);
  }

 private:
  // Returns false once the input is exhausted.
  bool handle_indentation() {
    while (true) {
      int col = 0;
      std::size_t p = pos_;
      while (p < src_.size()) {
        char c = src_[p];
        if (c == ' ') {
          ++col;
        } else if (c == '\t') {
          col = (col / 8 + 1) * 8;
        } else if (c == '\f') {
          col = 0;
        } else {
          break;
        }
        ++p;
      }
      if (p >= src_.size()) {
        pos_ = p;
        return false;
      }
      char c = src_[p];
      if (c == '#' || c == '\n' || c == '\r') {
        while (p < src_.size() && src_[p] != '\n') ++p;
        if (p < src_.size()) {
          ++p;
          ++line_;
        }
        pos_ = p;
        continue;
      }
      pos_ = p;
      if (col > indents_.back()) {
        indents_.push_back(col);
        push(TokenKind::Indent, p, p, "");
      } else {
        while (col < indents_.back()) {
          indents_.pop_back();
          push(TokenKind::Dedent, p, p, "");
        }
        if (col != indents_.back()) fail(p, "unindent does not match any outer indentation level");
      }
      return true;
    }
  }

  void lex_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    std::string_view word = src_.substr(start, pos_ - start);
    if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') && is_string_prefix(word)) {
      lex_string(start);
      return;
    }
    push(TokenKind::Name, start, pos_, std::string(word));
  }

  void lex_number() {
    std::size_t start = pos_;
    bool hex = src_.size() > pos_ + 1 && src_[pos_] == '0' && (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X');
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.') {
        ++pos_;
        if (!hex && (c == 'e' || c == 'E') && pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
          ++pos_;
        }
      } else {
        break;
      }
    }
    push(TokenKind::Number, start, pos_, std::string(src_.substr(start, pos_ - start)));
  }

  void lex_string(std::size_t start) {
    std::size_t p = pos_;
    char quote = src_[p];
    bool triple = p + 2 < src_.size() && src_[p + 1] == quote && src_[p + 2] == quote;
    p += triple ? 3 : 1;
    int start_line = line_;
    while (true) {
      if (p >= src_.size()) {
        line_ = start_line;
        fail(start, triple ? "unterminated triple-quoted string literal" : "unterminated string literal");
      }
      char c = src_[p];
      if (c == '\\') {
        if (p + 1 < src_.size() && src_[p + 1] == '\n') ++line_;
        p += 2;
        continue;
      }
      if (c == '\n') {
        if (!triple) {
          line_ = start_line;
          fail(start, "unterminated string literal");
        }
        ++line_;
        ++p;
        continue;
      }
      if (c == quote) {
        if (!triple) {
          ++p;
          break;
        }
        if (p + 2 < src_.size() && src_[p + 1] == quote && src_[p + 2] == quote) {
          p += 3;
          break;
        }
      }
      ++p;
    }
    pos_ = p;
    Token tok{TokenKind::String, std::string(src_.substr(start, p - start)), base_ + start, base_ + p, start_line};
    tokens_.push_back(std::move(tok));
  }

  void lex_operator() {
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) != op) continue;
      if (op == "!" || op == "`") fail(pos_, "invalid character '" + std::string(op) + "'");
      char c = op[0];
      if (op.size() == 1 && (c == '(' || c == '[' || c == '{')) {
        brackets_.push_back(c);
      } else if (op.size() == 1 && (c == ')' || c == ']' || c == '}')) {
        char open = c == ')' ? '(' : (c == ']' ? '[' : '{');
        if (brackets_.empty()) fail(pos_, "unmatched '" + std::string(1, c) + "'");
        if (brackets_.back() != open) {
          fail(pos_, "closing parenthesis '" + std::string(1, c) + "' does not match opening parenthesis '" +
                         std::string(1, brackets_.back()) + "'");
        }
        brackets_.pop_back();
      }
      push(TokenKind::Op, pos_, pos_ + op.size(), std::string(op));
      pos_ += op.size();
      return;
    }
    fail(pos_, "invalid character '" + std::string(1, src_[pos_]) + "'");
  }

  void push(TokenKind kind, std::size_t begin, std::size_t end, std::string text) {
    tokens_.push_back(Token{kind, std::move(text), base_ + begin, base_ + end, line_});
  }

  [[noreturn]] void fail(std::size_t at, const std::string& message) {
    throw SyntaxError(base_ + at, line_, message);
  }

  std::string_view src_;
  std::size_t base_;
  int line_;
  bool expression_mode_;
  std::size_t pos_ = 0;
  std::vector<int> indents_{0};
  std::vector<char> brackets_;
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source, 0, 1, false).run(); }

std::vector<Token> tokenize_expression(std::string_view text, std::size_t base, int line) {
  return Lexer(text, base, line, true).run();
}

bool is_keyword(std::string_view word) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), word) != std::end(kKeywords);
}

bool is_builtin(std::string_view word) {
  return std::find(std::begin(kBuiltins), std::end(kBuiltins), word) != std::end(kBuiltins);
}

}  // namespace procure::code
