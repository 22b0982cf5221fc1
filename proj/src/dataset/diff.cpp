#include "procure/dataset/diff.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace procure::dataset {
namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

// Longest first so the first prefix match wins.
constexpr std::array<std::string_view, 24> kOps{"**=", "//=", ">>=", "<<=", "...", "**", "//", "<<",
                                                ">>", "<=", ">=", "==", "!=", "->", ":=", "+=",
                                                "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@="};

std::size_t string_end(std::string_view s, std::size_t quote_at) {
  char q = s[quote_at];
  bool triple = s.compare(quote_at, 3, std::string(3, q)) == 0;
  std::size_t i = quote_at + (triple ? 3 : 1);
  while (i < s.size()) {
    char c = s[i];
    if (c == '\\') {
      i += 2;
      continue;
    }
    if (triple) {
      if (s.compare(i, 3, std::string(3, q)) == 0) return i + 3;
    } else {
      if (c == q) return i + 1;
      if (c == '\n') return i;
    }
    ++i;
  }
  return s.size();
}

}  // namespace

std::vector<LexToken> lex_tokens(std::string_view s) {
  std::vector<LexToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c) || c == '\\') {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (ident_start(c)) {
      while (i < s.size() && ident_char(static_cast<unsigned char>(s[i]))) ++i;
      // String prefixes such as f"..." or rb'...' belong to the literal.
      if (i < s.size() && (s[i] == '"' || s[i] == '\'') && i - start <= 2) {
        std::string prefix(s.substr(start, i - start));
        std::transform(prefix.begin(), prefix.end(), prefix.begin(), ::tolower);
        if (prefix.find_first_not_of("rbfu") == std::string::npos) i = string_end(s, i);
      }
    } else if (c == '"' || c == '\'') {
      i = string_end(s, i);
    } else if (std::isdigit(c) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      while (i < s.size()) {
        unsigned char d = static_cast<unsigned char>(s[i]);
        if (std::isalnum(d) || d == '.' || d == '_') {
          ++i;
        } else if ((d == '+' || d == '-') && (s[i - 1] == 'e' || s[i - 1] == 'E') &&
                   !(s[start] == '0' && i > start + 1 && (s[start + 1] == 'x' || s[start + 1] == 'X'))) {
          ++i;
        } else {
          break;
        }
      }
    } else {
      std::size_t len = 1;
      for (auto op : kOps) {
        if (s.compare(i, op.size(), op) == 0) {
          len = op.size();
          break;
        }
      }
      i += len;
    }
    out.push_back({s.substr(start, i - start), start, i});
  }
  return out;
}

std::vector<CharSpan> annotate_diff(std::string_view original, std::string_view counterfactual) {
  auto a = lex_tokens(original);
  auto b = lex_tokens(counterfactual);
  const std::size_t n = a.size(), m = b.size();
  // best[i][j]: maximal matched length of b over suffixes a[i..], b[j..].
  std::vector<std::size_t> best((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return best[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      std::size_t v = std::max(at(i + 1, j), at(i, j + 1));
      if (a[i].text == b[j].text) v = std::max(v, at(i + 1, j + 1) + b[j].text.size());
      at(i, j) = v;
    }
  }
  std::vector<bool> matched(m, false);
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i].text == b[j].text && at(i, j) == at(i + 1, j + 1) + b[j].text.size()) {
      matched[j] = true;
      ++i;
      ++j;
    } else if (at(i, j) == at(i + 1, j)) {
      ++i;
    } else {
      ++j;
    }
  }
  std::vector<CharSpan> spans;
  for (std::size_t k = 0; k < m; ++k) {
    if (matched[k]) continue;
    if (!spans.empty() && spans.back().end == b[k].begin) {
      spans.back().end = b[k].end;
    } else {
      spans.push_back({b[k].begin, b[k].end});
    }
  }
  return spans;
}

}  // namespace procure::dataset
