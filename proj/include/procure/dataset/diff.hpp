#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "procure/dataset/records.hpp"

namespace procure::dataset {

struct LexToken {
  std::string_view text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Identifiers, numbers, string literals, comments, operators and
/// punctuation, with whitespace skipped. Never fails: unterminated strings
/// run to the end of the line and stray bytes become one-byte tokens.
std::vector<LexToken> lex_tokens(std::string_view text);

/// Tokens of `counterfactual` left unmatched by the common subsequence of
/// maximal total matched length. Adjacent unmatched tokens with no gap
/// between them share one span.
std::vector<CharSpan> annotate_diff(std::string_view original, std::string_view counterfactual);

}  // namespace procure::dataset
