#pragma once

// Test-only oracles for diff annotation: random token-sequence pairs and
// two independent minimal-edit computations.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

struct TokenPair {
  std::vector<std::string> original;
  std::vector<std::string> counterfactual;
  std::string original_text;
  std::string counterfactual_text;
};

inline std::string join_tokens(const std::vector<std::string>& toks, std::mt19937& gen) {
  static const char* kSeps[] = {" ", " ", " ", "\n", "\n    ", "  "};
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i > 0) out += kSeps[gen() % 6];
    out += toks[i];
  }
  return out;
}

/// Original of up to `max_tokens` tokens and a mutated copy (insertions,
/// deletions, substitutions, adjacent swaps), both capped at `max_tokens`.
inline TokenPair random_token_pair(std::uint32_t seed, std::size_t max_tokens = 64) {
  static const std::vector<std::string> vocab{"x",  "y",     "total", "i",   "n",  "=",     "+",      "-",  "*",
                                              "(",  ")",     ":",     "if",  "not", "else", "return", "for", "in",
                                              "0",  "1",     "42",    "==",  "<=",  ",",    "pcv_0",  "'s'", "[",
                                              "]",  "range", "len",   "+=",  "**",  "def",  "f",      "while"};
  std::mt19937 gen(seed);
  TokenPair p;
  std::size_t len = 1 + gen() % max_tokens;
  for (std::size_t i = 0; i < len; ++i) p.original.push_back(vocab[gen() % vocab.size()]);
  p.counterfactual = p.original;
  int edits = static_cast<int>(gen() % 6);
  for (int e = 0; e < edits; ++e) {
    auto& cf = p.counterfactual;
    std::size_t pos = cf.empty() ? 0 : gen() % cf.size();
    switch (gen() % 4) {
      case 0:
        if (cf.size() < max_tokens) cf.insert(cf.begin() + pos, vocab[gen() % vocab.size()]);
        break;
      case 1:
        if (cf.size() > 1) cf.erase(cf.begin() + pos);
        break;
      case 2:
        if (!cf.empty()) cf[pos] = vocab[gen() % vocab.size()];
        break;
      default:
        if (pos + 1 < cf.size()) std::swap(cf[pos], cf[pos + 1]);
        break;
    }
  }
  p.original_text = join_tokens(p.original, gen);
  p.counterfactual_text = join_tokens(p.counterfactual, gen);
  return p;
}

/// Minimal number of counterfactual characters an edit script (deletions
/// from the original, insertions of counterfactual tokens, matches of equal
/// tokens) has to insert. Top-down recursion over positions.
inline std::size_t min_inserted_chars(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> cost = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (j == b.size()) return 0;
    if (i == a.size()) {
      std::size_t s = 0;
      for (std::size_t k = j; k < b.size(); ++k) s += b[k].size();
      return s;
    }
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t best = std::min(cost(i + 1, j), b[j].size() + cost(i, j + 1));
    if (a[i] == b[j]) best = std::min(best, cost(i + 1, j + 1));
    memo[key] = best;
    return best;
  };
  return cost(0, 0);
}

/// Exhaustive version for short inputs: try every subset of counterfactual
/// tokens as the kept part and test it for being a subsequence.
inline std::size_t min_inserted_chars_exhaustive(const std::vector<std::string>& a,
                                                 const std::vector<std::string>& b) {
  std::size_t total = 0;
  for (const auto& t : b) total += t.size();
  std::size_t best_kept = 0;
  for (std::uint32_t mask = 0; mask < (1u << b.size()); ++mask) {
    std::size_t ai = 0, kept = 0;
    bool ok = true;
    for (std::size_t k = 0; k < b.size() && ok; ++k) {
      if (!(mask & (1u << k))) continue;
      while (ai < a.size() && a[ai] != b[k]) ++ai;
      if (ai == a.size()) ok = false;
      else {
        ++ai;
        kept += b[k].size();
      }
    }
    if (ok) best_kept = std::max(best_kept, kept);
  }
  return total - best_kept;
}

}  // namespace testing_support
