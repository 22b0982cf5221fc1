#include "procure/perturb/concept.hpp"

#include <stdexcept>
#include <string>

namespace procure::perturb {

std::string_view to_string(Concept c) noexcept {
  switch (c) {
    case Concept::IfElseFlip: return "IfElseFlip";
    case Concept::DefUseBreak: return "DefUseBreak";
    case Concept::IndependentSwap: return "IndependentSwap";
    case Concept::NameRandom: return "NameRandom";
    case Concept::NameShuffle: return "NameShuffle";
  }
  return "?";
}

Concept concept_from_string(std::string_view name) {
  for (Concept c : kAllConcepts) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown concept '" + std::string(name) + "'");
}

std::vector<Concept> parse_concept_list(std::string_view csv) {
  std::vector<Concept> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string_view item = csv.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == "all") {
      out.assign(kAllConcepts.begin(), kAllConcepts.end());
    } else if (!item.empty()) {
      Concept c = concept_from_string(item);
      bool seen = false;
      for (Concept o : out) seen = seen || o == c;
      if (!seen) out.push_back(c);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty concept list");
  return out;
}

}  // namespace procure::perturb
