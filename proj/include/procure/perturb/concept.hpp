#pragma once

#include <array>
#include <string_view>
#include <vector>

namespace procure::perturb {

enum class Concept { IfElseFlip, DefUseBreak, IndependentSwap, NameRandom, NameShuffle };

inline constexpr std::array<Concept, 5> kAllConcepts{Concept::IfElseFlip, Concept::DefUseBreak,
                                                     Concept::IndependentSwap, Concept::NameRandom,
                                                     Concept::NameShuffle};

std::string_view to_string(Concept c) noexcept;

/// Throws std::invalid_argument for unknown names.
Concept concept_from_string(std::string_view name);

/// Comma-separated names, or "all".
std::vector<Concept> parse_concept_list(std::string_view csv);

}  // namespace procure::perturb
