#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "procure/code/program.hpp"
#include "procure/perturb/concept.hpp"

namespace procure::perturb {

struct StatementAnchor {
  int index = 0;
  friend bool operator==(const StatementAnchor&, const StatementAnchor&) = default;
};

struct StatementPairAnchor {
  int first = 0;
  int second = 0;
  friend bool operator==(const StatementPairAnchor&, const StatementPairAnchor&) = default;
};

struct IdentifierAnchor {
  std::vector<std::string> names;
  friend bool operator==(const IdentifierAnchor&, const IdentifierAnchor&) = default;
};

using SiteAnchor = std::variant<StatementAnchor, StatementPairAnchor, IdentifierAnchor>;

struct PerturbationSite {
  Concept kind = Concept::IfElseFlip;
  SiteAnchor anchor;
  std::vector<std::string> elements;
  std::string notes;  // one-line description used as static analysis hint

  friend bool operator==(const PerturbationSite& a, const PerturbationSite& b) {
    return a.kind == b.kind && a.anchor == b.anchor;
  }
};

struct CounterfactualCandidate {
  Concept kind = Concept::IfElseFlip;
  std::string source;
  std::optional<PerturbationSite> site;  // absent for LLM output
  std::set<int> impact_region;
  std::optional<std::map<std::string, std::string>> rename_map;
  int attempt = 1;
};

/// Names that callers outside the function rely on, e.g. keyword arguments
/// used by the test suite. Such parameters are never renamed.
struct SiteOptions {
  std::set<std::string> protected_names;
};

/// Every site whose preconditions hold, in a deterministic order. Programs
/// with unsupported constructs have no sites.
std::vector<PerturbationSite> enumerate_sites(const code::SubjectProgram& program, Concept kind,
                                              const SiteOptions& options = {});

/// Throws NotApplicable if `site` is not a current site of `program`.
CounterfactualCandidate apply(const code::SubjectProgram& program, const PerturbationSite& site,
                              std::uint64_t seed, const SiteOptions& options = {});

/// Seeded uniform choice among `count` sites for one task/concept pair.
std::size_t select_site(std::size_t count, std::uint64_t seed, std::string_view task_id, Concept kind);

/// Names passed as keyword arguments anywhere in `code` (lenient scan).
std::set<std::string> keyword_argument_names(std::string_view code);

/// `pcv_<k>` (or `pcv_<k>_<seed mod 997>` for nonzero seed), with k the
/// smallest value that avoids `taken`.
std::string fresh_name(const std::set<std::string>& taken, std::uint64_t seed, int start = 0);

}  // namespace procure::perturb
