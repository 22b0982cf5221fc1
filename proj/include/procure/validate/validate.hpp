#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "procure/code/program.hpp"
#include "procure/perturb/concept.hpp"
#include "procure/validate/sandbox.hpp"

namespace procure::validate {

enum class Verdict {
  AcceptedStructural,
  AcceptedByTests,
  FailureTypeI,
  FailureTypeII,
  RejectedByTests,
  ExecutionError,
};

std::string_view to_string(Verdict v) noexcept;
/// Throws std::invalid_argument for unknown names.
Verdict verdict_from_string(std::string_view name);
bool is_accepted(Verdict v) noexcept;

struct ValidationOutcome {
  Verdict verdict = Verdict::ExecutionError;
  std::string detail;
  int tests_run = 0;
  double duration_ms = 0;
  std::string stage;  // "fast-filter" or "tests"
};

struct TestHarness {
  std::string prelude;
  std::string test_code;
  double timeout_s = 10.0;
};

/// prelude, candidate, then test code, separated by blank lines.
std::string compose(const std::string& candidate, const TestHarness& harness);

/// Number of assert statements in the test code (at least 1).
int count_tests(std::string_view test_code);

/// Execution-free checks. Returns nullopt when tests are needed. Structural
/// acceptance is never granted for IndependentSwap.
std::optional<ValidationOutcome> fast_filter(const code::SubjectProgram& original, const std::string& candidate,
                                             std::optional<perturb::Concept> kind = std::nullopt);

ValidationOutcome run_tests(const std::string& candidate, const TestHarness& harness, const Sandbox& sandbox);

ValidationOutcome validate_candidate(const code::SubjectProgram& original, const std::string& candidate,
                                     const TestHarness& harness, const Sandbox& sandbox,
                                     std::optional<perturb::Concept> kind = std::nullopt);

}  // namespace procure::validate
