#include "procure/validate/validate.hpp"

#include <chrono>
#include <regex>
#include <stdexcept>
#include <string>

#include "procure/code/cfg.hpp"
#include "procure/code/digest.hpp"
#include "procure/errors.hpp"

namespace procure::validate {
namespace {

constexpr std::string_view kStageFilter = "fast-filter";
constexpr std::string_view kStageTests = "tests";

ValidationOutcome filtered(Verdict v, std::string detail, double ms) {
  ValidationOutcome o;
  o.verdict = v;
  o.detail = std::move(detail);
  o.duration_ms = ms;
  o.stage = std::string(kStageFilter);
  return o;
}

// Module statements other than the entry function, rendered with resolved
// names. The CFG only covers the entry function, so everything else has to
// match exactly for a CFG match to mean anything.
std::string context_outside_entry(const code::SubjectProgram& program) {
  code::Serializer ser(program, false);
  std::string out;
  const code::Stmt* entry = &program.entry_function();
  for (const code::Stmt& s : program.module()) {
    if (&s == entry) {
      out += "<entry>";
      continue;
    }
    out += ser.stmt(s);
  }
  return out;
}

bool cfg_match(const code::SubjectProgram& a, const code::SubjectProgram& b) {
  try {
    if (context_outside_entry(a) != context_outside_entry(b)) return false;
    return code::cfg_equivalent(code::build_cfg(a), code::build_cfg(b));
  } catch (const UnsupportedConstruct&) {
    return false;
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string tail(const std::string& text, std::size_t n) {
  if (text.size() <= n) return text;
  return text.substr(text.size() - n);
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::AcceptedStructural: return "AcceptedStructural";
    case Verdict::AcceptedByTests: return "AcceptedByTests";
    case Verdict::FailureTypeI: return "FailureTypeI";
    case Verdict::FailureTypeII: return "FailureTypeII";
    case Verdict::RejectedByTests: return "RejectedByTests";
    case Verdict::ExecutionError: return "ExecutionError";
  }
  return "?";
}

Verdict verdict_from_string(std::string_view name) {
  for (Verdict v : {Verdict::AcceptedStructural, Verdict::AcceptedByTests, Verdict::FailureTypeI,
                    Verdict::FailureTypeII, Verdict::RejectedByTests, Verdict::ExecutionError}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown verdict '" + std::string(name) + "'");
}

bool is_accepted(Verdict v) noexcept { return v == Verdict::AcceptedStructural || v == Verdict::AcceptedByTests; }

std::string compose(const std::string& candidate, const TestHarness& harness) {
  std::string out;
  if (!harness.prelude.empty()) {
    out += harness.prelude;
    out += "\n\n";
  }
  out += candidate;
  out += "\n\n";
  out += harness.test_code;
  if (out.empty() || out.back() != '\n') out += '\n';
  return out;
}

int count_tests(std::string_view test_code) {
  static const std::regex assert_re(R"((^|[\s;:])assert\b)");
  std::string text(test_code);
  auto begin = std::sregex_iterator(text.begin(), text.end(), assert_re);
  int n = static_cast<int>(std::distance(begin, std::sregex_iterator()));
  return n > 0 ? n : 1;
}

std::optional<ValidationOutcome> fast_filter(const code::SubjectProgram& original, const std::string& candidate,
                                             std::optional<perturb::Concept> kind) {
  auto start = std::chrono::steady_clock::now();
  if (code::raw_hash(candidate) == code::raw_hash(original.source())) {
    return filtered(Verdict::FailureTypeI, "candidate is identical to the original", elapsed_ms(start));
  }
  std::optional<code::SubjectProgram> parsed;
  try {
    parsed = code::SubjectProgram::parse(candidate, original.entry_point(), original.origin());
  } catch (const SyntaxError& e) {
    return filtered(Verdict::FailureTypeII, e.what(), elapsed_ms(start));
  } catch (const MissingEntryPoint& e) {
    return filtered(Verdict::FailureTypeII, e.what(), elapsed_ms(start));
  }
  if (kind == perturb::Concept::IndependentSwap) return std::nullopt;

  code::StructuralDigest a = code::structural_digest(original);
  code::StructuralDigest b = code::structural_digest(*parsed);
  if (a.ast_hash == b.ast_hash) {
    return filtered(Verdict::AcceptedStructural, "ast hash match", elapsed_ms(start));
  }
  if (a.alpha_hash == b.alpha_hash) {
    return filtered(Verdict::AcceptedStructural, "alpha hash match", elapsed_ms(start));
  }
  if (cfg_match(original, *parsed)) {
    return filtered(Verdict::AcceptedStructural, "control flow graphs match", elapsed_ms(start));
  }
  return std::nullopt;
}

ValidationOutcome run_tests(const std::string& candidate, const TestHarness& harness, const Sandbox& sandbox) {
  if (!(harness.timeout_s > 0)) throw std::invalid_argument("timeout must be positive");
  ExecResult r = sandbox.run(compose(candidate, harness), harness.timeout_s);
  ValidationOutcome o;
  o.stage = std::string(kStageTests);
  o.duration_ms = r.duration_ms;
  if (r.timed_out) {
    o.verdict = Verdict::ExecutionError;
    o.detail = "timeout after " + std::to_string(harness.timeout_s) + " s";
  } else if (r.signaled) {
    o.verdict = Verdict::ExecutionError;
    o.detail = "interpreter killed by signal " + std::to_string(r.exit_code - 128);
  } else if (r.exit_code == 0) {
    o.verdict = Verdict::AcceptedByTests;
    o.tests_run = count_tests(harness.test_code);
  } else {
    o.verdict = Verdict::RejectedByTests;
    o.tests_run = count_tests(harness.test_code);
    o.detail = "exit code " + std::to_string(r.exit_code) + ": " + tail(r.output, 400);
  }
  return o;
}

ValidationOutcome validate_candidate(const code::SubjectProgram& original, const std::string& candidate,
                                     const TestHarness& harness, const Sandbox& sandbox,
                                     std::optional<perturb::Concept> kind) {
  if (auto early = fast_filter(original, candidate, kind)) return *early;
  return run_tests(candidate, harness, sandbox);
}

}  // namespace procure::validate
