#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "procure/dataset/task.hpp"
#include "procure/llm/backend.hpp"
#include "procure/llm/prompt.hpp"
#include "procure/perturb/perturb.hpp"
#include "procure/validate/validate.hpp"

namespace procure::llm {

struct AttemptRecord {
  int index = 0;
  std::size_t prompt_bytes = 0;
  std::optional<std::int64_t> tokens;
  validate::Verdict verdict = validate::Verdict::ExecutionError;
  std::string detail;
  std::string raw_response;
};

struct GenerationLog {
  std::vector<AttemptRecord> attempts;
  std::int64_t total_tokens = 0;
  bool succeeded = false;
};

struct GenerationOptions {
  int max_retries = 5;
  PromptVariant variant = PromptVariant::Full;
  const PromptTemplate* prompt_template = nullptr;  // builtin when null
  perturb::SiteOptions site_options;
};

struct GenerationResult {
  std::optional<perturb::CounterfactualCandidate> candidate;  // set on success
  validate::ValidationOutcome outcome;                        // final verdict
  GenerationLog log;
};

using Validator = std::function<validate::ValidationOutcome(const std::string& candidate)>;

/// Prompt for one task; static info comes from the rule engine's sites.
std::string build_prompt(const dataset::TaskRecord& task, perturb::Concept kind, PromptVariant variant,
                         const perturb::SiteOptions& site_options = {},
                         const PromptTemplate& tmpl = PromptTemplate::builtin());

/// Up to max_retries rounds of prompt, generate, validate; stops at the
/// first accepted candidate. Throws TransportError only when every attempt
/// failed in transport.
GenerationResult generate_with_retries(const dataset::TaskRecord& task, perturb::Concept kind, LlmBackend& backend,
                                       const GenerationOptions& options, const Validator& validator);

}  // namespace procure::llm
