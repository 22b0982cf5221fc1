#include "procure/llm/generate.hpp"

#include <stdexcept>

#include "procure/errors.hpp"

namespace procure::llm {

std::string build_prompt(const dataset::TaskRecord& task, perturb::Concept kind, PromptVariant variant,
                         const perturb::SiteOptions& site_options, const PromptTemplate& tmpl) {
  std::string source = task.source();
  std::vector<perturb::PerturbationSite> sites;
  if (variant != PromptVariant::Vanilla && variant != PromptVariant::NoStaticInfo) {
    try {
      auto program = code::SubjectProgram::parse(source, task.entry_point, task.task_id);
      sites = perturb::enumerate_sites(program, kind, site_options);
    } catch (const Error&) {
      // The prompt is still useful without hints.
    }
  }
  return render_prompt(make_spec(kind, variant, sites, source, tmpl), tmpl);
}

GenerationResult generate_with_retries(const dataset::TaskRecord& task, perturb::Concept kind, LlmBackend& backend,
                                       const GenerationOptions& options, const Validator& validator) {
  if (options.max_retries < 1) throw std::invalid_argument("max_retries must be at least 1");
  const PromptTemplate& tmpl = options.prompt_template ? *options.prompt_template : PromptTemplate::builtin();
  std::string prompt = build_prompt(task, kind, options.variant, options.site_options, tmpl);

  GenerationResult result;
  int transport_failures = 0;
  std::string last_transport_error;
  for (int i = 1; i <= options.max_retries; ++i) {
    AttemptRecord rec;
    rec.index = i;
    rec.prompt_bytes = prompt.size();
    validate::ValidationOutcome outcome;
    std::string code;
    try {
      Completion c = backend.complete(prompt, i);
      rec.tokens = c.total_tokens;
      rec.raw_response = c.content;
      if (c.total_tokens) result.log.total_tokens += *c.total_tokens;
      code = extract_code(c.content);
      outcome = validator(code);
    } catch (const TransportError& e) {
      ++transport_failures;
      last_transport_error = e.what();
      outcome.verdict = validate::Verdict::ExecutionError;
      outcome.detail = std::string("transport: ") + e.what();
    } catch (const MalformedResponse& e) {
      outcome.verdict = validate::Verdict::FailureTypeII;
      outcome.detail = e.what();
    }
    rec.verdict = outcome.verdict;
    rec.detail = outcome.detail;
    result.log.attempts.push_back(std::move(rec));
    result.outcome = outcome;
    if (validate::is_accepted(outcome.verdict)) {
      perturb::CounterfactualCandidate cand;
      cand.kind = kind;
      cand.source = std::move(code);
      cand.attempt = i;
      result.candidate = std::move(cand);
      result.log.succeeded = true;
      return result;
    }
  }
  if (transport_failures == options.max_retries) throw TransportError(last_transport_error);
  return result;
}

}  // namespace procure::llm
