#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "procure/llm/prompt.hpp"
#include "procure/perturb/concept.hpp"

namespace procure::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kPartialFailure = 2 };

struct RunConfig {
  std::filesystem::path input_path;
  std::filesystem::path output_dir;
  std::vector<perturb::Concept> concepts{perturb::kAllConcepts.begin(), perturb::kAllConcepts.end()};
  std::string engine = "rule";  // "rule" or "llm"
  std::filesystem::path backend_config;
  std::uint64_t seed = 0;
  int workers = 1;
  double timeout_s = 10.0;
  llm::PromptVariant variant = llm::PromptVariant::Full;
  int n_retries = 5;
  bool all_sites = false;
  bool strict = false;
  bool quiet = false;
  std::string dataset_name;  // defaults to the input file stem

  /// Throws std::invalid_argument.
  void check() const;
};

/// Output of a generation run. `partial_failures` counts tasks that could
/// not be processed at all (unparseable original, failing baseline tests,
/// exhausted transport).
struct RunResult {
  std::string manifest_json;
  std::size_t records = 0;
  std::size_t partial_failures = 0;
};

/// Rule engine: sites, seeded application, validation. Writes
/// <out>/dataset.jsonl and <out>/manifest.json.
RunResult cmd_perturb(const RunConfig& cfg, std::ostream& log);

/// LLM engine through generate_with_retries; same outputs as cmd_perturb.
RunResult cmd_gen(const RunConfig& cfg, std::ostream& log);

struct ValidateConfig {
  std::filesystem::path records;
  std::filesystem::path tasks;
  std::filesystem::path output;  // report JSONL; empty for none
  double timeout_s = 10.0;
  int workers = 1;
};

/// Re-validates stored records. Returns the number that did not validate.
std::size_t cmd_validate(const ValidateConfig& cfg, std::ostream& out, std::ostream& log);

struct BuildConfig {
  std::filesystem::path tasks;
  std::filesystem::path records;
  std::filesystem::path output_dir;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
};

/// Writes combined.jsonl, batches.json and split.json.
void cmd_build_dataset(const BuildConfig& cfg, std::ostream& log);

struct EvalConfig {
  std::filesystem::path table;  // attribution rows or completion rows
  std::filesystem::path tasks;  // needed for completion rows
  double timeout_s = 10.0;
  int workers = 1;
};

/// Report JSON {pass_at_1, pass_at_5, ccs_overall, ccs_per_concept}.
std::string cmd_eval(const EvalConfig& cfg, std::ostream& log);

/// Success and cost aggregation over one manifest or a {"datasets": [...]}
/// file. Returns the report JSON.
std::string cmd_stats(const std::filesystem::path& manifest);

/// Prompt text for one task and concept.
std::string cmd_prompt(const std::filesystem::path& tasks, const std::string& task_id, perturb::Concept kind,
                       llm::PromptVariant variant);

/// Full command-line entry point.
int main(int argc, char** argv);

}  // namespace procure::cli
