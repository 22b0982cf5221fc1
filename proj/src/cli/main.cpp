#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "procure/cli/commands.hpp"
#include "procure/code/digest.hpp"
#include "procure/errors.hpp"

namespace procure::cli {

int main(int argc, char** argv) {
  CLI::App app{"Concept-oriented counterfactual program generation and evaluation"};
  app.require_subcommand(1);

  RunConfig run;
  std::string concepts = "all";
  std::string variant = "Full";
  auto add_run_options = [&](CLI::App* sub, bool llm) {
    sub->add_option("--input", run.input_path, "Benchmark tasks (JSONL)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", run.output_dir, "Output directory")->required();
    sub->add_option("--concepts", concepts, "Comma-separated concept names or 'all'");
    sub->add_option("--seed", run.seed, "Seed for site selection and renaming");
    sub->add_option("--workers", run.workers, "Parallel tasks")->check(CLI::PositiveNumber);
    sub->add_option("--timeout", run.timeout_s, "Per test run timeout in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--dataset-name", run.dataset_name, "Name recorded in the manifest");
    sub->add_flag("--strict", run.strict, "Exit with 2 when some tasks could not be processed");
    sub->add_flag("--quiet", run.quiet, "No progress events");
    if (llm) {
      sub->add_option("--backend-config", run.backend_config, "Backend JSON")->required()->check(CLI::ExistingFile);
      sub->add_option("--variant", variant, "Full, Vanilla, NoOneShot, NoCoT or NoStaticInfo");
      sub->add_option("--n-retries", run.n_retries, "Attempts per task and concept")->check(CLI::PositiveNumber);
    } else {
      sub->add_flag("--all-sites", run.all_sites, "One candidate per site instead of one seeded pick");
    }
  };

  auto* perturb_cmd = app.add_subcommand("perturb", "Rule-based counterfactual generation");
  add_run_options(perturb_cmd, false);
  auto* gen_cmd = app.add_subcommand("gen", "LLM-backed counterfactual generation");
  add_run_options(gen_cmd, true);
  std::string engine = "llm";
  gen_cmd->add_option("--engine", engine, "Generation engine")->check(CLI::IsMember({"llm", "rule"}));

  ValidateConfig vcfg;
  auto* validate_cmd = app.add_subcommand("validate", "Re-validate dataset records");
  validate_cmd->add_option("--input", vcfg.records, "Dataset records (JSONL)")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--tasks", vcfg.tasks, "Benchmark tasks (JSONL)")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--out", vcfg.output, "Per-record report (JSONL)");
  validate_cmd->add_option("--timeout", vcfg.timeout_s)->check(CLI::PositiveNumber);
  validate_cmd->add_option("--workers", vcfg.workers)->check(CLI::PositiveNumber);
  bool validate_strict = false;
  validate_cmd->add_flag("--strict", validate_strict, "Exit with 2 when a record does not validate");

  BuildConfig bcfg;
  auto* build_cmd = app.add_subcommand("build-dataset", "Group records with their originals and plan batches");
  build_cmd->add_option("--input", bcfg.tasks, "Benchmark tasks (JSONL)")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--records", bcfg.records, "Dataset records (JSONL)")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("--out", bcfg.output_dir, "Output directory")->required();
  build_cmd->add_option("--batch-size", bcfg.batch_size)->check(CLI::PositiveNumber);
  build_cmd->add_option("--seed", bcfg.seed);

  EvalConfig ecfg;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Pass@k and concept consistency from an attribution table");
  eval_cmd->add_option("--input", ecfg.table, "Attribution or completion rows (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--tasks", ecfg.tasks, "Benchmark tasks, needed for completion rows");
  eval_cmd->add_option("--out", eval_out, "Write the report here as well");
  eval_cmd->add_option("--timeout", ecfg.timeout_s)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--workers", ecfg.workers)->check(CLI::PositiveNumber);

  std::string stats_input;
  auto* stats_cmd = app.add_subcommand("stats", "Success rates and cost averages from manifests");
  stats_cmd->add_option("--input", stats_input, "Manifest JSON")->required()->check(CLI::ExistingFile);

  std::string prompt_tasks, prompt_task, prompt_concept = "IfElseFlip";
  bool prompt_hash = false;
  auto* prompt_cmd = app.add_subcommand("prompt", "Render the generation prompt for one task");
  prompt_cmd->add_option("--input", prompt_tasks, "Benchmark tasks (JSONL)")->required()->check(CLI::ExistingFile);
  prompt_cmd->add_option("--task-id", prompt_task)->required();
  prompt_cmd->add_option("--concepts", prompt_concept, "One concept name");
  prompt_cmd->add_option("--variant", variant);
  prompt_cmd->add_flag("--hash", prompt_hash, "Print the fixture key instead of the prompt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (perturb_cmd->parsed() || gen_cmd->parsed()) {
      run.concepts = perturb::parse_concept_list(concepts);
      bool llm = gen_cmd->parsed() && engine == "llm";
      run.engine = llm ? "llm" : "rule";
      run.variant = llm::variant_from_string(variant);
      RunResult r = llm ? cmd_gen(run, std::cerr) : cmd_perturb(run, std::cerr);
      std::cout << r.manifest_json;
      return run.strict && r.partial_failures > 0 ? kPartialFailure : kOk;
    }
    if (validate_cmd->parsed()) {
      std::size_t failed = cmd_validate(vcfg, std::cout, std::cerr);
      return validate_strict && failed > 0 ? kPartialFailure : kOk;
    }
    if (build_cmd->parsed()) {
      cmd_build_dataset(bcfg, std::cerr);
      return kOk;
    }
    if (eval_cmd->parsed()) {
      std::string report = cmd_eval(ecfg, std::cerr);
      if (!eval_out.empty()) {
        std::ofstream(eval_out) << report;
      }
      std::cout << report;
      return kOk;
    }
    if (stats_cmd->parsed()) {
      std::cout << cmd_stats(stats_input);
      return kOk;
    }
    if (prompt_cmd->parsed()) {
      std::string text = cmd_prompt(prompt_tasks, prompt_task, perturb::concept_from_string(prompt_concept),
                                    llm::variant_from_string(variant));
      std::cout << (prompt_hash ? code::sha256_hex(text) + "\n" : text);
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace procure::cli
