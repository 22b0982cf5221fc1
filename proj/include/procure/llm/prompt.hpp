#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "procure/perturb/perturb.hpp"

namespace procure::llm {

enum class PromptVariant { Full, Vanilla, NoOneShot, NoCoT, NoStaticInfo };

std::string_view to_string(PromptVariant v) noexcept;
/// Throws std::invalid_argument for unknown names.
PromptVariant variant_from_string(std::string_view name);

struct OneShot {
  std::string input;
  std::string output;
};

struct ConceptPrompt {
  std::string instruction;
  std::vector<std::string> steps;
  OneShot one_shot;
};

/// Versioned wording of the prompt sections.
struct PromptTemplate {
  std::string version;
  std::string answer_format;
  std::string static_info_heading;
  std::string steps_heading;
  std::string step_prefix;
  std::string example_input_heading;
  std::string example_output_heading;
  std::string target_heading;
  std::map<perturb::Concept, ConceptPrompt> concepts;

  /// The template compiled into the library.
  static const PromptTemplate& builtin();
  /// Throws SchemaError when a key is missing.
  static PromptTemplate parse(std::string_view json_text);
  static PromptTemplate load(const std::filesystem::path& path);
};

struct PromptSpec {
  perturb::Concept kind = perturb::Concept::IfElseFlip;
  PromptVariant variant = PromptVariant::Full;
  std::string instruction;
  std::vector<std::string> static_info;
  std::vector<std::string> cot_steps;
  OneShot one_shot;
  std::string target_code;
};

/// Fills the sections that `variant` keeps; the rest stay empty.
PromptSpec make_spec(perturb::Concept kind, PromptVariant variant, const std::vector<perturb::PerturbationSite>& sites,
                     std::string target_code, const PromptTemplate& tmpl = PromptTemplate::builtin());

/// Sections in order: instruction, static info, reasoning steps, one-shot
/// example, target code. Empty sections are left out entirely.
std::string render_prompt(const PromptSpec& spec, const PromptTemplate& tmpl = PromptTemplate::builtin());

}  // namespace procure::llm
