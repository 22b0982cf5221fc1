#include "procure/llm/prompt.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "procure/errors.hpp"

namespace procure::llm {

std::string_view builtin_prompt_template();

namespace {

using nlohmann::json;

std::string fence(const std::string& code) {
  std::string out = "```python\n" + code;
  if (out.back() != '\n') out += '\n';
  return out + "```";
}

const json& need(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(0, key);
  return *it;
}

std::string need_string(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_string()) throw SchemaError(0, key);
  return v.get<std::string>();
}

}  // namespace

std::string_view to_string(PromptVariant v) noexcept {
  switch (v) {
    case PromptVariant::Full: return "Full";
    case PromptVariant::Vanilla: return "Vanilla";
    case PromptVariant::NoOneShot: return "NoOneShot";
    case PromptVariant::NoCoT: return "NoCoT";
    case PromptVariant::NoStaticInfo: return "NoStaticInfo";
  }
  return "?";
}

PromptVariant variant_from_string(std::string_view name) {
  for (PromptVariant v : {PromptVariant::Full, PromptVariant::Vanilla, PromptVariant::NoOneShot, PromptVariant::NoCoT,
                          PromptVariant::NoStaticInfo}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown prompt variant '" + std::string(name) + "'");
}

PromptTemplate PromptTemplate::parse(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error&) {
    throw SchemaError(0, "<json>");
  }
  PromptTemplate t;
  t.version = need_string(j, "version");
  t.answer_format = need_string(j, "answer_format");
  const json& h = need(j, "headings");
  t.static_info_heading = need_string(h, "static_info");
  t.steps_heading = need_string(h, "steps");
  t.step_prefix = need_string(h, "step_prefix");
  t.example_input_heading = need_string(h, "example_input");
  t.example_output_heading = need_string(h, "example_output");
  t.target_heading = need_string(h, "target");
  const json& concepts = need(j, "concepts");
  for (perturb::Concept c : perturb::kAllConcepts) {
    const json& cj = need(concepts, std::string(perturb::to_string(c)).c_str());
    ConceptPrompt cp;
    cp.instruction = need_string(cj, "instruction");
    for (const auto& s : need(cj, "steps")) cp.steps.push_back(s.get<std::string>());
    const json& shot = need(cj, "one_shot");
    cp.one_shot.input = need_string(shot, "input");
    cp.one_shot.output = need_string(shot, "output");
    t.concepts.emplace(c, std::move(cp));
  }
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate t = parse(builtin_prompt_template());
  return t;
}

PromptSpec make_spec(perturb::Concept kind, PromptVariant variant, const std::vector<perturb::PerturbationSite>& sites,
                     std::string target_code, const PromptTemplate& tmpl) {
  const ConceptPrompt& cp = tmpl.concepts.at(kind);
  PromptSpec spec;
  spec.kind = kind;
  spec.variant = variant;
  spec.instruction = cp.instruction;
  spec.target_code = std::move(target_code);
  if (variant == PromptVariant::Vanilla) return spec;
  if (variant != PromptVariant::NoStaticInfo) {
    for (const auto& s : sites) {
      if (s.kind == kind && !s.notes.empty()) spec.static_info.push_back(s.notes);
    }
  }
  if (variant != PromptVariant::NoCoT) spec.cot_steps = cp.steps;
  if (variant != PromptVariant::NoOneShot) spec.one_shot = cp.one_shot;
  return spec;
}

std::string render_prompt(const PromptSpec& spec, const PromptTemplate& tmpl) {
  std::string out = spec.instruction;
  if (!tmpl.answer_format.empty()) out += " " + tmpl.answer_format;
  out += "\n";
  if (!spec.static_info.empty()) {
    out += "\n" + tmpl.static_info_heading + "\n";
    for (const auto& line : spec.static_info) out += "- " + line + "\n";
  }
  if (!spec.cot_steps.empty()) {
    out += "\n" + tmpl.steps_heading + "\n";
    for (std::size_t i = 0; i < spec.cot_steps.size(); ++i) {
      out += tmpl.step_prefix + " " + std::to_string(i + 1) + ": " + spec.cot_steps[i] + "\n";
    }
  }
  if (!spec.one_shot.input.empty()) {
    out += "\n" + tmpl.example_input_heading + "\n" + fence(spec.one_shot.input) + "\n";
    out += tmpl.example_output_heading + "\n" + fence(spec.one_shot.output) + "\n";
  }
  out += "\n" + tmpl.target_heading + "\n" + fence(spec.target_code) + "\n";
  return out;
}

}  // namespace procure::llm
