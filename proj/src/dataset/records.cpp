#include "procure/dataset/records.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "procure/errors.hpp"

namespace procure::dataset {

using ojson = nlohmann::ordered_json;

std::string to_json_line(const DatasetRecord& r) {
  ojson j;
  j["task_id"] = r.task_id;
  j["concept"] = perturb::to_string(r.kind);
  j["instruction"] = r.instruction;
  j["original_code"] = r.original_code;
  j["counterfactual_code"] = r.counterfactual_code;
  ojson spans = ojson::array();
  for (const auto& s : r.diff_spans) spans.push_back({s.begin, s.end});
  j["diff_spans"] = std::move(spans);
  j["attempts"] = r.attempts;
  j["verdict"] = validate::to_string(r.verdict);
  j["generator"] = r.generator;
  return j.dump();
}

DatasetRecord from_json_line(const std::string& line, std::size_t lineno) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const ojson::parse_error&) {
    throw SchemaError(lineno, "<json>");
  }
  if (!j.is_object()) throw SchemaError(lineno, "<object>");
  auto str = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw SchemaError(lineno, key);
    return it->get<std::string>();
  };
  DatasetRecord r;
  r.task_id = str("task_id");
  try {
    r.kind = perturb::concept_from_string(str("concept"));
  } catch (const std::invalid_argument&) {
    throw SchemaError(lineno, "concept");
  }
  r.instruction = str("instruction");
  r.original_code = str("original_code");
  r.counterfactual_code = str("counterfactual_code");
  auto spans = j.find("diff_spans");
  if (spans == j.end() || !spans->is_array()) throw SchemaError(lineno, "diff_spans");
  std::size_t last_end = 0;
  for (const auto& s : *spans) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_unsigned() || !s[1].is_number_unsigned()) {
      throw SchemaError(lineno, "diff_spans");
    }
    CharSpan span{s[0].get<std::size_t>(), s[1].get<std::size_t>()};
    if (span.begin >= span.end || span.begin < last_end || span.end > r.counterfactual_code.size()) {
      throw SchemaError(lineno, "diff_spans");
    }
    last_end = span.end;
    r.diff_spans.push_back(span);
  }
  auto attempts = j.find("attempts");
  if (attempts == j.end() || !attempts->is_number_integer() || attempts->get<int>() < 1) {
    throw SchemaError(lineno, "attempts");
  }
  r.attempts = attempts->get<int>();
  try {
    r.verdict = validate::verdict_from_string(str("verdict"));
  } catch (const std::invalid_argument&) {
    throw SchemaError(lineno, "verdict");
  }
  r.generator = str("generator");
  if (r.generator != "rule" && r.generator.rfind("llm:", 0) != 0) throw SchemaError(lineno, "generator");
  return r;
}

std::size_t write_records(const std::vector<DatasetRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << to_json_line(r) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
  return records.size();
}

std::vector<DatasetRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(from_json_line(line, lineno));
  }
  return out;
}

}  // namespace procure::dataset
