#include "procure/dataset/task.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "procure/errors.hpp"

namespace procure::dataset {

using nlohmann::json;

std::string TaskRecord::source() const { return prompt + canonical_solution; }

validate::TestHarness TaskRecord::harness(double timeout_s) const {
  static const std::regex check_def(R"((^|\n)def\s+check\s*\()");
  validate::TestHarness h;
  h.test_code = test;
  if (std::regex_search(test, check_def)) h.test_code += "\n\ncheck(" + entry_point + ")\n";
  h.timeout_s = timeout_s;
  return h;
}

std::vector<TaskRecord> parse_tasks(const std::string& jsonl) {
  std::vector<TaskRecord> out;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw SchemaError(lineno, "<json>");
    }
    if (!j.is_object()) throw SchemaError(lineno, "<object>");
    auto field = [&](const char* name) {
      auto it = j.find(name);
      if (it == j.end() || !it->is_string()) throw SchemaError(lineno, name);
      return it->get<std::string>();
    };
    TaskRecord t;
    t.task_id = field("task_id");
    t.prompt = field("prompt");
    t.canonical_solution = field("canonical_solution");
    t.test = field("test");
    t.entry_point = field("entry_point");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TaskRecord> read_tasks(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_tasks(ss.str());
}

}  // namespace procure::dataset
