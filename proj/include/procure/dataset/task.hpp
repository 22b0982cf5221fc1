#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "procure/validate/validate.hpp"

namespace procure::dataset {

/// One benchmark problem in HumanEval layout.
struct TaskRecord {
  std::string task_id;
  std::string prompt;  // signature and docstring
  std::string canonical_solution;
  std::string test;
  std::string entry_point;

  /// prompt + canonical_solution.
  std::string source() const;
  /// Test code plus a `check(<entry_point>)` call when the tests define one.
  validate::TestHarness harness(double timeout_s = 10.0) const;

  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

/// Throws IoError, or SchemaError naming the first missing or mistyped field.
std::vector<TaskRecord> read_tasks(const std::filesystem::path& path);
std::vector<TaskRecord> parse_tasks(const std::string& jsonl);

}  // namespace procure::dataset
