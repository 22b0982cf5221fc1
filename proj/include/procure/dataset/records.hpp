#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "procure/perturb/concept.hpp"
#include "procure/validate/validate.hpp"

namespace procure::dataset {

/// Half-open character range [begin, end).
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct DatasetRecord {
  std::string task_id;
  perturb::Concept kind = perturb::Concept::IfElseFlip;
  std::string instruction;
  std::string original_code;
  std::string counterfactual_code;
  std::vector<CharSpan> diff_spans;  // offsets into counterfactual_code
  int attempts = 1;
  validate::Verdict verdict = validate::Verdict::AcceptedByTests;
  std::string generator;  // "rule" or "llm:<model>"

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// One JSON object per line with keys in declaration order ("concept" for
/// the kind). Throws SchemaError(line, field).
std::string to_json_line(const DatasetRecord& record);
DatasetRecord from_json_line(const std::string& line, std::size_t lineno = 1);

/// Returns the number of records written. Throws IoError.
std::size_t write_records(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);
std::vector<DatasetRecord> read_records(const std::filesystem::path& path);

}  // namespace procure::dataset
