#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "procure/dataset/records.hpp"
#include "procure/dataset/task.hpp"

namespace procure::dataset {

struct OriginalEntry {
  std::string task_id;
  std::string instruction;
  std::string code;

  static OriginalEntry from_task(const TaskRecord& task);
  friend bool operator==(const OriginalEntry&, const OriginalEntry&) = default;
};

struct CombinedGroup {
  OriginalEntry original;
  std::vector<DatasetRecord> counterfactuals;  // accepted only, in concept order

  std::size_t size() const { return 1 + counterfactuals.size(); }
};

/// One group per original, in the order of `originals`. Records that were
/// not accepted are skipped. Throws OrphanCounterfactual.
std::vector<CombinedGroup> build_combined(const std::vector<OriginalEntry>& originals,
                                          const std::vector<DatasetRecord>& counterfactuals);

struct BatchPlan {
  std::vector<std::vector<std::size_t>> batches;  // indices into the group list
  std::size_t batch_size = 0;
};

/// Seeded shuffle of the groups, then whole groups are packed in order,
/// opening a new batch whenever the next group would overflow the current
/// one. Throws GroupTooLarge.
BatchPlan plan_batches(const std::vector<CombinedGroup>& groups, std::size_t batch_size, std::uint64_t seed);

/// Seeded split of task ids into (selected, rest) with round(fraction * n)
/// selected; each part keeps the input order.
std::pair<std::vector<std::string>, std::vector<std::string>> split_tasks(const std::vector<std::string>& task_ids,
                                                                          std::uint64_t seed, double fraction = 0.5);

}  // namespace procure::dataset
