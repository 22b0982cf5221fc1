#include "procure/dataset/combine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "procure/errors.hpp"
#include "procure/rng.hpp"

namespace procure::dataset {

OriginalEntry OriginalEntry::from_task(const TaskRecord& task) { return {task.task_id, task.prompt, task.source()}; }

std::vector<CombinedGroup> build_combined(const std::vector<OriginalEntry>& originals,
                                          const std::vector<DatasetRecord>& counterfactuals) {
  std::map<std::string, std::size_t> index;
  std::vector<CombinedGroup> groups;
  groups.reserve(originals.size());
  for (const auto& o : originals) {
    index.emplace(o.task_id, groups.size());
    groups.push_back({o, {}});
  }
  for (const auto& r : counterfactuals) {
    auto it = index.find(r.task_id);
    if (it == index.end()) throw OrphanCounterfactual(r.task_id);
    if (!validate::is_accepted(r.verdict)) continue;
    groups[it->second].counterfactuals.push_back(r);
  }
  for (auto& g : groups) {
    std::stable_sort(g.counterfactuals.begin(), g.counterfactuals.end(),
                     [](const DatasetRecord& a, const DatasetRecord& b) { return a.kind < b.kind; });
  }
  return groups;
}

BatchPlan plan_batches(const std::vector<CombinedGroup>& groups, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  for (const auto& g : groups) {
    if (g.size() > batch_size) {
      throw GroupTooLarge("group " + g.original.task_id + " has " + std::to_string(g.size()) +
                          " members, batch size is " + std::to_string(batch_size));
    }
  }
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  BatchPlan plan;
  plan.batch_size = batch_size;
  std::size_t fill = 0;
  for (std::size_t g : order) {
    if (plan.batches.empty() || fill + groups[g].size() > batch_size) {
      plan.batches.emplace_back();
      fill = 0;
    }
    plan.batches.back().push_back(g);
    fill += groups[g].size();
  }
  return plan;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_tasks(const std::vector<std::string>& task_ids,
                                                                          std::uint64_t seed, double fraction) {
  if (fraction < 0 || fraction > 1) throw std::invalid_argument("fraction must lie in [0, 1]");
  std::vector<std::size_t> order(task_ids.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(task_ids.size())));
  std::vector<bool> chosen(task_ids.size(), false);
  for (std::size_t k = 0; k < take; ++k) chosen[order[k]] = true;
  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (std::size_t k = 0; k < task_ids.size(); ++k) (chosen[k] ? out.first : out.second).push_back(task_ids[k]);
  return out;
}

}  // namespace procure::dataset
