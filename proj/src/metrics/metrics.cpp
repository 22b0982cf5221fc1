#include "procure/metrics/metrics.hpp"

#include <set>
#include <tuple>

#include "procure/errors.hpp"

namespace procure::metrics {

int attribute(const std::string& h, const std::string& x, const std::string& y, const validate::TestHarness& harness,
              const validate::Sandbox& sandbox) {
  auto outcome = validate::run_tests(h + x + y, harness, sandbox);
  return outcome.verdict == validate::Verdict::AcceptedByTests ? 1 : 0;
}

double pass_at_k(int m, int c, int k) {
  if (m < 1 || c < 0 || c > m || k < 1 || k > m) {
    throw DomainError("pass@k needs 0 <= c <= m and 1 <= k <= m (m=" + std::to_string(m) +
                      ", c=" + std::to_string(c) + ", k=" + std::to_string(k) + ")");
  }
  if (m - c < k) return 1.0;
  // C(m-c, k) / C(m, k) = prod_{i=m-c+1}^{m} (1 - k / i)
  double keep = 1.0;
  for (int i = m - c + 1; i <= m; ++i) keep *= 1.0 - static_cast<double>(k) / i;
  return 1.0 - keep;
}

double mean_pass_at_k(const std::vector<SampleCount>& tasks, int k) {
  if (tasks.empty()) throw DomainError("pass@k over an empty task list");
  double sum = 0;
  for (const auto& t : tasks) sum += pass_at_k(t.m, t.c, k);
  return sum / static_cast<double>(tasks.size());
}

std::optional<double> ccs(const std::vector<PairVerdict>& pairs) {
  std::size_t denom = 0, agree = 0;
  for (const auto& p : pairs) {
    if (p.a_orig + p.a_cf == 0) continue;
    ++denom;
    if (p.a_orig == p.a_cf) ++agree;
  }
  if (denom == 0) return std::nullopt;
  return static_cast<double>(agree) / static_cast<double>(denom);
}

std::vector<PairVerdict> pair_rows(const std::vector<AttributionRow>& rows) {
  std::map<std::pair<std::string, int>, int> originals;
  for (const auto& r : rows) {
    if (r.variant == "original") originals[{r.task_id, r.sample_index}] = r.attributed;
  }
  std::vector<PairVerdict> out;
  for (const auto& r : rows) {
    if (r.variant.rfind("cf:", 0) != 0) continue;
    auto it = originals.find({r.task_id, r.sample_index});
    if (it == originals.end()) continue;
    out.push_back({r.task_id, perturb::concept_from_string(r.variant.substr(3)), it->second, r.attributed});
  }
  return out;
}

EvalReport evaluate(const std::vector<AttributionRow>& rows) {
  std::set<std::tuple<std::string, std::string, int>> keys;
  std::map<std::string, SampleCount> per_task;
  for (const auto& r : rows) {
    if (r.attributed != 0 && r.attributed != 1) throw DomainError("attribution must be 0 or 1");
    if (r.variant != "original" && r.variant.rfind("cf:", 0) != 0) {
      throw DomainError("unknown variant '" + r.variant + "'");
    }
    if (!keys.emplace(r.task_id, r.variant, r.sample_index).second) {
      throw DomainError("duplicate row " + r.task_id + " " + r.variant + " " + std::to_string(r.sample_index));
    }
    if (r.variant == "original") {
      auto& t = per_task[r.task_id];
      ++t.m;
      t.c += r.attributed;
    }
  }
  EvalReport rep;
  for (int k : {1, 5}) {
    std::vector<SampleCount> eligible;
    for (const auto& [id, t] : per_task) {
      if (t.m >= k) eligible.push_back(t);
    }
    if (eligible.empty()) continue;
    (k == 1 ? rep.pass_at_1 : rep.pass_at_5) = mean_pass_at_k(eligible, k);
  }
  auto pairs = pair_rows(rows);
  rep.ccs_overall = ccs(pairs);
  std::map<perturb::Concept, std::vector<PairVerdict>> by_concept;
  for (const auto& p : pairs) by_concept[p.kind].push_back(p);
  for (const auto& [c, ps] : by_concept) rep.ccs_per_concept[c] = ccs(ps);
  return rep;
}

SuccessStats success_stats(const std::vector<DatasetCells>& datasets) {
  SuccessStats out;
  double sum = 0;
  int defined = 0;
  for (const auto& d : datasets) {
    DatasetRate rate;
    rate.name = d.name;
    for (const auto& [c, cell] : d.cells) {
      if (cell.success < 0 || cell.eligible < 0 || cell.success > cell.eligible) {
        throw DomainError(d.name + "/" + std::string(perturb::to_string(c)) + ": need 0 <= a <= b, got " +
                          std::to_string(cell.success) + "/" + std::to_string(cell.eligible));
      }
      rate.per_concept[c] = cell.eligible > 0 ? std::optional<double>(static_cast<double>(cell.success) /
                                                                      static_cast<double>(cell.eligible))
                                              : std::nullopt;
      rate.success += cell.success;
      rate.eligible += cell.eligible;
    }
    if (rate.eligible > 0) {
      rate.micro = static_cast<double>(rate.success) / static_cast<double>(rate.eligible);
      sum += *rate.micro;
      ++defined;
    }
    out.total_success += rate.success;
    out.datasets.push_back(std::move(rate));
  }
  if (defined > 0) out.macro = sum / defined;
  return out;
}

CostStats cost_stats(const std::vector<DatasetCosts>& datasets) {
  CostStats out;
  for (const auto& d : datasets) {
    CostRow row;
    row.name = d.name;
    for (const auto& [c, cell] : d.cells) {
      row.mean.attempts += cell.attempts;
      row.mean.tokens += cell.tokens;
    }
    if (!d.cells.empty()) {
      row.mean.attempts /= static_cast<double>(d.cells.size());
      row.mean.tokens /= static_cast<double>(d.cells.size());
    }
    out.macro.attempts += row.mean.attempts;
    out.macro.tokens += row.mean.tokens;
    out.rows.push_back(std::move(row));
  }
  if (!out.rows.empty()) {
    out.macro.attempts /= static_cast<double>(out.rows.size());
    out.macro.tokens /= static_cast<double>(out.rows.size());
  }
  return out;
}

}  // namespace procure::metrics
