#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procure/perturb/concept.hpp"
#include "procure/validate/validate.hpp"

namespace procure::metrics {

/// 1 when instruction + prefix + completion passes every test in time.
int attribute(const std::string& h, const std::string& x, const std::string& y, const validate::TestHarness& harness,
              const validate::Sandbox& sandbox);

/// Unbiased estimator 1 - C(m-c, k) / C(m, k). Throws DomainError unless
/// 0 <= c <= m and 1 <= k <= m.
double pass_at_k(int m, int c, int k);

struct SampleCount {
  int m = 0;
  int c = 0;
};

/// Mean of pass_at_k over tasks.
double mean_pass_at_k(const std::vector<SampleCount>& tasks, int k);

struct PairVerdict {
  std::string task_id;
  perturb::Concept kind = perturb::Concept::IfElseFlip;
  int a_orig = 0;
  int a_cf = 0;
};

/// Agreement rate over the pairs where at least one side passes; nullopt
/// when there are none.
std::optional<double> ccs(const std::vector<PairVerdict>& pairs);

struct AttributionRow {
  std::string task_id;
  std::string variant;  // "original" or "cf:<Concept>"
  int sample_index = 0;
  int attributed = 0;
};

/// Pairs each counterfactual row with the original row of the same task and
/// sample index. Rows without a partner are skipped.
std::vector<PairVerdict> pair_rows(const std::vector<AttributionRow>& rows);

struct EvalReport {
  std::optional<double> pass_at_1;
  std::optional<double> pass_at_5;
  std::optional<double> ccs_overall;
  std::map<perturb::Concept, std::optional<double>> ccs_per_concept;
};

/// Pass@k over the original rows (tasks with fewer than k samples are left
/// out of that estimate) and CCS over paired rows. Throws DomainError on
/// duplicate (task, variant, sample) keys or non-binary values.
EvalReport evaluate(const std::vector<AttributionRow>& rows);

// Table 1 and Table 2 style aggregation.

struct SuccessCell {
  std::int64_t success = 0;   // a
  std::int64_t eligible = 0;  // b
};

struct DatasetCells {
  std::string name;
  std::map<perturb::Concept, SuccessCell> cells;
};

struct DatasetRate {
  std::string name;
  std::map<perturb::Concept, std::optional<double>> per_concept;  // nullopt for 0/0
  std::int64_t success = 0;
  std::int64_t eligible = 0;
  std::optional<double> micro;  // sum a / sum b
};

struct SuccessStats {
  std::vector<DatasetRate> datasets;
  std::optional<double> macro;  // unweighted mean of the defined dataset rates
  std::int64_t total_success = 0;
};

/// Throws DomainError when a cell has a > b or negative counts.
SuccessStats success_stats(const std::vector<DatasetCells>& datasets);

struct CostCell {
  double attempts = 0;
  double tokens = 0;
};

struct DatasetCosts {
  std::string name;
  std::map<perturb::Concept, CostCell> cells;
};

struct CostRow {
  std::string name;
  CostCell mean;  // unweighted mean over the concepts present
};

struct CostStats {
  std::vector<CostRow> rows;
  CostCell macro;  // unweighted mean of the row means
};

CostStats cost_stats(const std::vector<DatasetCosts>& datasets);

}  // namespace procure::metrics
