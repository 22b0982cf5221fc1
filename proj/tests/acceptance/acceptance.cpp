// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diff_oracle.hpp"
#include "procure/cli/commands.hpp"
#include "procure/dataset/diff.hpp"
#include "procure/dataset/records.hpp"
#include "procure/errors.hpp"
#include "procure/llm/generate.hpp"
#include "procure/metrics/metrics.hpp"
#include "procure/validate/validate.hpp"
#include "python_oracle.hpp"

using namespace procure;
using nlohmann::json;
using perturb::Concept;
using validate::Verdict;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Check {
  std::vector<std::string> problems;
  void expect(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.problems.push_back(std::string("exception: ") + e.what());
  }
  bool ok = c.problems.empty();
  failures += ok ? 0 : 1;
  std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << std::fixed;
  std::cout.precision(2);
  std::cout << seconds_since(t0) << " s)";
  for (std::size_t i = 0; i < c.problems.size() && i < 5; ++i) std::cout << "\n    " << c.problems[i];
  std::cout << std::endl;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

const fs::path kCorpus = fs::path(PROCURE_SOURCE_DIR) / "data/corpus/mini.jsonl";

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("procure_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cli::RunResult perturb_corpus(const fs::path& out, bool all_sites) {
  cli::RunConfig cfg;
  cfg.input_path = kCorpus;
  cfg.output_dir = out;
  cfg.all_sites = all_sites;
  cfg.quiet = true;
  std::ostringstream log;
  return cli::cmd_perturb(cfg, log);
}

void table_one(Check& c) {
  auto t0 = Clock::now();
  auto row = [](const std::string& name, std::vector<std::pair<long, long>> cells) {
    metrics::DatasetCells d{name, {}};
    for (std::size_t i = 0; i < cells.size(); ++i) d.cells[perturb::kAllConcepts[i]] = {cells[i].first, cells[i].second};
    return d;
  };
  auto s = metrics::success_stats({row("HumanEval", {{24, 24}, {37, 37}, {144, 145}, {141, 145}, {145, 145}}),
                                   row("MBPP", {{198, 200}, {179, 182}, {957, 972}, {924, 972}, {946, 972}}),
                                   row("CodeContests", {{3796, 3821},
                                                        {4895, 5564},
                                                        {6980, 7004},
                                                        {7183, 7221},
                                                        {6864, 7221}})});
  const double expected[] = {98.99, 97.15, 96.39};
  for (int i = 0; i < 3; ++i) {
    double got = round2(*s.datasets[i].micro * 100);
    c.expect(got == expected[i], s.datasets[i].name + " rate " + std::to_string(got));
  }
  c.expect(round2(*s.macro * 100) == 97.51, "macro " + std::to_string(*s.macro * 100));
  c.expect(s.total_success == 33413, "total " + std::to_string(s.total_success));
  c.expect(seconds_since(t0) < 1.0, "slower than 1 s");
}

void rule_engine(Check& c) {
  if (!testing_support::python_available()) {
    c.expect(false, "python3 not available");
    return;
  }
  auto tasks = dataset::read_tasks(kCorpus);
  c.expect(tasks.size() >= 30, "corpus has fewer than 30 tasks");
  for (const auto& t : tasks) c.expect(validate::count_tests(t.test) >= 3, t.task_id + " has fewer than 3 tests");

  auto t0 = Clock::now();
  auto dir = fresh_dir("rule");
  auto r = perturb_corpus(dir, true);
  double elapsed = seconds_since(t0);
  c.expect(elapsed < 120.0, "runtime " + std::to_string(elapsed) + " s");

  auto m = json::parse(r.manifest_json);
  c.expect(m["processed"] == tasks.size(), "some tasks skipped at baseline");
  std::int64_t candidates = 0;
  for (auto& [name, cell] : m["concepts"].items()) {
    std::int64_t eligible = cell["eligible"], success = cell["success"];
    candidates += eligible;
    c.expect(success == eligible, name + ": " + std::to_string(success) + "/" + std::to_string(eligible));
    c.expect(cell["failures"]["RejectedByTests"] == 0, name + ": RejectedByTests > 0");
  }
  c.expect(candidates > 0, "no candidates generated");

  // Structural acceptance must agree with execution.
  std::map<std::string, dataset::TaskRecord> by_id;
  for (auto& t : tasks) by_id.emplace(t.task_id, t);
  validate::Sandbox sb;
  for (const auto& rec : dataset::read_records(dir / "dataset.jsonl")) {
    if (rec.verdict != Verdict::AcceptedStructural) continue;
    auto o = validate::run_tests(rec.counterfactual_code, by_id.at(rec.task_id).harness(), sb);
    c.expect(o.verdict == Verdict::AcceptedByTests, rec.task_id + " structural candidate fails tests");
  }
}

void pass_at_k(Check& c) {
  for (int m = 1; m <= 8; ++m) {
    for (int cc = 0; cc <= m; ++cc) {
      for (int k = 1; k <= m; ++k) {
        long total = 0, hit = 0;
        for (unsigned mask = 0; mask < (1u << m); ++mask) {
          if (__builtin_popcount(mask) != k) continue;
          ++total;
          hit += (mask & ((1u << cc) - 1)) != 0;
        }
        double brute = static_cast<double>(hit) / static_cast<double>(total);
        double got = metrics::pass_at_k(m, cc, k);
        c.expect(std::fabs(got - brute) <= 1e-12,
                 "m=" + std::to_string(m) + " c=" + std::to_string(cc) + " k=" + std::to_string(k));
      }
    }
  }
  c.expect(std::fabs(metrics::pass_at_k(5, 2, 1) - 0.4) <= 1e-12, "(5,2,1) != 0.4");
}

void ccs_suite(Check& c) {
  auto p = [](int a, int b) { return metrics::PairVerdict{"t", Concept::IfElseFlip, a, b}; };
  auto half = metrics::ccs({p(1, 1), p(1, 0), p(0, 0)});
  c.expect(half && *half == 0.5, "mixed table != 0.5");
  auto one = metrics::ccs({p(1, 1), p(1, 1)});
  c.expect(one && *one == 1.0, "agreeing table != 1.0");
  c.expect(!metrics::ccs({p(0, 0), p(0, 0)}), "all-fail table is defined");
  std::mt19937 gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<metrics::PairVerdict> pairs;
    int n = 1 + static_cast<int>(gen() % 40);
    for (int i = 0; i < n; ++i) pairs.push_back(p(static_cast<int>(gen() % 2), static_cast<int>(gen() % 2)));
    auto v = metrics::ccs(pairs);
    if (v) c.expect(*v >= 0.0 && *v <= 1.0, "out of range on trial " + std::to_string(trial));
  }
}

void funnel(Check& c) {
  const std::string src =
      "def clamp(x, lo, hi):\n"
      "    result = x\n"
      "    if x < lo:\n"
      "        result = lo\n"
      "    elif x > hi:\n"
      "        result = hi\n"
      "    return result\n";
  auto original = code::SubjectProgram::parse(src, "clamp");
  validate::TestHarness h;
  h.test_code = "assert clamp(5, 0, 10) == 5\nassert clamp(-1, 0, 10) == 0\nassert clamp(11, 0, 10) == 10\n";
  h.timeout_s = 2.0;
  validate::Sandbox sb;

  auto same = validate::validate_candidate(original, src, h, sb);
  c.expect(same.verdict == Verdict::FailureTypeI, "identical: " + std::string(to_string(same.verdict)));

  auto broken = validate::validate_candidate(original, "def clamp(x, lo, hi:\n    return x\n", h, sb);
  c.expect(broken.verdict == Verdict::FailureTypeII, "syntax: " + std::string(to_string(broken.verdict)));

  std::string renamed = src;
  for (std::size_t pos; (pos = renamed.find("result")) != std::string::npos;) renamed.replace(pos, 6, "acc");
  auto alpha = validate::validate_candidate(original, renamed, h, sb, Concept::NameRandom);
  c.expect(alpha.verdict == Verdict::AcceptedStructural, "rename: " + std::string(to_string(alpha.verdict)));
  c.expect(sb.executions() == 0, "fast filter executed tests");

  if (!testing_support::python_available()) {
    c.expect(false, "python3 not available");
    return;
  }
  std::string loop = "def clamp(x, lo, hi):\n    while True:\n        pass\n";
  auto t0 = Clock::now();
  auto hung = validate::validate_candidate(original, loop, h, sb);
  double elapsed = seconds_since(t0);
  c.expect(hung.verdict == Verdict::ExecutionError, "loop: " + std::string(to_string(hung.verdict)));
  c.expect(elapsed <= h.timeout_s + 1.0, "loop took " + std::to_string(elapsed) + " s");
}

void retry_loop(Check& c) {
  dataset::TaskRecord task;
  task.task_id = "R/0";
  task.prompt = "def f(x):\n";
  task.canonical_solution = "    y = x + 1\n    if y > 2:\n        return y\n    else:\n        return 0\n";
  task.test = "assert f(5) == 6\nassert f(0) == 0\nassert f(1) == 0\n";
  task.entry_point = "f";
  auto original = code::SubjectProgram::parse(task.source(), task.entry_point);
  llm::Validator structural = [&](const std::string& cand) {
    if (auto o = validate::fast_filter(original, cand)) return *o;
    validate::ValidationOutcome o;
    o.verdict = Verdict::RejectedByTests;
    return o;
  };
  auto fence = [](const std::string& s) { return "```python\n" + s + "```"; };
  std::string echo = fence(task.source());
  std::string good = fence("def f(x):\n    z = x + 1\n    if z > 2:\n        return z\n    else:\n        return 0\n");
  std::string broken = fence("def f(x:\n");

  struct Scenario {
    std::vector<std::string> replies;
    std::size_t attempts;
    bool success;
    std::vector<Verdict> verdicts;
  };
  std::vector<Scenario> scenarios{
      {{echo}, 5, false, {Verdict::FailureTypeI, Verdict::FailureTypeI, Verdict::FailureTypeI, Verdict::FailureTypeI,
                          Verdict::FailureTypeI}},
      {{good, echo}, 1, true, {Verdict::AcceptedStructural}},
      {{echo, broken, good}, 3, true, {Verdict::FailureTypeI, Verdict::FailureTypeII, Verdict::AcceptedStructural}},
      {{broken, broken, broken, broken, good}, 5, true,
       {Verdict::FailureTypeII, Verdict::FailureTypeII, Verdict::FailureTypeII, Verdict::FailureTypeII,
        Verdict::AcceptedStructural}},
      {{broken, broken, broken, broken, broken, good}, 5, false,
       {Verdict::FailureTypeII, Verdict::FailureTypeII, Verdict::FailureTypeII, Verdict::FailureTypeII,
        Verdict::FailureTypeII}},
  };
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    std::vector<llm::ScriptedReply> replies;
    for (const auto& r : sc.replies) replies.push_back({r, 200, 10});
    llm::ScriptedBackend backend(replies);
    llm::GenerationOptions opt;
    opt.max_retries = 5;
    auto r = llm::generate_with_retries(task, Concept::NameRandom, backend, opt, structural);
    std::string tag = "scenario " + std::to_string(s) + ": ";
    c.expect(r.log.attempts.size() <= 5, tag + "more than 5 attempts");
    c.expect(r.log.attempts.size() == sc.attempts, tag + "attempts " + std::to_string(r.log.attempts.size()));
    c.expect(static_cast<std::size_t>(backend.calls()) == sc.attempts, tag + "backend calls");
    c.expect(r.log.succeeded == sc.success, tag + "success flag");
    c.expect(r.log.total_tokens == 10 * static_cast<std::int64_t>(sc.attempts), tag + "token total");
    for (std::size_t i = 0; i < sc.verdicts.size() && i < r.log.attempts.size(); ++i) {
      c.expect(r.log.attempts[i].verdict == sc.verdicts[i], tag + "attempt " + std::to_string(i + 1) + " verdict");
      c.expect(r.log.attempts[i].index == static_cast<int>(i) + 1, tag + "attempt index");
    }
    if (sc.success) c.expect(r.candidate && r.candidate->attempt == static_cast<int>(sc.attempts), tag + "candidate");
  }
}

void diff_annotation(Check& c) {
  for (std::uint32_t seed = 0; seed < 200; ++seed) {
    auto p = testing_support::random_token_pair(7000 + seed, 64);
    auto spans = dataset::annotate_diff(p.original_text, p.counterfactual_text);
    std::size_t covered = 0;
    for (const auto& s : spans) covered += s.end - s.begin;
    std::size_t oracle = testing_support::min_inserted_chars(p.original, p.counterfactual);
    c.expect(covered == oracle,
             "seed " + std::to_string(seed) + ": " + std::to_string(covered) + " vs " + std::to_string(oracle));
  }

  // Round trip over synthetic records plus everything the rule engine emits.
  std::vector<dataset::DatasetRecord> records;
  std::mt19937 gen(99);
  for (int i = 0; i < 50; ++i) {
    auto p = testing_support::random_token_pair(9000 + i, 64);
    dataset::DatasetRecord r;
    r.task_id = "S/" + std::to_string(i);
    r.kind = perturb::kAllConcepts[gen() % perturb::kAllConcepts.size()];
    r.instruction = "Rewrite \"this\"\n\twith unicode \xc3\xa9 and \\ escapes";
    r.original_code = p.original_text;
    r.counterfactual_code = p.counterfactual_text;
    r.diff_spans = dataset::annotate_diff(p.original_text, p.counterfactual_text);
    r.attempts = 1 + static_cast<int>(gen() % 5);
    r.verdict = gen() % 2 ? Verdict::AcceptedByTests : Verdict::AcceptedStructural;
    r.generator = gen() % 2 ? "rule" : "llm:gpt-4o";
    records.push_back(r);
  }
  auto emitted_path = fs::temp_directory_path() / "procure_acceptance_rule" / "dataset.jsonl";
  if (fs::exists(emitted_path)) {
    auto emitted = dataset::read_records(emitted_path);
    records.insert(records.end(), emitted.begin(), emitted.end());
  }
  auto dir = fresh_dir("roundtrip");
  dataset::write_records(records, dir / "a.jsonl");
  auto back = dataset::read_records(dir / "a.jsonl");
  c.expect(back.size() == records.size(), "record count changed");
  for (std::size_t i = 0; i < std::min(back.size(), records.size()); ++i) {
    c.expect(dataset::to_json_line(back[i]) == dataset::to_json_line(records[i]), "record " + std::to_string(i));
  }
  dataset::write_records(back, dir / "b.jsonl");
  c.expect(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"), "rewritten file differs");
}

void determinism(Check& c) {
  if (!testing_support::python_available()) {
    c.expect(false, "python3 not available");
    return;
  }
  auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  perturb_corpus(a, false);
  perturb_corpus(b, false);
  auto da = slurp(a / "dataset.jsonl");
  c.expect(!da.empty(), "empty dataset");
  c.expect(da == slurp(b / "dataset.jsonl"), "dataset.jsonl differs");
  c.expect(slurp(a / "manifest.json") == slurp(b / "manifest.json"), "manifest.json differs");
}

}  // namespace

int main() {
  criterion("table1-arithmetic", table_one);
  criterion("rule-engine-semantics-preservation", rule_engine);
  criterion("pass-at-k-oracle", pass_at_k);
  criterion("ccs-unit-suite", ccs_suite);
  criterion("validation-funnel", funnel);
  criterion("retry-loop", retry_loop);
  criterion("diff-annotation-and-roundtrip", diff_annotation);
  criterion("end-to-end-determinism", determinism);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
