#include "procure/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "procure/dataset/combine.hpp"
#include "procure/dataset/diff.hpp"
#include "procure/errors.hpp"
#include "procure/llm/generate.hpp"
#include "procure/metrics/metrics.hpp"

namespace procure::cli {
namespace {

using ojson = nlohmann::ordered_json;
using perturb::Concept;
using validate::Verdict;
namespace fs = std::filesystem;

constexpr Verdict kFailureVerdicts[] = {Verdict::FailureTypeI, Verdict::FailureTypeII, Verdict::RejectedByTests,
                                        Verdict::ExecutionError};

class EventLog {
 public:
  EventLog(std::ostream& os, bool quiet) : os_(os), quiet_(quiet) {}

  void emit(const std::string& event, ojson fields = ojson::object()) {
    if (quiet_) return;
    ojson line;
    line["event"] = event;
    for (auto& [k, v] : fields.items()) line[k] = v;
    std::lock_guard lock(mu_);
    os_ << line.dump() << '\n';
    os_.flush();
  }

 private:
  std::ostream& os_;
  bool quiet_;
  std::mutex mu_;
};

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard lock(mu);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::optional<double> ratio(std::int64_t a, std::int64_t b) {
  if (b == 0) return std::nullopt;
  return static_cast<double>(a) / static_cast<double>(b);
}

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

double round_to(double v, int digits) {
  double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

// One validated attempt at a counterfactual for a task and concept.
struct Unit {
  Concept kind = Concept::IfElseFlip;
  Verdict verdict = Verdict::FailureTypeI;
  int attempts = 1;
  std::int64_t tokens = 0;
  std::string detail;
  std::optional<dataset::DatasetRecord> record;
};

struct TaskOutcome {
  std::string task_id;
  std::string skipped;  // reason; empty when processed
  std::vector<Unit> units;
};

// Parses the original and checks that it passes its own tests.
std::optional<code::SubjectProgram> prepare(const dataset::TaskRecord& task, const validate::TestHarness& harness,
                                            const validate::Sandbox& sandbox, TaskOutcome& out) {
  std::optional<code::SubjectProgram> program;
  try {
    program = code::SubjectProgram::parse(task.source(), task.entry_point, task.task_id);
  } catch (const Error& e) {
    out.skipped = std::string("original does not parse: ") + e.what();
    return std::nullopt;
  }
  auto baseline = validate::run_tests(task.source(), harness, sandbox);
  if (baseline.verdict != Verdict::AcceptedByTests) {
    out.skipped = "original fails its tests: " + std::string(validate::to_string(baseline.verdict));
    return std::nullopt;
  }
  return program;
}

dataset::DatasetRecord make_record(const dataset::TaskRecord& task, Concept kind, const std::string& counterfactual,
                                   int attempts, Verdict verdict, const std::string& generator) {
  dataset::DatasetRecord r;
  r.task_id = task.task_id;
  r.kind = kind;
  r.instruction = task.prompt;
  r.original_code = task.source();
  r.counterfactual_code = counterfactual;
  r.diff_spans = dataset::annotate_diff(r.original_code, counterfactual);
  r.attempts = attempts;
  r.verdict = verdict;
  r.generator = generator;
  return r;
}

perturb::SiteOptions site_options_for(const dataset::TaskRecord& task) {
  perturb::SiteOptions o;
  o.protected_names = perturb::keyword_argument_names(task.test);
  return o;
}

void rule_task(const RunConfig& cfg, const dataset::TaskRecord& task, const validate::Sandbox& sandbox,
               TaskOutcome& out) {
  auto harness = task.harness(cfg.timeout_s);
  auto program = prepare(task, harness, sandbox, out);
  if (!program) return;
  auto options = site_options_for(task);
  for (Concept kind : cfg.concepts) {
    auto sites = perturb::enumerate_sites(*program, kind, options);
    if (sites.empty()) {
      Unit u;
      u.kind = kind;
      u.verdict = Verdict::FailureTypeI;
      u.detail = program->unsupported() ? "unsupported construct: " + *program->unsupported() : "no applicable site";
      out.units.push_back(std::move(u));
      continue;
    }
    std::vector<std::size_t> chosen;
    if (cfg.all_sites) {
      for (std::size_t i = 0; i < sites.size(); ++i) chosen.push_back(i);
    } else {
      chosen.push_back(perturb::select_site(sites.size(), cfg.seed, task.task_id, kind));
    }
    for (std::size_t idx : chosen) {
      Unit u;
      u.kind = kind;
      try {
        auto cand = perturb::apply(*program, sites[idx], cfg.seed, options);
        auto outcome = validate::validate_candidate(*program, cand.source, harness, sandbox, kind);
        u.verdict = outcome.verdict;
        u.detail = outcome.detail;
        if (validate::is_accepted(outcome.verdict)) {
          u.record = make_record(task, kind, cand.source, 1, outcome.verdict, "rule");
        }
      } catch (const NotApplicable& e) {
        u.verdict = Verdict::FailureTypeII;
        u.detail = e.what();
      }
      out.units.push_back(std::move(u));
    }
  }
}

void llm_task(const RunConfig& cfg, const dataset::TaskRecord& task, const validate::Sandbox& sandbox,
              llm::LlmBackend& backend, TaskOutcome& out, std::atomic<std::size_t>& transport_failures) {
  auto harness = task.harness(cfg.timeout_s);
  auto program = prepare(task, harness, sandbox, out);
  if (!program) return;
  llm::GenerationOptions options;
  options.max_retries = cfg.n_retries;
  options.variant = cfg.variant;
  options.site_options = site_options_for(task);
  for (Concept kind : cfg.concepts) {
    Unit u;
    u.kind = kind;
    auto validator = [&](const std::string& cand) {
      return validate::validate_candidate(*program, cand, harness, sandbox, kind);
    };
    try {
      auto result = llm::generate_with_retries(task, kind, backend, options, validator);
      u.verdict = result.outcome.verdict;
      u.detail = result.outcome.detail;
      u.attempts = static_cast<int>(result.log.attempts.size());
      u.tokens = result.log.total_tokens;
      if (result.candidate) {
        u.record = make_record(task, kind, result.candidate->source, u.attempts, u.verdict,
                               "llm:" + backend.model_id());
      }
    } catch (const TransportError& e) {
      ++transport_failures;
      u.verdict = Verdict::ExecutionError;
      u.attempts = cfg.n_retries;
      u.detail = std::string("transport: ") + e.what();
    }
    out.units.push_back(std::move(u));
  }
}

struct ConceptTally {
  std::int64_t pairs = 0;
  std::int64_t success = 0;
  std::map<Verdict, std::int64_t> failures;
  std::int64_t attempts = 0;
  std::int64_t tokens = 0;
};

ojson manifest_json(const RunConfig& cfg, const std::string& engine_label, const std::vector<TaskOutcome>& outcomes,
                    std::size_t records) {
  std::map<Concept, ConceptTally> tally;
  for (Concept c : cfg.concepts) tally[c];
  ojson skipped = ojson::array();
  std::size_t processed = 0;
  for (const auto& t : outcomes) {
    if (!t.skipped.empty()) {
      skipped.push_back({{"task_id", t.task_id}, {"reason", t.skipped}});
      continue;
    }
    ++processed;
    for (const auto& u : t.units) {
      auto& ct = tally[u.kind];
      ++ct.pairs;
      ct.attempts += u.attempts;
      ct.tokens += u.tokens;
      if (validate::is_accepted(u.verdict)) {
        ++ct.success;
      } else {
        ++ct.failures[u.verdict];
      }
    }
  }

  ojson m;
  m["dataset"] = cfg.dataset_name.empty() ? cfg.input_path.stem().string() : cfg.dataset_name;
  m["engine"] = engine_label;
  m["seed"] = cfg.seed;
  if (cfg.engine == "llm") {
    m["variant"] = llm::to_string(cfg.variant);
    m["max_retries"] = cfg.n_retries;
  } else {
    m["all_sites"] = cfg.all_sites;
  }
  m["tasks"] = outcomes.size();
  m["processed"] = processed;
  m["records"] = records;
  m["skipped"] = std::move(skipped);
  ojson concepts = ojson::object();
  std::int64_t total_success = 0, total_eligible = 0, total_pairs = 0;
  for (Concept c : cfg.concepts) {
    const auto& ct = tally[c];
    std::int64_t non_eligible = ct.failures.count(Verdict::FailureTypeI) ? ct.failures.at(Verdict::FailureTypeI) : 0;
    std::int64_t eligible = ct.pairs - non_eligible;
    ojson failures = ojson::object();
    for (Verdict v : kFailureVerdicts) {
      failures[std::string(validate::to_string(v))] = ct.failures.count(v) ? ct.failures.at(v) : 0;
    }
    ojson cj;
    cj["pairs"] = ct.pairs;
    cj["eligible"] = eligible;
    cj["success"] = ct.success;
    cj["non_eligible"] = non_eligible;
    cj["failures"] = std::move(failures);
    cj["rate"] = opt_json(ratio(ct.success, eligible));
    cj["avg_attempts"] = ct.pairs ? static_cast<double>(ct.attempts) / static_cast<double>(ct.pairs) : 0.0;
    cj["avg_tokens"] = ct.pairs ? static_cast<double>(ct.tokens) / static_cast<double>(ct.pairs) : 0.0;
    concepts[std::string(perturb::to_string(c))] = std::move(cj);
    total_success += ct.success;
    total_eligible += eligible;
    total_pairs += ct.pairs;
  }
  m["concepts"] = std::move(concepts);
  m["totals"] = {{"pairs", total_pairs},
                 {"eligible", total_eligible},
                 {"success", total_success},
                 {"rate", opt_json(ratio(total_success, total_eligible))}};
  return m;
}

template <typename TaskFn>
RunResult run_generation(const RunConfig& cfg, std::ostream& log_stream, const std::string& engine_label,
                         TaskFn&& task_fn) {
  cfg.check();
  EventLog log(log_stream, cfg.quiet);
  auto tasks = dataset::read_tasks(cfg.input_path);
  fs::create_directories(cfg.output_dir);
  log.emit("start", {{"engine", engine_label}, {"tasks", tasks.size()}, {"workers", cfg.workers}});

  std::vector<TaskOutcome> outcomes(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    outcomes[i].task_id = tasks[i].task_id;
    task_fn(tasks[i], outcomes[i]);
    ojson ev{{"task_id", tasks[i].task_id}};
    if (!outcomes[i].skipped.empty()) {
      ev["skipped"] = outcomes[i].skipped;
    } else {
      ojson verdicts = ojson::array();
      for (const auto& u : outcomes[i].units) {
        verdicts.push_back({{"concept", perturb::to_string(u.kind)},
                            {"verdict", validate::to_string(u.verdict)},
                            {"attempts", u.attempts}});
      }
      ev["results"] = std::move(verdicts);
    }
    log.emit("task", std::move(ev));
  });

  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const TaskOutcome& a, const TaskOutcome& b) { return a.task_id < b.task_id; });
  std::vector<dataset::DatasetRecord> records;
  RunResult result;
  for (const auto& t : outcomes) {
    if (!t.skipped.empty()) ++result.partial_failures;
    std::vector<const Unit*> units;
    for (const auto& u : t.units) units.push_back(&u);
    std::stable_sort(units.begin(), units.end(), [](const Unit* a, const Unit* b) { return a->kind < b->kind; });
    for (const Unit* u : units) {
      if (u->record) records.push_back(*u->record);
    }
  }
  result.records = dataset::write_records(records, cfg.output_dir / "dataset.jsonl");
  ojson manifest = manifest_json(cfg, engine_label, outcomes, records.size());
  result.manifest_json = manifest.dump(2) + "\n";
  write_text(cfg.output_dir / "manifest.json", result.manifest_json);
  log.emit("done", {{"records", result.records}, {"skipped", result.partial_failures}});
  return result;
}

metrics::AttributionRow attribution_row(const ojson& j, std::size_t lineno) {
  metrics::AttributionRow r;
  auto str = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw SchemaError(lineno, key);
    return j[key].get<std::string>();
  };
  r.task_id = str("task_id");
  r.variant = str("variant");
  if (!j.contains("sample_index") || !j["sample_index"].is_number_integer()) throw SchemaError(lineno, "sample_index");
  r.sample_index = j["sample_index"].get<int>();
  return r;
}

}  // namespace

void RunConfig::check() const {
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (concepts.empty()) throw std::invalid_argument("no concepts selected");
  if (!(timeout_s > 0)) throw std::invalid_argument("timeout must be positive");
  if (engine != "rule" && engine != "llm") throw std::invalid_argument("engine must be rule or llm");
  if (engine == "llm" && n_retries < 1) throw std::invalid_argument("n-retries must be at least 1");
  if (output_dir.empty()) throw std::invalid_argument("an output directory is required");
}

RunResult cmd_perturb(const RunConfig& cfg, std::ostream& log) {
  validate::Sandbox sandbox;
  sandbox.interpreter();
  return run_generation(cfg, log, "rule", [&](const dataset::TaskRecord& task, TaskOutcome& out) {
    rule_task(cfg, task, sandbox, out);
  });
}

RunResult cmd_gen(const RunConfig& cfg, std::ostream& log) {
  if (cfg.backend_config.empty()) throw std::invalid_argument("--backend-config is required for the llm engine");
  auto backend_cfg = llm::BackendConfig::load(cfg.backend_config);
  RunConfig run = cfg;
  run.engine = "llm";
  if (run.n_retries < 1) run.n_retries = backend_cfg.max_retries;
  auto backend = llm::make_backend(backend_cfg);
  validate::Sandbox sandbox;
  sandbox.interpreter();
  std::atomic<std::size_t> transport_failures{0};
  auto result = run_generation(run, log, "llm:" + backend->model_id(), [&](const dataset::TaskRecord& task,
                                                                          TaskOutcome& out) {
    llm_task(run, task, sandbox, *backend, out, transport_failures);
  });
  result.partial_failures += transport_failures.load();
  return result;
}

std::size_t cmd_validate(const ValidateConfig& cfg, std::ostream& out, std::ostream& log_stream) {
  EventLog log(log_stream, false);
  auto records = dataset::read_records(cfg.records);
  std::map<std::string, dataset::TaskRecord> tasks;
  for (auto& t : dataset::read_tasks(cfg.tasks)) tasks.emplace(t.task_id, std::move(t));
  validate::Sandbox sandbox;
  sandbox.interpreter();

  std::vector<ojson> lines(records.size());
  std::vector<bool> ok(records.size(), false);
  parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
    const auto& r = records[i];
    ojson j;
    j["task_id"] = r.task_id;
    j["concept"] = perturb::to_string(r.kind);
    j["stored_verdict"] = validate::to_string(r.verdict);
    auto it = tasks.find(r.task_id);
    if (it == tasks.end()) {
      j["verdict"] = nullptr;
      j["detail"] = "unknown task";
      lines[i] = std::move(j);
      return;
    }
    try {
      auto program = code::SubjectProgram::parse(r.original_code, it->second.entry_point, r.task_id);
      auto o = validate::validate_candidate(program, r.counterfactual_code, it->second.harness(cfg.timeout_s),
                                            sandbox, r.kind);
      j["verdict"] = validate::to_string(o.verdict);
      j["stage"] = o.stage;
      j["tests_run"] = o.tests_run;
      j["detail"] = o.detail;
      ok[i] = validate::is_accepted(o.verdict);
    } catch (const SyntaxError& e) {
      j["verdict"] = nullptr;
      j["detail"] = std::string("original does not parse: ") + e.what();
    } catch (const MissingEntryPoint& e) {
      j["verdict"] = nullptr;
      j["detail"] = e.what();
    }
    lines[i] = std::move(j);
  });

  std::string report;
  for (const auto& l : lines) report += l.dump() + "\n";
  if (!cfg.output.empty()) write_text(cfg.output, report);
  std::size_t failed = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), false));
  out << ojson{{"records", records.size()}, {"accepted", records.size() - failed}, {"not_accepted", failed}}.dump()
      << "\n";
  log.emit("done", {{"records", records.size()}, {"not_accepted", failed}});
  return failed;
}

void cmd_build_dataset(const BuildConfig& cfg, std::ostream& log_stream) {
  EventLog log(log_stream, false);
  auto tasks = dataset::read_tasks(cfg.tasks);
  auto records = dataset::read_records(cfg.records);
  std::vector<dataset::OriginalEntry> originals;
  std::vector<std::string> ids;
  for (const auto& t : tasks) {
    originals.push_back(dataset::OriginalEntry::from_task(t));
    ids.push_back(t.task_id);
  }
  auto groups = dataset::build_combined(originals, records);
  auto plan = dataset::plan_batches(groups, cfg.batch_size, cfg.seed);
  auto [selected, rest] = dataset::split_tasks(ids, cfg.seed);
  fs::create_directories(cfg.output_dir);

  std::string combined;
  for (const auto& g : groups) {
    ojson j;
    j["task_id"] = g.original.task_id;
    j["instruction"] = g.original.instruction;
    j["original_code"] = g.original.code;
    ojson cfs = ojson::array();
    for (const auto& r : g.counterfactuals) cfs.push_back(ojson::parse(dataset::to_json_line(r)));
    j["counterfactuals"] = std::move(cfs);
    combined += j.dump() + "\n";
  }
  write_text(cfg.output_dir / "combined.jsonl", combined);

  ojson batches = ojson::array();
  for (const auto& b : plan.batches) {
    ojson ids_json = ojson::array();
    for (std::size_t g : b) ids_json.push_back(groups[g].original.task_id);
    batches.push_back(std::move(ids_json));
  }
  write_text(cfg.output_dir / "batches.json",
             ojson{{"batch_size", plan.batch_size}, {"seed", cfg.seed}, {"batches", batches}}.dump(2) + "\n");
  write_text(cfg.output_dir / "split.json",
             ojson{{"seed", cfg.seed}, {"fraction", 0.5}, {"selected", selected}, {"rest", rest}}.dump(2) + "\n");
  log.emit("done", {{"groups", groups.size()}, {"batches", plan.batches.size()}});
}

std::string cmd_eval(const EvalConfig& cfg, std::ostream& log_stream) {
  EventLog log(log_stream, false);
  std::istringstream in(read_text(cfg.table));
  std::vector<metrics::AttributionRow> rows;
  std::vector<std::pair<std::size_t, ojson>> pending;  // rows that still need execution
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const ojson::parse_error&) {
      throw SchemaError(lineno, "<json>");
    }
    auto row = attribution_row(j, lineno);
    if (j.contains("attributed")) {
      if (!j["attributed"].is_number_integer()) throw SchemaError(lineno, "attributed");
      row.attributed = j["attributed"].get<int>();
    } else if (j.contains("completion") && j["completion"].is_string()) {
      if (j.contains("prefix") && !j["prefix"].is_string()) throw SchemaError(lineno, "prefix");
      pending.emplace_back(rows.size(), std::move(j));
    } else {
      throw SchemaError(lineno, "attributed");
    }
    rows.push_back(std::move(row));
  }

  if (!pending.empty()) {
    if (cfg.tasks.empty()) throw std::invalid_argument("completion rows need --tasks");
    std::map<std::string, dataset::TaskRecord> tasks;
    for (auto& t : dataset::read_tasks(cfg.tasks)) tasks.emplace(t.task_id, std::move(t));
    validate::Sandbox sandbox;
    sandbox.interpreter();
    parallel_for(pending.size(), cfg.workers, [&](std::size_t i) {
      auto& [idx, j] = pending[i];
      auto it = tasks.find(rows[idx].task_id);
      if (it == tasks.end()) throw SchemaError(0, "task_id " + rows[idx].task_id);
      rows[idx].attributed = metrics::attribute(it->second.prompt, j.value("prefix", std::string()),
                                                j["completion"].get<std::string>(),
                                                it->second.harness(cfg.timeout_s), sandbox);
    });
  }

  auto rep = metrics::evaluate(rows);
  ojson out;
  out["rows"] = rows.size();
  out["pass_at_1"] = opt_json(rep.pass_at_1);
  out["pass_at_5"] = opt_json(rep.pass_at_5);
  out["ccs_overall"] = opt_json(rep.ccs_overall);
  ojson per = ojson::object();
  for (const auto& [c, v] : rep.ccs_per_concept) per[std::string(perturb::to_string(c))] = opt_json(v);
  out["ccs_per_concept"] = std::move(per);
  log.emit("done", {{"rows", rows.size()}, {"executed", pending.size()}});
  return out.dump(2) + "\n";
}

std::string cmd_stats(const fs::path& manifest_path) {
  ojson in;
  try {
    in = ojson::parse(read_text(manifest_path));
  } catch (const ojson::parse_error&) {
    throw SchemaError(0, "<json>");
  }
  std::vector<ojson> sets;
  if (in.contains("datasets")) {
    if (!in["datasets"].is_array()) throw SchemaError(0, "datasets");
    for (const auto& d : in["datasets"]) sets.push_back(d);
  } else {
    sets.push_back(in);
  }

  std::vector<metrics::DatasetCells> cells;
  std::vector<metrics::DatasetCosts> costs;
  bool have_costs = true;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const ojson& d = sets[i];
    std::string name = d.contains("name") ? d["name"].get<std::string>()
                       : d.contains("dataset") ? d["dataset"].get<std::string>()
                                               : "dataset" + std::to_string(i);
    if (!d.contains("concepts") || !d["concepts"].is_object()) throw SchemaError(i + 1, "concepts");
    metrics::DatasetCells dc{name, {}};
    metrics::DatasetCosts dk{name, {}};
    for (const auto& [cname, cj] : d["concepts"].items()) {
      Concept c;
      try {
        c = perturb::concept_from_string(cname);
      } catch (const std::invalid_argument&) {
        throw SchemaError(i + 1, "concepts." + cname);
      }
      for (const char* key : {"success", "eligible"}) {
        if (!cj.contains(key) || !cj[key].is_number_integer()) throw SchemaError(i + 1, cname + "." + key);
      }
      dc.cells[c] = {cj["success"].get<std::int64_t>(), cj["eligible"].get<std::int64_t>()};
      if (cj.contains("avg_attempts") && cj.contains("avg_tokens") && cj["avg_attempts"].is_number() &&
          cj["avg_tokens"].is_number()) {
        dk.cells[c] = {cj["avg_attempts"].get<double>(), cj["avg_tokens"].get<double>()};
      } else {
        have_costs = false;
      }
    }
    cells.push_back(std::move(dc));
    costs.push_back(std::move(dk));
  }

  auto s = metrics::success_stats(cells);
  ojson out;
  ojson rows = ojson::array();
  for (const auto& d : s.datasets) {
    ojson r;
    r["name"] = d.name;
    ojson per = ojson::object();
    for (const auto& [c, v] : d.per_concept) per[std::string(perturb::to_string(c))] = opt_json(v);
    r["per_concept"] = std::move(per);
    r["success"] = d.success;
    r["eligible"] = d.eligible;
    r["rate"] = opt_json(d.micro);
    r["rate_pct"] = d.micro ? ojson(round_to(*d.micro * 100, 2)) : ojson(nullptr);
    rows.push_back(std::move(r));
  }
  out["datasets"] = std::move(rows);
  out["macro_rate"] = opt_json(s.macro);
  out["macro_rate_pct"] = s.macro ? ojson(round_to(*s.macro * 100, 2)) : ojson(nullptr);
  out["total_success"] = s.total_success;
  if (have_costs) {
    auto k = metrics::cost_stats(costs);
    ojson crow = ojson::array();
    for (const auto& r : k.rows) {
      crow.push_back({{"name", r.name},
                      {"avg_attempts", r.mean.attempts},
                      {"avg_attempts_2dp", round_to(r.mean.attempts, 2)},
                      {"avg_tokens", r.mean.tokens},
                      {"avg_tokens_rounded", std::llround(r.mean.tokens)}});
    }
    out["costs"] = {{"datasets", crow},
                    {"macro_attempts", k.macro.attempts},
                    {"macro_attempts_2dp", round_to(k.macro.attempts, 2)},
                    {"macro_tokens", k.macro.tokens},
                    {"macro_tokens_rounded", std::llround(k.macro.tokens)}};
  }
  return out.dump(2) + "\n";
}

std::string cmd_prompt(const fs::path& tasks_path, const std::string& task_id, Concept kind,
                       llm::PromptVariant variant) {
  for (const auto& t : dataset::read_tasks(tasks_path)) {
    if (t.task_id == task_id) return llm::build_prompt(t, kind, variant, site_options_for(t));
  }
  throw std::invalid_argument("no task '" + task_id + "' in " + tasks_path.string());
}

}  // namespace procure::cli
