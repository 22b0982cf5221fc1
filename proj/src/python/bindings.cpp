#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <json.hpp>

#include "procure/cli/commands.hpp"
#include "procure/code/digest.hpp"
#include "procure/dataset/diff.hpp"
#include "procure/dataset/task.hpp"
#include "procure/errors.hpp"
#include "procure/llm/generate.hpp"
#include "procure/metrics/metrics.hpp"
#include "procure/perturb/perturb.hpp"
#include "procure/validate/validate.hpp"

namespace py = pybind11;
using namespace procure;

namespace {

perturb::SiteOptions options_for(const std::vector<std::string>& protected_names) {
  perturb::SiteOptions o;
  o.protected_names.insert(protected_names.begin(), protected_names.end());
  return o;
}

std::optional<perturb::Concept> maybe_concept(const std::optional<std::string>& name) {
  if (!name) return std::nullopt;
  return perturb::concept_from_string(*name);
}

py::dict outcome_dict(const validate::ValidationOutcome& o) {
  py::dict d;
  d["verdict"] = std::string(validate::to_string(o.verdict));
  d["detail"] = o.detail;
  d["tests_run"] = o.tests_run;
  d["duration_ms"] = o.duration_ms;
  d["stage"] = o.stage;
  return d;
}

py::object json_to_py(const std::string& text) {
  return py::module_::import("json").attr("loads")(text);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Counterfactual code perturbation, validation and metrics.";

  auto base = py::register_exception<Error>(m, "ProcureError");
  py::register_exception<SyntaxError>(m, "ParseError", base);
  py::register_exception<MissingEntryPoint>(m, "MissingEntryPoint", base);
  py::register_exception<UnsupportedConstruct>(m, "UnsupportedConstruct", base);
  py::register_exception<NotApplicable>(m, "NotApplicable", base);
  py::register_exception<SandboxUnavailable>(m, "SandboxUnavailable", base);
  py::register_exception<TransportError>(m, "TransportError", base);
  py::register_exception<SchemaError>(m, "SchemaError", base);
  py::register_exception<DomainError>(m, "DomainError", base);

  m.attr("CONCEPTS") = [] {
    std::vector<std::string> names;
    for (auto c : perturb::kAllConcepts) names.emplace_back(perturb::to_string(c));
    return names;
  }();

  m.def(
      "structural_digest",
      [](const std::string& source, const std::string& entry_point) {
        auto d = code::structural_digest(code::SubjectProgram::parse(source, entry_point));
        py::dict out;
        out["raw_hash"] = d.raw_hash;
        out["ast_hash"] = d.ast_hash;
        out["alpha_hash"] = d.alpha_hash;
        return out;
      },
      py::arg("source"), py::arg("entry_point"));

  m.def(
      "enumerate_sites",
      [](const std::string& source, const std::string& entry_point, const std::string& kind,
         const std::vector<std::string>& protected_names) {
        auto program = code::SubjectProgram::parse(source, entry_point);
        py::list out;
        for (const auto& s :
             perturb::enumerate_sites(program, perturb::concept_from_string(kind), options_for(protected_names))) {
          py::dict d;
          d["concept"] = std::string(perturb::to_string(s.kind));
          d["elements"] = s.elements;
          d["notes"] = s.notes;
          out.append(d);
        }
        return out;
      },
      py::arg("source"), py::arg("entry_point"), py::arg("concept"),
      py::arg("protected") = std::vector<std::string>{});

  m.def(
      "perturb",
      [](const std::string& source, const std::string& entry_point, const std::string& kind, std::size_t site,
         std::uint64_t seed, const std::vector<std::string>& protected_names) {
        auto program = code::SubjectProgram::parse(source, entry_point);
        auto opts = options_for(protected_names);
        auto sites = perturb::enumerate_sites(program, perturb::concept_from_string(kind), opts);
        if (site >= sites.size()) throw py::index_error("site index out of range");
        auto cand = perturb::apply(program, sites[site], seed, opts);
        py::dict d;
        d["source"] = cand.source;
        d["impact_region"] = cand.impact_region;
        if (cand.rename_map) d["rename_map"] = *cand.rename_map;
        return d;
      },
      py::arg("source"), py::arg("entry_point"), py::arg("concept"), py::arg("site") = 0, py::arg("seed") = 0,
      py::arg("protected") = std::vector<std::string>{});

  m.def(
      "fast_filter",
      [](const std::string& original, const std::string& entry_point, const std::string& candidate,
         const std::optional<std::string>& kind) -> py::object {
        auto program = code::SubjectProgram::parse(original, entry_point);
        auto o = validate::fast_filter(program, candidate, maybe_concept(kind));
        if (!o) return py::none();
        return outcome_dict(*o);
      },
      py::arg("original"), py::arg("entry_point"), py::arg("candidate"), py::arg("concept") = py::none());

  m.def(
      "validate",
      [](const std::string& original, const std::string& entry_point, const std::string& candidate,
         const std::string& test, const std::string& prelude, double timeout, const std::optional<std::string>& kind) {
        auto program = code::SubjectProgram::parse(original, entry_point);
        validate::TestHarness h{prelude, test, timeout};
        validate::Sandbox sb;
        py::gil_scoped_release release;
        auto o = validate::validate_candidate(program, candidate, h, sb, maybe_concept(kind));
        py::gil_scoped_acquire acquire;
        return outcome_dict(o);
      },
      py::arg("original"), py::arg("entry_point"), py::arg("candidate"), py::arg("test"), py::arg("prelude") = "",
      py::arg("timeout") = 10.0, py::arg("concept") = py::none());

  m.def(
      "annotate_diff",
      [](const std::string& original, const std::string& counterfactual) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto& s : dataset::annotate_diff(original, counterfactual)) out.emplace_back(s.begin, s.end);
        return out;
      },
      py::arg("original"), py::arg("counterfactual"));

  m.def("pass_at_k", &metrics::pass_at_k, py::arg("m"), py::arg("c"), py::arg("k"));

  m.def(
      "ccs",
      [](const std::vector<std::pair<int, int>>& pairs) {
        std::vector<metrics::PairVerdict> rows;
        for (auto [a, b] : pairs) rows.push_back({"", perturb::Concept::IfElseFlip, a, b});
        return metrics::ccs(rows);
      },
      py::arg("pairs"));

  m.def(
      "render_prompt",
      [](const std::string& source, const std::string& entry_point, const std::string& kind, const std::string& variant,
         const std::vector<std::string>& protected_names) {
        dataset::TaskRecord t;
        t.task_id = "py";
        t.prompt = source;
        t.entry_point = entry_point;
        return llm::build_prompt(t, perturb::concept_from_string(kind), llm::variant_from_string(variant),
                                 options_for(protected_names));
      },
      py::arg("source"), py::arg("entry_point"), py::arg("concept"), py::arg("variant") = "Full",
      py::arg("protected") = std::vector<std::string>{});

  m.def(
      "perturb_corpus",
      [](const std::filesystem::path& input, const std::filesystem::path& output_dir,
         const std::optional<std::vector<std::string>>& concepts, std::uint64_t seed, int workers, double timeout,
         bool all_sites) {
        cli::RunConfig cfg;
        cfg.input_path = input;
        cfg.output_dir = output_dir;
        if (concepts) {
          cfg.concepts.clear();
          for (const auto& c : *concepts) cfg.concepts.push_back(perturb::concept_from_string(c));
        }
        cfg.seed = seed;
        cfg.workers = workers;
        cfg.timeout_s = timeout;
        cfg.all_sites = all_sites;
        cfg.quiet = true;
        std::ostringstream log;
        cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = cli::cmd_perturb(cfg, log);
        }
        return json_to_py(r.manifest_json);
      },
      py::arg("input"), py::arg("output_dir"), py::arg("concepts") = py::none(), py::arg("seed") = 0,
      py::arg("workers") = 1, py::arg("timeout") = 10.0, py::arg("all_sites") = false);

  m.def(
      "stats", [](const std::filesystem::path& manifest) { return json_to_py(cli::cmd_stats(manifest)); },
      py::arg("manifest"));
}
