#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dce/cluster.hpp"
#include "dce/config.hpp"
#include "dce/embedding.hpp"
#include "dce/errors.hpp"
#include "dce/memory.hpp"
#include "dce/metrics.hpp"
#include "dce/pipeline.hpp"
#include "dce/prompt.hpp"
#include "dce/runlog.hpp"
#include "dce/vts.hpp"

namespace py = pybind11;

namespace {

dce::CampaignConfig config_from_dict(const py::dict& overrides) {
  dce::CampaignConfig config;
  for (auto item : overrides) {
    std::string key = py::cast<std::string>(item.first);
    std::string value = py::cast<std::string>(py::str(item.second));
    // python booleans stringify as True/False
    if (value == "True") value = "true";
    if (value == "False") value = "false";
    dce::apply_config_kv(config, key, value);
  }
  config.validate();
  return config;
}

py::dict summary_to_dict(const dce::CampaignSummary& s) {
  py::dict d;
  d["batches_completed"] = s.batches_completed;
  d["generated"] = s.generated;
  d["parse_rejected"] = s.parse_rejected;
  d["vts_rejected"] = s.vts_rejected;
  d["dedup_rejected"] = s.dedup_rejected;
  d["accepted"] = s.accepted;
  d["prompt_tokens"] = s.prompt_tokens;
  d["completion_tokens"] = s.completion_tokens;
  d["completed"] = s.completed;
  return d;
}

py::dict candidate_to_dict(const dce::CandidateRecord& r) {
  py::dict d;
  d["seq"] = r.seq;
  d["batch"] = r.batch_index;
  d["slot"] = r.slot_index;
  d["name"] = r.name;
  d["description"] = r.description;
  d["category"] = r.category;
  if (r.probability) d["probability"] = *r.probability;
  else d["probability"] = py::none();
  d["strategy"] = r.strategy;
  d["phase"] = r.phase;
  d["outcome"] = dce::outcome_name(r.outcome);
  d["reject_reason"] = r.reject_reason;
  if (r.accept_order) d["accept_order"] = *r.accept_order;
  else d["accept_order"] = py::none();
  if (r.dedup_max_similarity) d["dedup_max_similarity"] = *r.dedup_max_similarity;
  else d["dedup_max_similarity"] = py::none();
  return d;
}

py::object opt_to_py(const std::optional<double>& v) {
  if (v) return py::float_(*v);
  return py::none();
}

std::vector<py::object> series_to_py(const std::vector<std::optional<double>>& raw) {
  std::vector<py::object> out;
  out.reserve(raw.size());
  for (const auto& v : raw) out.push_back(opt_to_py(v));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "diversity-aware batch generation engine";

  py::register_exception<dce::ConfigError>(m, "ConfigError");
  py::register_exception<dce::AnalysisError>(m, "AnalysisError");
  py::register_exception<dce::StorageError>(m, "StorageError");

  // campaign execution
  m.def(
      "run_campaign",
      [](const py::dict& config, const std::string& run_dir, const std::string& arm) {
        dce::CampaignConfig c = config_from_dict(config);
        if (!arm.empty()) dce::apply_arm(c, arm);
        return summary_to_dict(dce::run_campaign(c, run_dir));
      },
      py::arg("config"), py::arg("run_dir"), py::arg("arm") = "",
      "Run a campaign. config is a dict of config-file keys (string values).");

  m.def(
      "resume_campaign",
      [](const std::string& run_dir) {
        return summary_to_dict(dce::resume_campaign(run_dir));
      },
      py::arg("run_dir"));

  m.def("default_config", []() {
    py::dict d;
    dce::CampaignConfig config;
    std::istringstream text(dce::canonical_config_text(config));
    std::string line;
    while (std::getline(text, line)) {
      auto eq = line.find('=');
      if (eq != std::string::npos) {
        d[py::str(line.substr(0, eq))] = line.substr(eq + 1);
      }
    }
    return d;
  });

  // run data access
  py::class_<dce::RunData>(m, "RunData")
      .def_property_readonly("batch_count",
                             [](const dce::RunData& r) { return r.config.batch_count; })
      .def_property_readonly("max_batch", &dce::RunData::max_batch_index)
      .def("candidates",
           [](const dce::RunData& r) {
             std::vector<py::dict> out;
             out.reserve(r.candidates.size());
             for (const auto& c : r.candidates) out.push_back(candidate_to_dict(c));
             return out;
           })
      .def("embedding",
           [](const dce::RunData& r, std::int64_t seq) -> py::object {
             const std::vector<double>* v = r.embedding_of(seq);
             if (!v) return py::none();
             return py::cast(*v);
           },
           py::arg("seq"));

  m.def("load_run", &dce::load_run, py::arg("run_dir"));

  // metrics
  m.def(
      "edv_series",
      [](const dce::RunData& run, const std::string& formulation) {
        return series_to_py(
            dce::metrics::edv_series(run, dce::metrics::formulation_from_name(formulation))
                .raw);
      },
      py::arg("run"), py::arg("formulation") = "multiplicative");

  m.def(
      "edv_retention",
      [](const dce::RunData& run, const std::string& formulation) {
        auto r = dce::metrics::edv_retention(
            dce::metrics::edv_series(run, dce::metrics::formulation_from_name(formulation)));
        py::dict d;
        d["percent"] = r.percent;
        d["first_batch"] = r.first_batch;
        d["last_batch"] = r.last_batch;
        d["flagged"] = r.flagged;
        return d;
      },
      py::arg("run"), py::arg("formulation") = "multiplicative");

  m.def(
      "novelty_series",
      [](const dce::RunData& run) {
        return series_to_py(dce::metrics::novelty_series(run).raw);
      },
      py::arg("run"));

  m.def(
      "collapse_rate",
      [](const dce::RunData& run, double delta, int window) {
        auto c = dce::metrics::collapse_rate(run, delta, window);
        py::dict d;
        d["percent"] = c.percent;
        d["late_ideas"] = c.late_ideas;
        d["collapsed"] = c.collapsed;
        return d;
      },
      py::arg("run"), py::arg("delta") = 0.85, py::arg("window") = 50);

  m.def(
      "confusion_matrix",
      [](const dce::RunData& run, double tau, double delta) {
        auto c = dce::metrics::confusion_matrix(run, tau, delta);
        py::dict d;
        d["vts_accept_dedup_accept"] = c.vts_accept_dedup_accept;
        d["vts_accept_dedup_reject"] = c.vts_accept_dedup_reject;
        d["vts_reject_dedup_accept"] = c.vts_reject_dedup_accept;
        d["vts_reject_dedup_reject"] = c.vts_reject_dedup_reject;
        return d;
      },
      py::arg("run"), py::arg("tau") = 0.10, py::arg("delta") = 0.85);

  m.def(
      "typicality_correlation",
      [](const dce::RunData& run, int permutations, std::uint64_t seed) {
        auto c = dce::metrics::typicality_correlation(run, permutations, seed);
        py::dict d;
        d["rho"] = opt_to_py(c.rho);
        d["p_value"] = opt_to_py(c.p_value);
        d["n"] = c.n;
        return d;
      },
      py::arg("run"), py::arg("permutations") = 10000, py::arg("seed") = 0x7fb2a517);

  m.def(
      "per_strategy_stats",
      [](const dce::RunData& run) {
        auto stats = dce::metrics::per_strategy_stats(run);
        auto rows_to_py = [](const std::vector<dce::metrics::StrategyRow>& rows) {
          std::vector<py::dict> out;
          for (const auto& row : rows) {
            py::dict d;
            d["group"] = row.group;
            d["batches"] = row.batches;
            d["generated"] = row.generated;
            d["accepted"] = row.accepted;
            d["acceptance_pct"] = row.acceptance_pct;
            d["mean_edv"] = opt_to_py(row.mean_edv);
            d["mean_novelty"] = opt_to_py(row.mean_novelty);
            out.push_back(std::move(d));
          }
          return out;
        };
        py::dict d;
        d["per_strategy"] = rows_to_py(stats.per_strategy);
        d["per_phase"] = rows_to_py(stats.per_phase);
        return d;
      },
      py::arg("run"));

  m.def(
      "category_coherence",
      [](const dce::RunData& run) {
        auto c = dce::metrics::category_coherence(run);
        py::dict d;
        d["ideas"] = c.ideas;
        d["unique_labels"] = c.unique_labels;
        d["normalized_entropy"] = c.normalized_entropy;
        d["mean_intra_sim"] = opt_to_py(c.mean_intra_sim);
        d["mean_inter_centroid_sim"] = opt_to_py(c.mean_inter_centroid_sim);
        return d;
      },
      py::arg("run"));

  m.def(
      "seed_rotation_baseline",
      [](const std::vector<std::string>& run_dirs, double delta) {
        std::vector<dce::RunData> runs;
        runs.reserve(run_dirs.size());
        for (const auto& dir : run_dirs) runs.push_back(dce::load_run(dir));
        std::vector<const dce::RunData*> ptrs;
        for (const auto& run : runs) ptrs.push_back(&run);
        auto pooled = dce::metrics::seed_rotation_baseline(ptrs, delta);
        py::dict d;
        d["pooled"] = pooled.pooled;
        d["survivors"] = pooled.survivors;
        d["rejected"] = pooled.rejected;
        d["run"] = py::cast(std::move(pooled.run));
        return d;
      },
      py::arg("run_dirs"), py::arg("delta") = 0.85);

  // primitives
  m.def(
      "cosine",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return dce::cosine_raw(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def("hdbscan_labels", &dce::cluster::hdbscan_labels, py::arg("points"),
        py::arg("min_cluster_size"));
  m.def("cluster_count", &dce::cluster::cluster_count, py::arg("points"),
        py::arg("min_cluster_size"));

  m.def(
      "spearman_rho",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return opt_to_py(dce::metrics::spearman_rho(a, b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "vts_filter",
      [](const std::vector<std::pair<std::string, double>>& ideas, double tau) {
        std::vector<dce::Idea> candidates;
        for (const auto& [name, p] : ideas) {
          dce::Idea idea;
          idea.name = name;
          idea.description = name;
          idea.probability = p;
          candidates.push_back(std::move(idea));
        }
        auto part = dce::vts_filter(candidates, tau);
        std::vector<std::string> accepted;
        std::vector<std::string> rejected;
        for (const auto& idea : part.accepted) accepted.push_back(idea.name);
        for (const auto& [idea, verdict] : part.rejected) {
          (void)verdict;
          rejected.push_back(idea.name);
        }
        return py::make_tuple(accepted, rejected);
      },
      py::arg("ideas"), py::arg("tau"),
      "Partition (name, probability) pairs against tau.");
}
