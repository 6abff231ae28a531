#include "dce/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "dce/cluster.hpp"
#include "dce/errors.hpp"
#include "dce/metrics.hpp"
#include "dce/pipeline.hpp"

namespace dce {
namespace report {

namespace {

using metrics::EdvFormulation;
using metrics::MetricSeries;

std::string fmt(double v, int precision = 6) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

std::string opt_fmt(const std::optional<double>& v, int precision = 6) {
  return v ? fmt(*v, precision) : "";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StorageError("cannot write " + path.string());
  return out;
}

void write_series(const std::filesystem::path& path, const MetricSeries& series,
                  int rolling_window) {
  auto rolling = series.rolling(rolling_window);
  std::ofstream out = open_out(path);
  out << "batch\traw\trolling\n";
  for (std::size_t i = 0; i < series.raw.size(); ++i) {
    out << (i + 1) << "\t" << opt_fmt(series.raw[i]) << "\t" << opt_fmt(rolling[i]) << "\n";
  }
}

}  // namespace

AnalyzeResult analyze_run(const std::filesystem::path& run_dir,
                          const std::filesystem::path& out_dir,
                          const AnalyzeOptions& options, std::ostream& console) {
  AnalyzeResult result;
  RunData run = load_run(run_dir);
  std::filesystem::create_directories(out_dir);

  const int max_batch = run.max_batch_index();
  if (max_batch < run.config.batch_count) {
    result.complete = false;
    result.warnings.push_back("log covers " + std::to_string(max_batch) + " of " +
                              std::to_string(run.config.batch_count) +
                              " configured batches; report is partial");
  }
  int failed_batches = 0;
  for (const BatchRecord& b : run.batches) {
    if (b.failed) ++failed_batches;
  }
  if (failed_batches > 0) {
    result.warnings.push_back(std::to_string(failed_batches) +
                              " batch(es) failed during generation");
  }
  const bool naive_style = !run.config.enable_vts && !run.config.enable_dedup;

  std::vector<std::string> lines;

  // EDV, three formulations
  std::map<EdvFormulation, MetricSeries> edv;
  for (EdvFormulation f : {EdvFormulation::multiplicative, EdvFormulation::additive,
                           EdvFormulation::geometric}) {
    edv[f] = metrics::edv_series(run, f);
    write_series(out_dir / (std::string("edv_") + metrics::formulation_name(f) + ".tsv"),
                 edv[f], options.rolling_window);
  }
  {
    std::ofstream out = open_out(out_dir / "retention.tsv");
    out << "formulation\tretention_pct\tfirst_batch\tlast_batch\tflagged\n";
    for (auto& [f, series] : edv) {
      try {
        metrics::Retention r = metrics::edv_retention(series);
        out << metrics::formulation_name(f) << "\t" << fmt(r.percent, 4) << "\t"
            << r.first_batch << "\t" << r.last_batch << "\t" << (r.flagged ? 1 : 0) << "\n";
        lines.push_back(std::string("EDV retention (") + metrics::formulation_name(f) +
                        "): " + fmt(r.percent, 1) + "%" +
                        (r.flagged ? " [endpoint fallback used]" : ""));
      } catch (const AnalysisError& e) {
        result.warnings.push_back(std::string("retention (") +
                                  metrics::formulation_name(f) + "): " + e.what());
      }
    }
  }

  // batch novelty
  MetricSeries novelty = metrics::novelty_series(run);
  write_series(out_dir / "novelty.tsv", novelty, options.rolling_window);

  // collapse at each requested threshold
  {
    std::vector<double> thresholds = options.collapse_thresholds;
    if (thresholds.empty()) thresholds.push_back(run.config.collapse_threshold);
    int window = options.collapse_window > 0 ? options.collapse_window
                                             : run.config.collapse_window;
    std::ofstream out = open_out(out_dir / "collapse.tsv");
    out << "threshold\twindow\tlate_ideas\tcollapsed\tcollapse_pct\n";
    for (double threshold : thresholds) {
      try {
        metrics::CollapseResult c = metrics::collapse_rate(run, threshold, window);
        out << fmt(threshold, 2) << "\t" << c.window << "\t" << c.late_ideas << "\t"
            << c.collapsed << "\t" << fmt(c.percent, 4) << "\n";
        lines.push_back("collapse@" + fmt(threshold, 2) + ": " + fmt(c.percent, 2) + "% (" +
                        std::to_string(c.collapsed) + "/" + std::to_string(c.late_ideas) +
                        ")");
      } catch (const AnalysisError& e) {
        result.warnings.push_back("collapse@" + fmt(threshold, 2) + ": " + e.what());
      }
    }
  }

  // cluster counts at batch milestones
  {
    std::ofstream out = open_out(out_dir / "clusters.tsv");
    out << "milestone_batch\tideas\tclusters\tmin_cluster_size\n";
    std::vector<int> milestones = options.cluster_milestones;
    if (std::find(milestones.begin(), milestones.end(), max_batch) == milestones.end()) {
      milestones.push_back(max_batch);  // the final batch always gets a row
    }
    std::sort(milestones.begin(), milestones.end());
    for (int milestone : milestones) {
      if (milestone > max_batch) continue;
      std::vector<std::vector<double>> points;
      for (const CandidateRecord& r : run.candidates) {
        if (r.outcome == Outcome::accepted && r.batch_index <= milestone) {
          const std::vector<double>* v = run.embedding_of(r.seq);
          if (v) points.push_back(*v);
        }
      }
      int count = cluster::cluster_count(points, run.config.min_cluster_size);
      out << milestone << "\t" << points.size() << "\t" << count << "\t"
          << run.config.min_cluster_size << "\n";
      lines.push_back("clusters@" + std::to_string(milestone) + ": " +
                      std::to_string(count) + " (" + std::to_string(points.size()) +
                      " ideas)");
    }
  }

  // per-strategy and per-phase tables
  if (run.config.enable_prompt_evolution) {
    metrics::StrategyStats stats = metrics::per_strategy_stats(run);
    auto write_rows = [&](const std::filesystem::path& path,
                          const std::vector<metrics::StrategyRow>& rows, const char* head) {
      std::ofstream out = open_out(path);
      out << head << "\tbatches\tgenerated\taccepted\tacceptance_pct\tmean_edv\tmean_novelty\n";
      for (const auto& row : rows) {
        out << row.group << "\t" << row.batches << "\t" << row.generated << "\t"
            << row.accepted << "\t" << fmt(row.acceptance_pct, 2) << "\t"
            << opt_fmt(row.mean_edv, 4) << "\t" << opt_fmt(row.mean_novelty, 4) << "\n";
      }
    };
    write_rows(out_dir / "strategies.tsv", stats.per_strategy, "strategy");
    write_rows(out_dir / "phases.tsv", stats.per_phase, "phase");
    lines.push_back("per-strategy table: strategies.tsv (" +
                    std::to_string(stats.per_strategy.size()) + " strategies)");
  } else {
    result.warnings.push_back("prompt evolution disabled; no per-strategy table");
  }

  // label coherence
  {
    metrics::Coherence c = metrics::category_coherence(run);
    std::ofstream out = open_out(out_dir / "coherence.tsv");
    out << "ideas\tunique_labels\tnormalized_entropy\tmean_intra_sim\tmean_inter_centroid_sim\n";
    out << c.ideas << "\t" << c.unique_labels << "\t" << fmt(c.normalized_entropy, 4) << "\t"
        << opt_fmt(c.mean_intra_sim, 4) << "\t" << opt_fmt(c.mean_inter_centroid_sim, 4)
        << "\n";
    lines.push_back("categories: " + std::to_string(c.unique_labels) + " labels over " +
                    std::to_string(c.ideas) + " ideas, entropy " +
                    fmt(c.normalized_entropy, 3));
  }

  // confusion matrix and typicality: unfiltered runs only
  if (options.confusion_requested && !naive_style) {
    throw AnalysisError("--confusion needs an unfiltered (naive) run");
  }
  if (naive_style) {
    metrics::ConfusionMatrix2x2 m =
        metrics::confusion_matrix(run, run.config.tau, run.config.delta);
    std::ofstream out = open_out(out_dir / "confusion.tsv");
    out << "\tdedup_accept\tdedup_reject\n";
    out << "vts_accept\t" << m.vts_accept_dedup_accept << "\t" << m.vts_accept_dedup_reject
        << "\n";
    out << "vts_reject\t" << m.vts_reject_dedup_accept << "\t" << m.vts_reject_dedup_reject
        << "\n";
    lines.push_back("confusion (tau " + fmt(run.config.tau, 2) + ", delta " +
                    fmt(run.config.delta, 2) + "): " +
                    std::to_string(m.vts_accept_dedup_accept) + "/" +
                    std::to_string(m.vts_accept_dedup_reject) + "/" +
                    std::to_string(m.vts_reject_dedup_accept) + "/" +
                    std::to_string(m.vts_reject_dedup_reject));
    try {
      metrics::Correlation corr =
          metrics::typicality_correlation(run, options.permutations);
      std::ofstream tout = open_out(out_dir / "typicality.tsv");
      tout << "n\trho\tp_value\n";
      tout << corr.n << "\t" << opt_fmt(corr.rho, 6) << "\t" << opt_fmt(corr.p_value, 6)
           << "\n";
      if (corr.rho) {
        lines.push_back("typicality: rho " + fmt(*corr.rho, 4) + ", p " +
                        fmt(*corr.p_value, 4) + " (n=" + std::to_string(corr.n) + ")");
      } else {
        lines.push_back("typicality: rho undefined (constant probabilities)");
      }
    } catch (const AnalysisError& e) {
      result.warnings.push_back(std::string("typicality: ") + e.what());
    }
  }

  // summary
  {
    std::ofstream out = open_out(out_dir / "report.txt");
    out << "run: " << run_dir.string() << "\n";
    out << "batches: " << max_batch << "/" << run.config.batch_count << "\n";
    for (const std::string& line : lines) out << line << "\n";
    for (const std::string& warning : result.warnings) out << "WARNING: " << warning << "\n";
  }
  for (const std::string& line : lines) console << line << "\n";
  for (const std::string& warning : result.warnings) console << "WARNING: " << warning << "\n";
  return result;
}

void export_plot_data(const std::filesystem::path& run_dir,
                      const std::filesystem::path& out_dir, std::ostream& console) {
  RunData run = load_run(run_dir);
  std::filesystem::create_directories(out_dir);

  write_series(out_dir / "edv_multiplicative.tsv",
               metrics::edv_series(run, EdvFormulation::multiplicative), 10);
  write_series(out_dir / "novelty.tsv", metrics::novelty_series(run), 10);

  // embedding + batch-label export for external projection (UMAP etc.)
  std::ofstream out = open_out(out_dir / "embeddings_export.tsv");
  out << "seq\tbatch\toutcome\tcategory";
  int dim = -1;
  for (const CandidateRecord& r : run.candidates) {
    const std::vector<double>* v = run.embedding_of(r.seq);
    if (v) {
      dim = static_cast<int>(v->size());
      break;
    }
  }
  for (int i = 0; i < dim; ++i) out << "\tv" << i;
  out << "\n";
  std::int64_t rows = 0;
  for (const CandidateRecord& r : run.candidates) {
    const std::vector<double>* v = run.embedding_of(r.seq);
    if (!v) continue;
    out << r.seq << "\t" << r.batch_index << "\t" << outcome_name(r.outcome) << "\t"
        << r.category;
    for (double x : *v) out << "\t" << fmt(x, 9);
    out << "\n";
    ++rows;
  }
  console << "exported " << rows << " embeddings to " << out_dir.string() << "\n";
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::filesystem::path& out_root,
                                std::ostream& console) {
  if (spec.values.empty()) throw ConfigError("sweep: no values given");
  if (spec.parameter != "tau" && spec.parameter != "delta" &&
      spec.parameter != "phase_split") {
    throw ConfigError("sweep: parameter must be tau, delta or phase_split");
  }
  for (double v : spec.values) {
    if (spec.parameter == "phase_split" ? !(v >= 0.0 && v <= 1.0)
                                        : !(v > 0.0 && v <= 1.0)) {
      throw ConfigError("sweep: value " + std::to_string(v) + " outside the legal range of " +
                        spec.parameter);
    }
  }
  std::filesystem::create_directories(out_root);

  std::vector<SweepRow> rows;
  for (double value : spec.values) {
    SweepRow row;
    row.value = value;
    CampaignConfig config = spec.base_config;
    if (spec.parameter == "tau") config.tau = value;
    else if (spec.parameter == "delta") config.delta = value;
    else config.phase_split = value;

    std::ostringstream dir_name;
    dir_name << spec.parameter << "_" << std::setprecision(10) << value;
    std::filesystem::path run_dir = out_root / dir_name.str();
    console << "sweep " << spec.parameter << "=" << value << " -> " << run_dir.string()
            << "\n";
    try {
      CampaignSummary summary = run_campaign(config, run_dir);
      row.generated = summary.generated;
      row.accepted = summary.accepted;
      RunData run = load_run(run_dir);
      try {
        metrics::Retention r = metrics::edv_retention(
            metrics::edv_series(run, EdvFormulation::multiplicative));
        row.retention_pct = r.percent;
        row.retention_valid = true;
      } catch (const AnalysisError&) {
      }
      try {
        metrics::CollapseResult c = metrics::collapse_rate(
            run, config.collapse_threshold, config.collapse_window);
        row.collapse_pct = c.percent;
        row.collapse_valid = true;
      } catch (const AnalysisError&) {
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      console << "  value failed: " << e.what() << "\n";
    }
    rows.push_back(std::move(row));
  }

  std::ofstream out = open_out(out_root / "sweep.tsv");
  out << spec.parameter << "\tgenerated\taccepted\tretention_pct\tcollapse_pct\terror\n";
  console << spec.parameter << "\tgenerated\taccepted\tretention%\tcollapse%\n";
  for (const SweepRow& row : rows) {
    out << fmt(row.value, 4) << "\t" << row.generated << "\t" << row.accepted << "\t"
        << (row.retention_valid ? fmt(row.retention_pct, 4) : "") << "\t"
        << (row.collapse_valid ? fmt(row.collapse_pct, 4) : "") << "\t" << row.error << "\n";
    console << fmt(row.value, 2) << "\t" << row.generated << "\t" << row.accepted << "\t"
            << (row.retention_valid ? fmt(row.retention_pct, 1) : "-") << "\t"
            << (row.collapse_valid ? fmt(row.collapse_pct, 2) : "-") << "\n";
  }
  return rows;
}

void baseline_seed_rotation(const std::vector<std::filesystem::path>& run_dirs,
                            double delta, const std::filesystem::path& out_dir,
                            std::ostream& console) {
  if (run_dirs.size() < 2) {
    throw AnalysisError("baseline-seed-rotation needs at least 2 run dirs");
  }
  std::vector<RunData> runs;
  runs.reserve(run_dirs.size());
  for (const auto& dir : run_dirs) runs.push_back(load_run(dir));
  std::vector<const RunData*> run_ptrs;
  for (const RunData& run : runs) run_ptrs.push_back(&run);

  metrics::PooledStream pooled = metrics::seed_rotation_baseline(run_ptrs, delta);
  std::filesystem::create_directories(out_dir);

  std::ofstream out = open_out(out_dir / "baseline.tsv");
  out << "pooled\tsurvivors\trejected\tdelta\tcollapse_pct\tretention_pct\n";
  std::string collapse_text;
  std::string retention_text;
  try {
    metrics::CollapseResult c =
        metrics::collapse_rate(pooled.run, pooled.run.config.collapse_threshold,
                               pooled.run.config.collapse_window);
    collapse_text = fmt(c.percent, 4);
    console << "collapse@" << fmt(pooled.run.config.collapse_threshold, 2) << ": "
            << fmt(c.percent, 2) << "% (" << c.collapsed << "/" << c.late_ideas << ")\n";
  } catch (const AnalysisError& e) {
    console << "collapse: " << e.what() << "\n";
  }
  try {
    metrics::Retention r = metrics::edv_retention(
        metrics::edv_series(pooled.run, EdvFormulation::multiplicative));
    retention_text = fmt(r.percent, 4);
    console << "EDV retention: " << fmt(r.percent, 1) << "%\n";
  } catch (const AnalysisError& e) {
    console << "retention: " << e.what() << "\n";
  }
  out << pooled.pooled << "\t" << pooled.survivors << "\t" << pooled.rejected << "\t"
      << fmt(delta, 2) << "\t" << collapse_text << "\t" << retention_text << "\n";

  std::ofstream stream_out = open_out(out_dir / "pooled_stream.tsv");
  stream_out << "seq\tbatch\tcategory\tprobability\n";
  for (const CandidateRecord& r : pooled.run.candidates) {
    stream_out << r.seq << "\t" << r.batch_index << "\t" << r.category << "\t"
               << fmt(r.probability.value_or(0.0), 6) << "\n";
  }
  console << "pooled " << pooled.pooled << " ideas -> " << pooled.survivors
          << " survivors (" << pooled.rejected << " rejected)\n";
}

}  // namespace report
}  // namespace dce
