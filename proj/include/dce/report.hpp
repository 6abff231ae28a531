#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dce/config.hpp"

namespace dce {
namespace report {

struct AnalyzeOptions {
  std::vector<double> collapse_thresholds;  // empty: the run's configured threshold
  int collapse_window = 0;                  // 0: the run's configured window
  bool confusion_requested = false;         // force the confusion matrix (naive runs only)
  std::vector<int> cluster_milestones = {50, 100, 200};
  int rolling_window = 10;
  int permutations = 10000;
};

struct AnalyzeResult {
  bool complete = true;  // log covers every configured batch
  std::vector<std::string> warnings;
};

/// Emits every metric the run supports as TSV tables plus a report.txt
/// summary into out_dir. Analysis never mutates the run directory. An
/// incomplete log produces a partial report with warnings.
AnalyzeResult analyze_run(const std::filesystem::path& run_dir,
                          const std::filesystem::path& out_dir,
                          const AnalyzeOptions& options, std::ostream& console);

/// Plot-ready series (batch, raw, rolling) and an embedding + batch-label
/// export for external projection tooling.
void export_plot_data(const std::filesystem::path& run_dir,
                      const std::filesystem::path& out_dir, std::ostream& console);

struct SweepSpec {
  std::string parameter;  // tau | delta | phase_split
  std::vector<double> values;
  CampaignConfig base_config;
};

struct SweepRow {
  double value = 0.0;
  bool failed = false;
  std::string error;
  std::int64_t generated = 0;
  std::int64_t accepted = 0;
  double retention_pct = 0.0;
  bool retention_valid = false;
  double collapse_pct = 0.0;
  bool collapse_valid = false;
};

/// One campaign per value (same seed), then a combined comparison table.
/// A failing value is recorded and the sweep continues.
std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                const std::filesystem::path& out_root,
                                std::ostream& console);

/// Pools >= 2 naive run dirs round-robin, greedy-dedups at delta, and emits
/// the surviving stream plus collapse/retention over it.
void baseline_seed_rotation(const std::vector<std::filesystem::path>& run_dirs,
                            double delta, const std::filesystem::path& out_dir,
                            std::ostream& console);

}  // namespace report
}  // namespace dce
