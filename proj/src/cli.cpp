#include "dce/cli.hpp"

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dce/errors.hpp"
#include "dce/pipeline.hpp"
#include "dce/report.hpp"

namespace dce {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitIncomplete = 4;

std::vector<double> parse_real_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

/// Precedence: flag > config file > built-in default.
CampaignConfig resolve_config(const std::string& config_path, const std::string& arm,
                              const std::vector<std::string>& overrides) {
  CampaignConfig config;
  if (!config_path.empty()) config = load_config_file(config_path);
  if (!arm.empty()) apply_arm(config, arm);
  for (const std::string& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    apply_config_kv(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.validate();
  return config;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::string& resume_dir, const std::string& arm,
            const std::vector<std::string>& overrides, bool quiet) {
  RunHooks hooks;
  if (!quiet) hooks.progress = &std::cout;

  CampaignSummary summary;
  if (!resume_dir.empty()) {
    summary = resume_campaign(resume_dir, hooks);
  } else {
    if (out_dir.empty()) throw ConfigError("run: --out is required (or --resume)");
    CampaignConfig config = resolve_config(config_path, arm, overrides);
    summary = run_campaign(config, out_dir, hooks);
  }
  std::cout << "batches: " << summary.batches_completed << ", generated: "
            << summary.generated << ", accepted: " << summary.accepted
            << ", vts_rejected: " << summary.vts_rejected
            << ", dedup_rejected: " << summary.dedup_rejected
            << ", parse_rejected: " << summary.parse_rejected << "\n";
  std::cout << "tokens: " << summary.prompt_tokens << " prompt, "
            << summary.completion_tokens << " completion\n";
  return summary.completed ? kExitOk : kExitBackend;
}

int cmd_analyze(const std::string& run_dir, const std::string& out_dir,
                const std::string& thresholds_csv, int window, bool confusion) {
  report::AnalyzeOptions options;
  if (!thresholds_csv.empty()) {
    options.collapse_thresholds = parse_real_list(thresholds_csv, "--collapse-thresholds");
  }
  options.collapse_window = window;
  options.confusion_requested = confusion;
  std::filesystem::path out =
      out_dir.empty() ? std::filesystem::path(run_dir) / "analysis"
                      : std::filesystem::path(out_dir);
  report::AnalyzeResult result = report::analyze_run(run_dir, out, options, std::cout);
  return result.complete ? kExitOk : kExitIncomplete;
}

int cmd_sweep(const std::string& parameter, const std::string& values_csv,
              const std::string& config_path, const std::string& arm,
              const std::vector<std::string>& overrides, const std::string& out_root) {
  report::SweepSpec spec;
  spec.parameter = parameter;
  spec.values = parse_real_list(values_csv, "--values");
  spec.base_config = resolve_config(config_path, arm, overrides);
  auto rows = report::run_sweep(spec, out_root, std::cout);
  for (const auto& row : rows) {
    if (row.failed) return kExitBackend;
  }
  return kExitOk;
}

int cmd_baseline(const std::vector<std::string>& run_dirs, double delta,
                 const std::string& out_dir) {
  std::vector<std::filesystem::path> paths(run_dirs.begin(), run_dirs.end());
  report::baseline_seed_rotation(paths, delta, out_dir, std::cout);
  return kExitOk;
}

int cmd_export(const std::string& run_dir, const std::string& out_dir) {
  std::filesystem::path out =
      out_dir.empty() ? std::filesystem::path(run_dir) / "plot-data"
                      : std::filesystem::path(out_dir);
  report::export_plot_data(run_dir, out, std::cout);
  return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"diversity-aware batch generation engine"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a generation campaign");
  std::string run_config, run_out, run_resume, run_arm;
  std::vector<std::string> run_sets;
  bool run_quiet = false;
  run->add_option("--config", run_config, "config file (flat key=value)");
  run->add_option("--out", run_out, "run directory to create");
  run->add_option("--resume", run_resume, "existing run directory to continue");
  run->add_option("--arm", run_arm,
                  "ablation arm: naive|vts|dedup|prompt-evo|vts-dedup|prompt-evo-dedup|dce");
  run->add_option("--set", run_sets, "override a config key (key=value), repeatable");
  run->add_flag("--quiet", run_quiet, "suppress per-batch progress");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "compute metrics over a finished run");
  std::string an_run, an_out, an_thresholds;
  int an_window = 0;
  bool an_confusion = false;
  analyze->add_option("--run", an_run, "run directory")->required();
  analyze->add_option("--out", an_out, "report directory (default <run>/analysis)");
  analyze->add_option("--collapse-thresholds", an_thresholds,
                      "comma-separated similarity thresholds");
  analyze->add_option("--collapse-window", an_window, "window size in batches");
  analyze->add_flag("--confusion", an_confusion,
                    "require the VTS-vs-dedup confusion matrix (naive runs)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run one campaign per parameter value");
  std::string sw_param, sw_values, sw_config, sw_arm, sw_out;
  std::vector<std::string> sw_sets;
  sweep->add_option("--param", sw_param, "tau | delta | phase_split")->required();
  sweep->add_option("--values", sw_values, "comma-separated values")->required();
  sweep->add_option("--config", sw_config, "base config file");
  sweep->add_option("--arm", sw_arm, "ablation arm for the base config");
  sweep->add_option("--set", sw_sets, "override a config key, repeatable");
  sweep->add_option("--out", sw_out, "sweep output root")->required();

  // baseline-seed-rotation
  auto* baseline = app.add_subcommand(
      "baseline-seed-rotation", "pool naive runs round-robin and greedy-dedup them");
  std::vector<std::string> bl_runs;
  double bl_delta = 0.85;
  std::string bl_out;
  baseline->add_option("--runs", bl_runs, "naive run directories (two or more)")
      ->required()
      ->delimiter(',');
  baseline->add_option("--delta", bl_delta, "dedup similarity threshold");
  baseline->add_option("--out", bl_out, "output directory")->required();

  // export-plot-data
  auto* exportcmd = app.add_subcommand("export-plot-data",
                                       "emit plot-ready series and embedding exports");
  std::string ex_run, ex_out;
  exportcmd->add_option("--run", ex_run, "run directory")->required();
  exportcmd->add_option("--out", ex_out, "output directory (default <run>/plot-data)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      return cmd_run(run_config, run_out, run_resume, run_arm, run_sets, run_quiet);
    }
    if (analyze->parsed()) {
      return cmd_analyze(an_run, an_out, an_thresholds, an_window, an_confusion);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sw_param, sw_values, sw_config, sw_arm, sw_sets, sw_out);
    }
    if (baseline->parsed()) return cmd_baseline(bl_runs, bl_delta, bl_out);
    if (exportcmd->parsed()) return cmd_export(ex_run, ex_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TransportError& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return kExitBackend;
  } catch (const BatchFailure& e) {
    std::cerr << "backend failure: " << e.what() << "\n";
    return kExitBackend;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return kExitIncomplete;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

}  // namespace dce
