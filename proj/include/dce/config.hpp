#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dce/generator.hpp"

namespace dce {

enum class BackendKind { simulation, http };

const char* backend_kind_name(BackendKind kind);
BackendKind backend_kind_from_name(const std::string& name);

/// All hyperparameters of a campaign. Defaults follow the standard recipe:
/// batches of 5 across 200 batches, tau 0.10, delta 0.85, 40/60 phase split.
struct CampaignConfig {
  std::string domain_label = "sustainable packaging";
  std::string persona = "an inventive materials engineer";
  int batch_size = 5;    // n
  int batch_count = 200; // B
  double tau = 0.10;
  double delta = 0.85;
  double phase_split = 0.40;
  std::uint64_t seed = 42;

  BackendKind generator_backend = BackendKind::simulation;
  BackendKind embedder_backend = BackendKind::simulation;
  bool enable_vts = true;
  bool enable_dedup = true;
  bool enable_prompt_evolution = true;
  SchemaMode schema_mode = SchemaMode::native_structured;

  // prompt evolution
  int recent_ideas_in_prompt = 10;
  int dense_regions_in_prompt = 5;
  int density_neighbors = 10;  // m for the local-density definition
  int gap_category_count = 3;
  int category_lines_in_prompt = 12;
  std::string template_dir;  // optional override of the built-in templates
  std::vector<std::string> industries;   // empty = built-in roster
  std::vector<std::string> constraints;  // empty = built-in roster

  // simulation backend
  int sim_concept_count = 240;
  int sim_dimension = 64;
  double sim_zipf_exponent = 1.05;
  int sim_category_count = 20;
  std::optional<std::uint64_t> sim_world_seed;  // default: hash of domain_label

  // http backends
  std::string generator_url;
  std::string generator_model;
  std::string generator_api_key_env = "GENERATOR_API_KEY";
  std::string embedder_url;
  std::string embedder_model;
  std::string embedder_api_key_env = "EMBEDDING_API_KEY";
  int embedding_dimension = 1536;  // campaign dimension for http embedders
  int max_attempts = 3;
  int backoff_base_ms = 500;
  int http_timeout_s = 120;

  // storage and analysis defaults
  bool sync_writes = true;
  int collapse_window = 50;
  double collapse_threshold = 0.85;
  int min_cluster_size = 5;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  std::uint64_t world_seed() const;
};

/// Flat key=value config file ('#' starts a comment). Unknown keys are
/// rejected. Keys are the field names above (see README for the table).
CampaignConfig load_config_file(const std::filesystem::path& path);
CampaignConfig parse_config_text(const std::string& text);

/// Applies one key=value override (CLI --set and config lines share this).
void apply_config_kv(CampaignConfig& config, const std::string& key,
                     const std::string& value);

/// Canonical sorted key=value dump; the run directory snapshot format.
std::string canonical_config_text(const CampaignConfig& config);
std::uint64_t config_hash(const CampaignConfig& config);

/// Named ablation arms: naive, vts, dedup, prompt-evo, vts-dedup,
/// prompt-evo-dedup, dce. Sets the three enable flags.
void apply_arm(CampaignConfig& config, const std::string& arm);

}  // namespace dce
