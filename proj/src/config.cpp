#include "dce/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "dce/errors.hpp"
#include "dce/idea.hpp"
#include "dce/rng.hpp"

namespace dce {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: " + key + " expects a boolean, got '" + v + "'");
}

long long parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

double parse_real(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

std::string format_real(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

const char* backend_kind_name(BackendKind kind) {
  return kind == BackendKind::simulation ? "sim" : "http";
}

BackendKind backend_kind_from_name(const std::string& name) {
  if (name == "sim" || name == "simulation") return BackendKind::simulation;
  if (name == "http") return BackendKind::http;
  throw ConfigError("unknown backend kind: " + name);
}

void CampaignConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("config: tau must be in (0, 1]");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("config: delta must be in (0, 1]");
  if (!(phase_split >= 0.0 && phase_split <= 1.0)) {
    throw ConfigError("config: phase_split must be in [0, 1]");
  }
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (batch_count < 1) throw ConfigError("config: batch_count must be >= 1");
  if (recent_ideas_in_prompt < 0 || dense_regions_in_prompt < 0) {
    throw ConfigError("config: prompt list sizes must be >= 0");
  }
  if (density_neighbors < 1) throw ConfigError("config: density_neighbors must be >= 1");
  if (gap_category_count < 1) throw ConfigError("config: gap_category_count must be >= 1");
  if (sim_concept_count < 1 || sim_dimension < 2) {
    throw ConfigError("config: sim world needs concept_count >= 1, dimension >= 2");
  }
  if (embedding_dimension < 1) throw ConfigError("config: embedding_dimension must be >= 1");
  if (max_attempts < 1) throw ConfigError("config: max_attempts must be >= 1");
  if (min_cluster_size < 2) throw ConfigError("config: min_cluster_size must be >= 2");
  if (collapse_window < 1) throw ConfigError("config: collapse_window must be >= 1");
  if (!(collapse_threshold > 0.0 && collapse_threshold <= 1.0)) {
    throw ConfigError("config: collapse_threshold must be in (0, 1]");
  }
  if (generator_backend == BackendKind::http && generator_url.empty()) {
    throw ConfigError("config: generator_url required for the http generator");
  }
  if (embedder_backend == BackendKind::http && embedder_url.empty()) {
    throw ConfigError("config: embedder_url required for the http embedder");
  }
}

std::uint64_t CampaignConfig::world_seed() const {
  return sim_world_seed ? *sim_world_seed : fnv1a64(domain_label);
}

void apply_config_kv(CampaignConfig& c, const std::string& key, const std::string& value) {
  if (key == "domain_label") c.domain_label = value;
  else if (key == "persona") c.persona = value;
  else if (key == "batch_size") c.batch_size = static_cast<int>(parse_int(value, key));
  else if (key == "batch_count") c.batch_count = static_cast<int>(parse_int(value, key));
  else if (key == "tau") c.tau = parse_real(value, key);
  else if (key == "delta") c.delta = parse_real(value, key);
  else if (key == "phase_split") c.phase_split = parse_real(value, key);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "generator_backend") c.generator_backend = backend_kind_from_name(value);
  else if (key == "embedder_backend") c.embedder_backend = backend_kind_from_name(value);
  else if (key == "enable_vts") c.enable_vts = parse_bool(value, key);
  else if (key == "enable_dedup") c.enable_dedup = parse_bool(value, key);
  else if (key == "enable_prompt_evolution") c.enable_prompt_evolution = parse_bool(value, key);
  else if (key == "schema_mode") c.schema_mode = schema_mode_from_name(value);
  else if (key == "recent_ideas_in_prompt") c.recent_ideas_in_prompt = static_cast<int>(parse_int(value, key));
  else if (key == "dense_regions_in_prompt") c.dense_regions_in_prompt = static_cast<int>(parse_int(value, key));
  else if (key == "density_neighbors") c.density_neighbors = static_cast<int>(parse_int(value, key));
  else if (key == "gap_category_count") c.gap_category_count = static_cast<int>(parse_int(value, key));
  else if (key == "category_lines_in_prompt") c.category_lines_in_prompt = static_cast<int>(parse_int(value, key));
  else if (key == "template_dir") c.template_dir = value;
  else if (key == "industries") c.industries = split_list(value);
  else if (key == "constraints") c.constraints = split_list(value);
  else if (key == "sim_concept_count") c.sim_concept_count = static_cast<int>(parse_int(value, key));
  else if (key == "sim_dimension") c.sim_dimension = static_cast<int>(parse_int(value, key));
  else if (key == "sim_zipf_exponent") c.sim_zipf_exponent = parse_real(value, key);
  else if (key == "sim_category_count") c.sim_category_count = static_cast<int>(parse_int(value, key));
  else if (key == "sim_world_seed") {
    if (value.empty()) c.sim_world_seed.reset();
    else c.sim_world_seed = static_cast<std::uint64_t>(parse_int(value, key));
  }
  else if (key == "generator_url") c.generator_url = value;
  else if (key == "generator_model") c.generator_model = value;
  else if (key == "generator_api_key_env") c.generator_api_key_env = value;
  else if (key == "embedder_url") c.embedder_url = value;
  else if (key == "embedder_model") c.embedder_model = value;
  else if (key == "embedder_api_key_env") c.embedder_api_key_env = value;
  else if (key == "embedding_dimension") c.embedding_dimension = static_cast<int>(parse_int(value, key));
  else if (key == "max_attempts") c.max_attempts = static_cast<int>(parse_int(value, key));
  else if (key == "backoff_base_ms") c.backoff_base_ms = static_cast<int>(parse_int(value, key));
  else if (key == "http_timeout_s") c.http_timeout_s = static_cast<int>(parse_int(value, key));
  else if (key == "sync_writes") c.sync_writes = parse_bool(value, key);
  else if (key == "collapse_window") c.collapse_window = static_cast<int>(parse_int(value, key));
  else if (key == "collapse_threshold") c.collapse_threshold = parse_real(value, key);
  else if (key == "min_cluster_size") c.min_cluster_size = static_cast<int>(parse_int(value, key));
  else throw ConfigError("config: unknown key '" + key + "'");
}

CampaignConfig parse_config_text(const std::string& text) {
  CampaignConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + " is not key=value");
    }
    apply_config_kv(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

CampaignConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

std::string canonical_config_text(const CampaignConfig& c) {
  std::map<std::string, std::string> kv;
  kv["domain_label"] = c.domain_label;
  kv["persona"] = c.persona;
  kv["batch_size"] = std::to_string(c.batch_size);
  kv["batch_count"] = std::to_string(c.batch_count);
  kv["tau"] = format_real(c.tau);
  kv["delta"] = format_real(c.delta);
  kv["phase_split"] = format_real(c.phase_split);
  kv["seed"] = std::to_string(c.seed);
  kv["generator_backend"] = backend_kind_name(c.generator_backend);
  kv["embedder_backend"] = backend_kind_name(c.embedder_backend);
  kv["enable_vts"] = c.enable_vts ? "true" : "false";
  kv["enable_dedup"] = c.enable_dedup ? "true" : "false";
  kv["enable_prompt_evolution"] = c.enable_prompt_evolution ? "true" : "false";
  kv["schema_mode"] = schema_mode_name(c.schema_mode);
  kv["recent_ideas_in_prompt"] = std::to_string(c.recent_ideas_in_prompt);
  kv["dense_regions_in_prompt"] = std::to_string(c.dense_regions_in_prompt);
  kv["density_neighbors"] = std::to_string(c.density_neighbors);
  kv["gap_category_count"] = std::to_string(c.gap_category_count);
  kv["category_lines_in_prompt"] = std::to_string(c.category_lines_in_prompt);
  kv["template_dir"] = c.template_dir;
  kv["industries"] = join(c.industries);
  kv["constraints"] = join(c.constraints);
  kv["sim_concept_count"] = std::to_string(c.sim_concept_count);
  kv["sim_dimension"] = std::to_string(c.sim_dimension);
  kv["sim_zipf_exponent"] = format_real(c.sim_zipf_exponent);
  kv["sim_category_count"] = std::to_string(c.sim_category_count);
  kv["sim_world_seed"] = c.sim_world_seed ? std::to_string(*c.sim_world_seed) : "";
  kv["generator_url"] = c.generator_url;
  kv["generator_model"] = c.generator_model;
  kv["generator_api_key_env"] = c.generator_api_key_env;
  kv["embedder_url"] = c.embedder_url;
  kv["embedder_model"] = c.embedder_model;
  kv["embedder_api_key_env"] = c.embedder_api_key_env;
  kv["embedding_dimension"] = std::to_string(c.embedding_dimension);
  kv["max_attempts"] = std::to_string(c.max_attempts);
  kv["backoff_base_ms"] = std::to_string(c.backoff_base_ms);
  kv["http_timeout_s"] = std::to_string(c.http_timeout_s);
  kv["sync_writes"] = c.sync_writes ? "true" : "false";
  kv["collapse_window"] = std::to_string(c.collapse_window);
  kv["collapse_threshold"] = format_real(c.collapse_threshold);
  kv["min_cluster_size"] = std::to_string(c.min_cluster_size);

  std::string out;
  for (const auto& [key, value] : kv) {
    out += key;
    out += "=";
    out += value;
    out += "\n";
  }
  return out;
}

std::uint64_t config_hash(const CampaignConfig& config) {
  return fnv1a64(canonical_config_text(config));
}

void apply_arm(CampaignConfig& c, const std::string& arm) {
  if (arm == "naive") {
    c.enable_vts = false;
    c.enable_dedup = false;
    c.enable_prompt_evolution = false;
  } else if (arm == "vts") {
    c.enable_vts = true;
    c.enable_dedup = false;
    c.enable_prompt_evolution = false;
  } else if (arm == "dedup") {
    c.enable_vts = false;
    c.enable_dedup = true;
    c.enable_prompt_evolution = false;
  } else if (arm == "prompt-evo") {
    c.enable_vts = false;
    c.enable_dedup = false;
    c.enable_prompt_evolution = true;
  } else if (arm == "vts-dedup") {
    c.enable_vts = true;
    c.enable_dedup = true;
    c.enable_prompt_evolution = false;
  } else if (arm == "prompt-evo-dedup") {
    c.enable_vts = false;
    c.enable_dedup = true;
    c.enable_prompt_evolution = true;
  } else if (arm == "dce") {
    c.enable_vts = true;
    c.enable_dedup = true;
    c.enable_prompt_evolution = true;
  } else {
    throw ConfigError("unknown ablation arm: " + arm +
                      " (expected naive, vts, dedup, prompt-evo, vts-dedup, "
                      "prompt-evo-dedup or dce)");
  }
}

}  // namespace dce
