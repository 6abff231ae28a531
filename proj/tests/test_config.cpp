#include <doctest.h>
#include <set>
#include <map>
#include <sstream>

#include "dce/config.hpp"
#include "dce/errors.hpp"

using dce::CampaignConfig;

TEST_CASE("defaults follow the standard recipe") {
  CampaignConfig c;
  CHECK(c.batch_size == 5);
  CHECK(c.batch_count == 200);
  CHECK(c.tau == doctest::Approx(0.10));
  CHECK(c.delta == doctest::Approx(0.85));
  CHECK(c.phase_split == doctest::Approx(0.40));
  CHECK(c.recent_ideas_in_prompt == 10);
  CHECK(c.dense_regions_in_prompt == 5);
  c.validate();
}

TEST_CASE("config text round-trips") {
  CampaignConfig c;
  c.domain_label = "exam questions";
  c.tau = 0.05;
  c.seed = 123;
  c.enable_vts = false;
  c.industries = {"mining", "opera"};
  CampaignConfig parsed = dce::parse_config_text(dce::canonical_config_text(c));
  CHECK(dce::canonical_config_text(parsed) == dce::canonical_config_text(c));
  CHECK(dce::config_hash(parsed) == dce::config_hash(c));
}

TEST_CASE("comments and blank lines are tolerated, junk is not") {
  auto c = dce::parse_config_text("# a comment\n\ntau = 0.2  # trailing\nseed=9\n");
  CHECK(c.tau == doctest::Approx(0.2));
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(dce::parse_config_text("tau 0.2\n"), dce::ConfigError);
  CHECK_THROWS_AS(dce::parse_config_text("no_such_key=1\n"), dce::ConfigError);
  CHECK_THROWS_AS(dce::parse_config_text("tau=abc\n"), dce::ConfigError);
}

TEST_CASE("range validation") {
  CampaignConfig c;
  c.tau = 0.0;
  CHECK_THROWS_AS(c.validate(), dce::ConfigError);
  c = CampaignConfig{};
  c.delta = 1.2;
  CHECK_THROWS_AS(c.validate(), dce::ConfigError);
  c = CampaignConfig{};
  c.phase_split = -0.1;
  CHECK_THROWS_AS(c.validate(), dce::ConfigError);
  c = CampaignConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), dce::ConfigError);
  c = CampaignConfig{};
  c.generator_backend = dce::BackendKind::http;  // url missing
  CHECK_THROWS_AS(c.validate(), dce::ConfigError);
}

TEST_CASE("ablation arms set the three flags") {
  struct Case {
    const char* arm;
    bool vts, dedup, evo;
  };
  for (const Case& k : {Case{"naive", false, false, false}, Case{"vts", true, false, false},
                        Case{"dedup", false, true, false},
                        Case{"prompt-evo", false, false, true},
                        Case{"vts-dedup", true, true, false},
                        Case{"prompt-evo-dedup", false, true, true},
                        Case{"dce", true, true, true}}) {
    CampaignConfig c;
    dce::apply_arm(c, k.arm);
    CHECK(c.enable_vts == k.vts);
    CHECK(c.enable_dedup == k.dedup);
    CHECK(c.enable_prompt_evolution == k.evo);
  }
  CampaignConfig c;
  CHECK_THROWS_AS(dce::apply_arm(c, "bogus"), dce::ConfigError);
}

TEST_CASE("every config key is settable and survives the canonical dump") {
  // precedence machinery: apply_config_kv must cover every canonical key
  CampaignConfig base;
  std::string text = dce::canonical_config_text(base);
  std::istringstream in(text);
  std::string line;
  int keys = 0;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    REQUIRE(eq != std::string::npos);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    CampaignConfig c;
    // re-applying the default value must be accepted for every key
    dce::apply_config_kv(c, key, value);
    ++keys;
  }
  CHECK(keys >= 35);
}

TEST_CASE("precedence: a later override beats the file value, for every field") {
  // an alternative (valid, non-default) value for every config key
  const std::map<std::string, std::pair<std::string, std::string>> values = {
      {"domain_label", {"exam questions", "writing prompts"}},
      {"persona", {"a teacher", "a novelist"}},
      {"batch_size", {"4", "7"}},
      {"batch_count", {"100", "150"}},
      {"tau", {"0.05", "0.2"}},
      {"delta", {"0.8", "0.9"}},
      {"phase_split", {"0.3", "0.5"}},
      {"seed", {"1", "2"}},
      {"generator_backend", {"http", "sim"}},
      {"embedder_backend", {"http", "sim"}},
      {"enable_vts", {"false", "true"}},
      {"enable_dedup", {"false", "true"}},
      {"enable_prompt_evolution", {"false", "true"}},
      {"schema_mode", {"schema-in-system-prompt", "native-structured"}},
      {"recent_ideas_in_prompt", {"5", "12"}},
      {"dense_regions_in_prompt", {"3", "7"}},
      {"density_neighbors", {"5", "15"}},
      {"gap_category_count", {"2", "4"}},
      {"category_lines_in_prompt", {"6", "20"}},
      {"template_dir", {"/tmp/a", "/tmp/b"}},
      {"industries", {"mining,opera", "farming,diving"}},
      {"constraints", {"must float", "must fold"}},
      {"sim_concept_count", {"100", "300"}},
      {"sim_dimension", {"32", "128"}},
      {"sim_zipf_exponent", {"0.9", "1.2"}},
      {"sim_category_count", {"10", "30"}},
      {"sim_world_seed", {"5", "6"}},
      {"generator_url", {"http://a/v1", "http://b/v1"}},
      {"generator_model", {"m1", "m2"}},
      {"generator_api_key_env", {"KEY_A", "KEY_B"}},
      {"embedder_url", {"http://a/e", "http://b/e"}},
      {"embedder_model", {"e1", "e2"}},
      {"embedder_api_key_env", {"EKEY_A", "EKEY_B"}},
      {"embedding_dimension", {"384", "1536"}},
      {"max_attempts", {"2", "5"}},
      {"backoff_base_ms", {"10", "100"}},
      {"http_timeout_s", {"30", "60"}},
      {"sync_writes", {"false", "true"}},
      {"collapse_window", {"25", "40"}},
      {"collapse_threshold", {"0.8", "0.9"}},
      {"min_cluster_size", {"3", "7"}},
  };

  // the table covers every canonical key
  CampaignConfig defaults;
  std::istringstream canonical(dce::canonical_config_text(defaults));
  std::string line;
  while (std::getline(canonical, line)) {
    std::string key = line.substr(0, line.find('='));
    CHECK_MESSAGE(values.count(key) == 1, ("missing from table: " + key).c_str());
  }

  auto read_back = [](const CampaignConfig& c, const std::string& key) {
    std::istringstream text(dce::canonical_config_text(c));
    std::string row;
    while (std::getline(text, row)) {
      if (row.rfind(key + "=", 0) == 0) return row.substr(key.size() + 1);
    }
    return std::string();
  };

  // reals round-trip at full precision; compare those numerically
  auto matches = [](const std::string& actual, const std::string& expected) {
    if (actual == expected) return true;
    try {
      std::size_t pa = 0;
      std::size_t pe = 0;
      double a = std::stod(actual, &pa);
      double e = std::stod(expected, &pe);
      return pa == actual.size() && pe == expected.size() && a == e;
    } catch (const std::exception&) {
      return false;
    }
  };

  for (const auto& [key, pair] : values) {
    const auto& [file_value, flag_value] = pair;
    // config file sets file_value, then the flag override wins
    CampaignConfig c = dce::parse_config_text(key + "=" + file_value + "\n");
    CHECK_MESSAGE(matches(read_back(c, key), file_value), key.c_str());
    dce::apply_config_kv(c, key, flag_value);
    CHECK_MESSAGE(matches(read_back(c, key), flag_value), key.c_str());
  }
}

TEST_CASE("world seed defaults to a hash of the domain label") {
  CampaignConfig a;
  CampaignConfig b;
  b.domain_label = "different domain";
  CHECK(a.world_seed() != b.world_seed());
  b.sim_world_seed = 7;
  CHECK(b.world_seed() == 7);

  // same domain, different campaign seed: same world
  CampaignConfig c;
  c.seed = 999;
  CHECK(a.world_seed() == c.world_seed());
}
