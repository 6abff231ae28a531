#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "dce/memory.hpp"
#include "dce/prompt.hpp"

using dce::CampaignConfig;
using dce::MemoryStore;
using dce::Phase;
using dce::PromptBuilder;
using dce::StrategyKind;

namespace {

std::unique_ptr<MemoryStore> fresh_store(const std::string& name, int dim = 8) {
  auto dir = std::filesystem::temp_directory_path() / "dce_prompttest" / name;
  std::filesystem::remove_all(dir);
  return MemoryStore::open(dir, dim, "test");
}

void seed_store(MemoryStore& store, int count, dce::Rng& rng) {
  for (int i = 0; i < count; ++i) {
    dce::Idea idea;
    idea.name = "idea-" + std::to_string(i);
    idea.description = "description " + std::to_string(i);
    idea.category = "cat" + std::to_string(i % 5);
    idea.probability = 0.05;
    idea.batch_index = i / 5 + 1;
    std::vector<double> v(8);
    for (auto& x : v) x = rng.gaussian();
    store.insert(idea, dce::Embedding::of(std::move(v), "test"));
  }
}

}  // namespace

TEST_CASE("rotation: gap targeting fires on batches divisible by 4") {
  CHECK(dce::strategy_for_batch(100) == StrategyKind::gap_targeting);
  CHECK(dce::strategy_for_batch(4) == StrategyKind::gap_targeting);
  CHECK(dce::strategy_for_batch(1) == StrategyKind::assumption_inversion);
  CHECK(dce::strategy_for_batch(2) == StrategyKind::cross_industry);
  CHECK(dce::strategy_for_batch(3) == StrategyKind::constraint_variation);
}

TEST_CASE("rotation visits each strategy exactly 50 times over 200 batches") {
  std::map<StrategyKind, int> counts;
  for (int b = 1; b <= 200; ++b) ++counts[dce::strategy_for_batch(b)];
  REQUIRE(counts.size() == 4);
  for (const auto& [kind, count] : counts) CHECK(count == 50);
}

TEST_CASE("phase boundary: 40/60 split of 200 batches is 80/120") {
  CHECK(dce::exploration_batch_count(200, 0.40) == 80);
  int exploration = 0;
  int exploitation = 0;
  for (int b = 1; b <= 200; ++b) {
    (dce::phase_for_batch(b, 200, 0.40) == Phase::exploration ? exploration
                                                              : exploitation)++;
  }
  CHECK(exploration == 80);
  CHECK(exploitation == 120);
  CHECK(dce::phase_for_batch(80, 200, 0.40) == Phase::exploration);
  CHECK(dce::phase_for_batch(81, 200, 0.40) == Phase::exploitation);

  // batch 10 sits in exploration under the default split
  CHECK(dce::phase_for_batch(10, 200, 0.40) == Phase::exploration);
  // edge splits
  CHECK(dce::exploration_batch_count(200, 0.0) == 0);
  CHECK(dce::exploration_batch_count(200, 1.0) == 200);
  CHECK(dce::exploration_batch_count(10, 0.33) == 4);  // ceil(3.3)
}

TEST_CASE("batch 1 with empty memory assembles the degenerate prompt") {
  CampaignConfig config;
  PromptBuilder builder(config);
  auto store = fresh_store("b1");
  dce::Rng rng(1);
  auto built = builder.build(*store, 1, rng);

  CHECK(built.prompt.find("(none yet)") != std::string::npos);
  CHECK(built.prompt.find("probability below 0.1") != std::string::npos);
  CHECK(built.prompt.find("Generate exactly 5 novel") != std::string::npos);
  CHECK(built.signals.recent_exclusions.empty());
  CHECK(built.signals.dense_flags.empty());
  CHECK(built.signals.category_counts.empty());
  // no leftover slot markers
  CHECK(built.prompt.find('{') == std::string::npos);
}

TEST_CASE("batch 100 is exploitation + gap targeting with categories listed") {
  CampaignConfig config;
  PromptBuilder builder(config);
  auto store = fresh_store("b100");
  dce::Rng seed_rng(5);
  seed_store(*store, 40, seed_rng);

  dce::Rng rng(2);
  auto built = builder.build(*store, 100, rng);
  CHECK(built.signals.phase == Phase::exploitation);
  CHECK(built.signals.strategy.kind == StrategyKind::gap_targeting);
  CHECK(built.signals.targeted_categories.size() == 3);
  CHECK(built.prompt.find("STRATEGY: Gap targeting.") != std::string::npos);
  CHECK(built.prompt.find("PHASE: Exploitation") != std::string::npos);
  CHECK(built.prompt.find("ideas)") != std::string::npos);  // "<label> (N ideas)"
}

TEST_CASE("batch 10 is exploration") {
  CampaignConfig config;
  PromptBuilder builder(config);
  auto store = fresh_store("b10");
  dce::Rng rng(3);
  auto built = builder.build(*store, 10, rng);
  CHECK(built.signals.phase == Phase::exploration);
  CHECK(built.prompt.find("PHASE: Exploration") != std::string::npos);
}

TEST_CASE("gap targeting with empty memory falls back to a breadth directive") {
  CampaignConfig config;
  PromptBuilder builder(config);
  auto store = fresh_store("gapempty");
  dce::Rng rng(4);
  auto built = builder.build(*store, 4, rng);  // 4 mod 4 = 0 -> gap targeting
  CHECK(built.signals.strategy.kind == StrategyKind::gap_targeting);
  CHECK(built.signals.targeted_categories.empty());
  CHECK(built.prompt.find("No category data exists yet") != std::string::npos);
}

TEST_CASE("cross-industry sampling replays with the same rng state") {
  CampaignConfig config;
  PromptBuilder builder(config);
  auto store = fresh_store("xind");

  dce::Rng r1(42);
  dce::Rng r2(42);
  auto a = builder.build(*store, 2, r1);  // 2 mod 4 -> cross_industry
  auto b = builder.build(*store, 2, r2);
  CHECK(a.prompt == b.prompt);
  REQUIRE(a.signals.strategy.payload.size() == 3);
  CHECK(a.signals.strategy.payload == b.signals.strategy.payload);
  CHECK(r1.state() == r2.state());

  // three distinct industries
  CHECK(a.signals.strategy.payload[0] != a.signals.strategy.payload[1]);
  CHECK(a.signals.strategy.payload[1] != a.signals.strategy.payload[2]);
}

TEST_CASE("constraint variation rotates through the roster") {
  CampaignConfig config;
  PromptBuilder builder(config);
  auto store = fresh_store("constraint");
  dce::Rng rng(6);

  // invocations 1..4 are batches 3, 7, 11, 15
  auto first = builder.build(*store, 3, rng);
  auto fourth = builder.build(*store, 15, rng);
  const auto& roster = dce::default_constraint_roster();
  REQUIRE(first.signals.strategy.payload.size() == 1);
  CHECK(first.signals.strategy.payload[0] == roster[0]);
  CHECK(fourth.signals.strategy.payload[0] == roster[3]);
  CHECK(fourth.prompt.find(roster[3]) != std::string::npos);
}

TEST_CASE("recent ideas arrive newest first and capped at the configured count") {
  CampaignConfig config;
  PromptBuilder builder(config);
  auto store = fresh_store("recentcap");
  dce::Rng seed_rng(7);
  seed_store(*store, 15, seed_rng);

  dce::Rng rng(8);
  auto built = builder.build(*store, 5, rng);
  REQUIRE(built.signals.recent_exclusions.size() == 10);
  CHECK(built.signals.recent_exclusions.front().first == "idea-14");
  CHECK(built.signals.recent_exclusions.back().first == "idea-5");
  CHECK(built.signals.dense_flags.size() == 5);
}

TEST_CASE("prompt evolution off produces a bare prompt") {
  CampaignConfig config;
  config.enable_prompt_evolution = false;
  PromptBuilder builder(config);
  auto store = fresh_store("bare");
  dce::Rng seed_rng(9);
  seed_store(*store, 10, seed_rng);

  dce::Rng rng(10);
  auto built = builder.build(*store, 7, rng);
  CHECK_FALSE(built.signals.prompt_evolution);
  CHECK(built.prompt.find("STRATEGY:") == std::string::npos);
  CHECK(built.prompt.find("PHASE:") == std::string::npos);
  CHECK(built.prompt.find("idea-") == std::string::npos);  // no memory leakage
  // rng untouched: the bare prompt consumes no draws
  dce::Rng fresh(10);
  CHECK(rng.state() == fresh.state());
}

TEST_CASE("vts instruction appears only when the filter is enabled") {
  CampaignConfig config;
  config.enable_vts = false;
  PromptBuilder builder(config);
  auto store = fresh_store("novts");
  dce::Rng rng(11);
  auto built = builder.build(*store, 1, rng);
  CHECK(built.prompt.find("probability below") == std::string::npos);
}

TEST_CASE("build_prompt is deterministic given identical inputs") {
  CampaignConfig config;
  PromptBuilder builder(config);
  auto store = fresh_store("det");
  dce::Rng seed_rng(12);
  seed_store(*store, 20, seed_rng);

  for (int b : {1, 2, 3, 4, 99, 100}) {
    dce::Rng r1(1000 + b);
    dce::Rng r2(1000 + b);
    CHECK(builder.build(*store, b, r1).prompt == builder.build(*store, b, r2).prompt);
  }
}

TEST_CASE("shipped template files match the built-in defaults") {
  auto from_dir = dce::PromptTemplates::load(
      std::filesystem::path(DCE_SOURCE_DIR) / "templates" / "default");
  auto defaults = dce::PromptTemplates::defaults();
  CHECK(from_dir.base == defaults.base);
  CHECK(from_dir.vts_instruction == defaults.vts_instruction);
  CHECK(from_dir.phase_exploration == defaults.phase_exploration);
  CHECK(from_dir.phase_exploitation == defaults.phase_exploitation);
  CHECK(from_dir.gap_targeting == defaults.gap_targeting);
  CHECK(from_dir.assumption_inversion == defaults.assumption_inversion);
  CHECK(from_dir.cross_industry == defaults.cross_industry);
  CHECK(from_dir.constraint_variation == defaults.constraint_variation);
}

TEST_CASE("template overrides replace only the provided files") {
  auto dir = std::filesystem::temp_directory_path() / "dce_prompttest" / "override";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "base.txt");
    out << "Custom {batch_size} for {domain}: {vts_instruction} {strategy_instruction} "
           "{phase_instruction} {recent_ideas} {near_duplicates} {category_distribution}";
  }
  CampaignConfig config;
  config.template_dir = dir.string();
  PromptBuilder builder(config);
  auto store = fresh_store("override");
  dce::Rng rng(13);
  auto built = builder.build(*store, 1, rng);
  CHECK(built.prompt.rfind("Custom 5", 0) == 0);
}
