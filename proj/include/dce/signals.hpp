#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dce {

/// The four diversity strategies, rotated round-robin by batch index.
/// The kind for batch b is strategies[b mod 4]; gap targeting is pinned to
/// index 0 so batches divisible by 4 target category gaps.
enum class StrategyKind {
  gap_targeting = 0,
  assumption_inversion = 1,
  cross_industry = 2,
  constraint_variation = 3,
};

const char* strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);
StrategyKind strategy_for_batch(int batch_index);

struct Strategy {
  StrategyKind kind = StrategyKind::gap_targeting;
  // kind-specific parameters after resolution: targeted category labels,
  // sampled industries, the selected constraint, or the chosen assumptions
  std::vector<std::string> payload;
};

enum class Phase { exploration, exploitation };

const char* phase_name(Phase phase);

/// Number of exploration batches for a campaign: ceil(phase_split * B),
/// computed robustly so that e.g. 0.4 * 200 lands on exactly 80.
int exploration_batch_count(int batch_count, double phase_split);
Phase phase_for_batch(int batch_index, int batch_count, double phase_split);

/// Everything the prompt builder derived from memory and rotation state for
/// one batch. Logged alongside the prompt, and read by the simulation
/// backend as structured side-channel metadata instead of free-text parsing.
struct PromptSignals {
  // newest first, (name, description)
  std::vector<std::pair<std::string, std::string>> recent_exclusions;
  std::vector<std::string> dense_flags;  // idea names in over-dense regions
  std::map<std::string, std::int64_t> category_counts;
  std::vector<std::string> targeted_categories;
  Strategy strategy;
  Phase phase = Phase::exploration;
  bool prompt_evolution = false;  // false for non-evolved (naive-style) prompts
};

}  // namespace dce
