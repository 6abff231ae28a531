#include "dce/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dce/errors.hpp"

namespace dce {

// ---------------------------------------------------------------------------
// rotation and phase accounting

const char* strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::gap_targeting: return "gap_targeting";
    case StrategyKind::assumption_inversion: return "assumption_inversion";
    case StrategyKind::cross_industry: return "cross_industry";
    case StrategyKind::constraint_variation: return "constraint_variation";
  }
  return "gap_targeting";
}

StrategyKind strategy_from_name(const std::string& name) {
  if (name == "gap_targeting") return StrategyKind::gap_targeting;
  if (name == "assumption_inversion") return StrategyKind::assumption_inversion;
  if (name == "cross_industry") return StrategyKind::cross_industry;
  if (name == "constraint_variation") return StrategyKind::constraint_variation;
  throw ConfigError("unknown strategy: " + name);
}

StrategyKind strategy_for_batch(int batch_index) {
  return static_cast<StrategyKind>(((batch_index % 4) + 4) % 4);
}

const char* phase_name(Phase phase) {
  return phase == Phase::exploration ? "exploration" : "exploitation";
}

int exploration_batch_count(int batch_count, double phase_split) {
  double x = phase_split * batch_count;
  double r = std::round(x);
  // 0.4 * 200 must land on exactly 80 despite binary rounding of 0.4
  if (std::abs(x - r) < 1e-9) return static_cast<int>(r);
  return static_cast<int>(std::ceil(x));
}

Phase phase_for_batch(int batch_index, int batch_count, double phase_split) {
  return batch_index <= exploration_batch_count(batch_count, phase_split)
             ? Phase::exploration
             : Phase::exploitation;
}

// ---------------------------------------------------------------------------
// templates

namespace {

constexpr const char* kBaseTemplate =
    R"(You are {persona}. Generate exactly {batch_size} novel
{domain} ideas.

Each idea must be genuinely different from the others in
this batch and from the examples shown below.

{vts_instruction}
{strategy_instruction}
{phase_instruction}

## Recently accepted ideas (avoid repetition):
{recent_ideas}

## Near-duplicates to explicitly avoid:
{near_duplicates}

## Current category distribution:
{category_distribution}

Generate {batch_size} ideas now. For each idea, provide a
name, description, category, and your self-assessed
probability score.
)";

constexpr const char* kVtsInstruction =
    R"(IMPORTANT: For each idea, estimate the probability that
this specific idea would appear among all possible
responses to this prompt. Score it from 0.0 to 1.0.
We want ONLY unusual, surprising ideas -- aim for ideas
with probability below {tau}.)";

constexpr const char* kPhaseExploration =
    R"(PHASE: Exploration.
Focus on breadth -- explore widely across unrelated areas.)";

constexpr const char* kPhaseExploitation =
    R"(PHASE: Exploitation (gap-filling).
Focus on filling gaps in underrepresented categories
rather than broad exploration.)";

constexpr const char* kGapTargeting =
    R"(STRATEGY: Gap targeting.
The following categories are underrepresented:
{categories}
At least half of your ideas MUST target these.)";

constexpr const char* kGapTargetingFallback =
    R"(STRATEGY: Gap targeting.
No category data exists yet. Cast the widest possible net:
each idea should open a different area of {domain}.)";

constexpr const char* kAssumptionInversion =
    R"(STRATEGY: Assumption inversion.
Recent ideas assume the following:
{assumptions}
Invert each assumption. Generate ideas where:
{inversions})";

constexpr const char* kCrossIndustry =
    R"(STRATEGY: Cross-industry stimulus.
Imagine {domain} designed by someone from:
{industries}
What would they do differently?)";

constexpr const char* kConstraintVariation =
    R"(STRATEGY: Constraint variation.
CONSTRAINT: The idea {constraint}.)";

// fixed assumption/inversion pattern pairs; cited recent idea names are
// prepended when memory has any
const std::vector<std::pair<std::string, std::string>>& assumption_patterns() {
  static const std::vector<std::pair<std::string, std::string>> patterns = {
      {"the solution is used once and then discarded",
       "the solution is permanent, or reused indefinitely"},
      {"a person operates it by hand",
       "it operates itself, with no user action at all"},
      {"it is manufactured from newly produced materials",
       "it is grown, collected, or repurposed from waste"},
      {"it is optimized to be cheap",
       "cost is ignored and performance is everything"},
      {"it works at everyday household scale",
       "it works at an extreme scale -- miniature or enormous"},
      {"it serves a single owner",
       "it is shared infrastructure for a whole community"},
  };
  return patterns;
}

std::string read_file_if_exists(const std::filesystem::path& path, std::string fallback) {
  std::ifstream in(path);
  if (!in) return fallback;
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

std::string lines_or_none(const std::vector<std::string>& lines) {
  if (lines.empty()) return "  (none yet)";
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += "\n";
    out += lines[i];
  }
  return out;
}

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.base = kBaseTemplate;
  t.vts_instruction = kVtsInstruction;
  t.phase_exploration = kPhaseExploration;
  t.phase_exploitation = kPhaseExploitation;
  t.gap_targeting = kGapTargeting;
  t.assumption_inversion = kAssumptionInversion;
  t.cross_industry = kCrossIndustry;
  t.constraint_variation = kConstraintVariation;
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates t = defaults();
  t.base = read_file_if_exists(dir / "base.txt", t.base);
  t.vts_instruction = read_file_if_exists(dir / "vts_instruction.txt", t.vts_instruction);
  t.phase_exploration = read_file_if_exists(dir / "phase_exploration.txt", t.phase_exploration);
  t.phase_exploitation =
      read_file_if_exists(dir / "phase_exploitation.txt", t.phase_exploitation);
  t.gap_targeting = read_file_if_exists(dir / "strategy_gap_targeting.txt", t.gap_targeting);
  t.assumption_inversion =
      read_file_if_exists(dir / "strategy_assumption_inversion.txt", t.assumption_inversion);
  t.cross_industry = read_file_if_exists(dir / "strategy_cross_industry.txt", t.cross_industry);
  t.constraint_variation =
      read_file_if_exists(dir / "strategy_constraint_variation.txt", t.constraint_variation);
  return t;
}

const std::vector<std::string>& default_industry_roster() {
  static const std::vector<std::string> roster = {
      "hospitality",          "aerospace engineering", "marine engineering",
      "veterinary medicine",  "textile manufacturing", "urban planning",
      "theater production",   "cold-chain logistics",  "mycology research",
      "deep-sea exploration", "competitive cycling",   "emergency medicine",
      "archival conservation","beekeeping",            "glassblowing",
      "mountaineering",       "film set design",       "industrial fermentation",
      "ceramics",             "watchmaking",
  };
  return roster;
}

const std::vector<std::string>& default_constraint_roster() {
  static const std::vector<std::string> roster = {
      "must cost nothing to produce (use only waste materials)",
      "must work without electricity",
      "must be reusable 100 times",
      "must weigh less than 50 grams",
      "must survive a 10-meter drop",
      "must be safely compostable at home",
      "must assemble without tools in under a minute",
      "must function underwater",
      "must be producible within 10 km of where it is used",
      "must become something else useful after its first life",
      "must be fully transparent",
      "must keep working at -40 degrees",
  };
  return roster;
}

std::string fill_slot(std::string text, const std::string& slot, const std::string& value) {
  const std::string needle = "{" + slot + "}";
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

PromptBuilder::PromptBuilder(const CampaignConfig& config) : config_(config) {
  templates_ = config.template_dir.empty() ? PromptTemplates::defaults()
                                           : PromptTemplates::load(config.template_dir);
  industries_ = config.industries.empty() ? default_industry_roster() : config.industries;
  constraints_ = config.constraints.empty() ? default_constraint_roster() : config.constraints;
}

std::string PromptBuilder::strategy_block(Strategy& strategy, const MemoryStore& memory,
                                          int batch_index, Rng& rng) const {
  switch (strategy.kind) {
    case StrategyKind::gap_targeting: {
      auto gaps = memory.underrepresented_categories(config_.gap_category_count);
      if (gaps.empty()) {
        // batch-1 degenerate case: no categories to target yet
        return fill_slot(kGapTargetingFallback, "domain", config_.domain_label);
      }
      std::vector<std::string> lines;
      for (const auto& [label, count] : gaps) {
        strategy.payload.push_back(label);
        lines.push_back("  - " + label + " (" + std::to_string(count) + " ideas)");
      }
      return fill_slot(templates_.gap_targeting, "categories", lines_or_none(lines));
    }
    case StrategyKind::assumption_inversion: {
      const auto& patterns = assumption_patterns();
      const int take = std::min<int>(3, static_cast<int>(patterns.size()));
      // rotate through the pattern roster as the campaign advances
      const int start = (batch_index / 4 * take) % static_cast<int>(patterns.size());
      std::vector<std::string> assumptions;
      std::vector<std::string> inversions;
      for (int i = 0; i < take; ++i) {
        const auto& [assumption, inversion] =
            patterns[(start + i) % patterns.size()];
        strategy.payload.push_back(assumption);
        assumptions.push_back("  - " + assumption);
        inversions.push_back("  - " + inversion);
      }
      auto recent_ideas = memory.recent(3);
      std::string header;
      if (!recent_ideas.empty()) {
        header = "Looking at ideas such as ";
        for (std::size_t i = 0; i < recent_ideas.size(); ++i) {
          if (i) header += ", ";
          header += "'" + recent_ideas[i].name + "'";
        }
        header += ":\n";
      }
      std::string block = fill_slot(templates_.assumption_inversion, "assumptions",
                                    lines_or_none(assumptions));
      block = fill_slot(block, "inversions", lines_or_none(inversions));
      return header + block;
    }
    case StrategyKind::cross_industry: {
      // partial Fisher-Yates over the roster; consumes exactly 3 draws
      std::vector<std::string> pool = industries_;
      std::vector<std::string> lines;
      const int take = std::min<int>(3, static_cast<int>(pool.size()));
      for (int i = 0; i < take; ++i) {
        auto j = static_cast<std::size_t>(
            rng.uniform_int(i, static_cast<std::int64_t>(pool.size()) - 1));
        std::swap(pool[i], pool[j]);
        strategy.payload.push_back(pool[i]);
        lines.push_back("  - " + pool[i]);
      }
      std::string block = fill_slot(templates_.cross_industry, "domain", config_.domain_label);
      return fill_slot(block, "industries", lines_or_none(lines));
    }
    case StrategyKind::constraint_variation: {
      // invocation counter derived from the batch index: constraint batches
      // are those with rotation slot 3, i.e. batches 3, 7, 11, ...
      int invocation = (batch_index >= 3) ? (batch_index - 3) / 4 : 0;
      const auto& constraint = constraints_[invocation % constraints_.size()];
      strategy.payload.push_back(constraint);
      return fill_slot(templates_.constraint_variation, "constraint", constraint);
    }
  }
  throw ConfigError("strategy_block: unreachable strategy kind");
}

PromptBuilder::Built PromptBuilder::build(const MemoryStore& memory, int batch_index,
                                          Rng& rng) const {
  if (batch_index < 1 || batch_index > config_.batch_count) {
    throw ConfigError("build_prompt: batch index out of range");
  }
  Built out;
  PromptSignals& signals = out.signals;

  std::string prompt = templates_.base;
  prompt = fill_slot(prompt, "persona", config_.persona);
  prompt = fill_slot(prompt, "batch_size", std::to_string(config_.batch_size));
  prompt = fill_slot(prompt, "domain", config_.domain_label);

  std::ostringstream tau_text;
  tau_text << config_.tau;
  prompt = fill_slot(prompt, "vts_instruction",
                     config_.enable_vts
                         ? fill_slot(templates_.vts_instruction, "tau", tau_text.str())
                         : "");

  if (!config_.enable_prompt_evolution) {
    // naive-style prompt: no strategy, no phase, no memory sections
    prompt = fill_slot(prompt, "strategy_instruction", "");
    prompt = fill_slot(prompt, "phase_instruction", "");
    prompt = fill_slot(prompt, "recent_ideas", "  (not tracked)");
    prompt = fill_slot(prompt, "near_duplicates", "  (not tracked)");
    prompt = fill_slot(prompt, "category_distribution", "  (not tracked)");
    signals.prompt_evolution = false;
    out.prompt = prompt;
    return out;
  }

  signals.prompt_evolution = true;
  signals.phase = phase_for_batch(batch_index, config_.batch_count, config_.phase_split);
  signals.strategy.kind = strategy_for_batch(batch_index);

  std::string strategy_text =
      strategy_block(signals.strategy, memory, batch_index, rng);
  signals.targeted_categories =
      signals.strategy.kind == StrategyKind::gap_targeting ? signals.strategy.payload
                                                           : std::vector<std::string>{};

  prompt = fill_slot(prompt, "strategy_instruction", strategy_text);
  prompt = fill_slot(prompt, "phase_instruction",
                     signals.phase == Phase::exploration ? templates_.phase_exploration
                                                         : templates_.phase_exploitation);

  // recent ideas, newest first
  std::vector<std::string> recent_lines;
  for (const Idea& idea : memory.recent(config_.recent_ideas_in_prompt)) {
    signals.recent_exclusions.emplace_back(idea.name, idea.description);
    recent_lines.push_back("  - " + idea.name + ": " + idea.description);
  }
  prompt = fill_slot(prompt, "recent_ideas", lines_or_none(recent_lines));

  // densest regions, flagged as over-represented territory
  std::vector<std::string> dense_lines;
  for (const Idea& idea :
       memory.dense_regions(config_.dense_regions_in_prompt, config_.density_neighbors)) {
    signals.dense_flags.push_back(idea.name);
    dense_lines.push_back("  - " + idea.name + " (dense cluster)");
  }
  prompt = fill_slot(prompt, "near_duplicates", lines_or_none(dense_lines));

  // category distribution, top counts first, the long tail summarized
  signals.category_counts = memory.category_distribution();
  std::vector<std::pair<std::string, std::int64_t>> cats(signals.category_counts.begin(),
                                                         signals.category_counts.end());
  std::sort(cats.begin(), cats.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> cat_lines;
  const int max_lines = config_.category_lines_in_prompt;
  for (const auto& [label, count] : cats) {
    if (static_cast<int>(cat_lines.size()) >= max_lines) break;
    cat_lines.push_back("  " + label + ": " + std::to_string(count));
  }
  if (static_cast<int>(cats.size()) > max_lines) {
    cat_lines.push_back("  (+ " + std::to_string(cats.size() - max_lines) +
                        " more categories)");
  }
  prompt = fill_slot(prompt, "category_distribution", lines_or_none(cat_lines));

  out.prompt = prompt;
  return out;
}

}  // namespace dce
