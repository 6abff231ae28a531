#pragma once

#include <filesystem>
#include <string>

#include "dce/config.hpp"
#include "dce/memory.hpp"
#include "dce/rng.hpp"
#include "dce/signals.hpp"

namespace dce {

/// The slot-filled text templates the prompt builder assembles from.
/// Defaults are compiled in; a template directory can override any of them
/// per domain (one file per template, same slot names).
struct PromptTemplates {
  std::string base;               // base.txt
  std::string vts_instruction;    // vts_instruction.txt
  std::string phase_exploration;  // phase_exploration.txt
  std::string phase_exploitation; // phase_exploitation.txt
  std::string gap_targeting;      // strategy_gap_targeting.txt
  std::string assumption_inversion;  // strategy_assumption_inversion.txt
  std::string cross_industry;        // strategy_cross_industry.txt
  std::string constraint_variation;  // strategy_constraint_variation.txt

  static PromptTemplates defaults();
  /// Loads overrides from a directory; files that are absent keep defaults.
  static PromptTemplates load(const std::filesystem::path& dir);
};

const std::vector<std::string>& default_industry_roster();
const std::vector<std::string>& default_constraint_roster();

/// Replace every occurrence of "{slot}" in text.
std::string fill_slot(std::string text, const std::string& slot,
                      const std::string& value);

/// Rebuilds the generation prompt each batch from memory state, the rotating
/// strategy and the campaign phase. Deterministic given (config, memory
/// snapshot, batch index, rng state), which is what makes full campaign
/// replay possible.
class PromptBuilder {
 public:
  explicit PromptBuilder(const CampaignConfig& config);

  struct Built {
    std::string prompt;
    PromptSignals signals;
  };

  /// Assembles the prompt for one batch. With prompt evolution disabled the
  /// memory sections and strategy/phase blocks are left out entirely (the
  /// naive arm sends a bare request, plus the VTS instruction when that
  /// filter is active).
  Built build(const MemoryStore& memory, int batch_index, Rng& rng) const;

  /// Renders the strategy block for an already-resolved rotation slot. The
  /// strategy payload (targeted categories, sampled industries, the chosen
  /// constraint) comes back in `strategy`.
  std::string strategy_block(Strategy& strategy, const MemoryStore& memory,
                             int batch_index, Rng& rng) const;

  const PromptTemplates& templates() const { return templates_; }

 private:
  const CampaignConfig& config_;
  PromptTemplates templates_;
  std::vector<std::string> industries_;
  std::vector<std::string> constraints_;
};

}  // namespace dce
