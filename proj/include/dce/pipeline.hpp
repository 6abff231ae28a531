#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>

#include <json.hpp>

#include "dce/config.hpp"
#include "dce/embedder.hpp"
#include "dce/generator.hpp"
#include "dce/runlog.hpp"

namespace dce {

/// Post-batch snapshot; written atomically after every batch so a killed
/// campaign resumes from the last completed batch.
struct Checkpoint {
  int format_version = 1;
  std::uint64_t config_hash = 0;
  int completed_batches = 0;
  std::int64_t candidate_seq = 0;  // candidates logged so far
  std::int64_t accepted = 0;       // memory entries so far (accept_order high water)
  std::int64_t embedded = 0;       // embedding sidecar records so far
  std::uint64_t rng_state = 0;
  int strategy_position = 0;  // rotation slot of the next batch
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  nlohmann::json generator_state;
  nlohmann::json embedder_state;  // reserved; sim embedder is stateless
};

Checkpoint read_checkpoint(const std::filesystem::path& run_dir);
void write_checkpoint(const std::filesystem::path& run_dir, const Checkpoint& checkpoint);

struct RunHooks {
  /// Called after each completed (checkpointed) batch; return false to stop.
  std::function<bool(int batch_index)> after_batch;
  /// Called before each candidate is processed; return false to abort
  /// immediately without a checkpoint, simulating a crash mid-batch.
  std::function<bool(int batch_index, int candidate_index)> before_candidate;
  std::ostream* progress = nullptr;
};

struct CampaignSummary {
  int batches_completed = 0;
  std::int64_t generated = 0;
  std::int64_t parse_rejected = 0;
  std::int64_t vts_rejected = 0;
  std::int64_t dedup_rejected = 0;
  std::int64_t accepted = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool completed = false;  // reached batch B
};

/// Backend factories; simulation backends share one world per campaign.
std::shared_ptr<const SimWorld> make_sim_world(const CampaignConfig& config);
std::unique_ptr<GeneratorBackend> make_generator(const CampaignConfig& config,
                                                 std::shared_ptr<const SimWorld> world);
std::unique_ptr<EmbedderBackend> make_embedder(const CampaignConfig& config,
                                               std::shared_ptr<const SimWorld> world);

/// Runs a fresh campaign into run_dir (which must not already hold one).
/// Per batch: build prompt -> generate -> embed -> VTS -> sequential dedup
/// against memory including same-batch acceptances -> log -> checkpoint.
/// Unparseable batches are recorded as failed and the loop proceeds;
/// transport failure after retries aborts resumably.
CampaignSummary run_campaign(const CampaignConfig& config,
                             const std::filesystem::path& run_dir,
                             const RunHooks& hooks = {});

/// Continues a campaign from its checkpoint. Partial work from a batch that
/// never reached its checkpoint is truncated first, so the final log is
/// byte-identical to an uninterrupted run.
CampaignSummary resume_campaign(const std::filesystem::path& run_dir,
                                const RunHooks& hooks = {});

}  // namespace dce
