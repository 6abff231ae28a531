#include <filesystem>
#include <map>
#include <fstream>

#include <doctest.h>

#include "dce/embedding.hpp"
#include "dce/errors.hpp"
#include "dce/memory.hpp"
#include "dce/metrics.hpp"
#include "dce/pipeline.hpp"

using dce::CampaignConfig;
using dce::RunData;
using dce::RunHooks;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "dce_pipetest" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

CampaignConfig tiny_config(const std::string& arm = "dce", int batches = 12) {
  CampaignConfig c;
  c.batch_size = 3;
  c.batch_count = batches;
  c.sim_concept_count = 60;
  c.sim_dimension = 16;
  c.seed = 4242;
  c.sync_writes = false;  // tests hammer the filesystem; fsync adds nothing here
  dce::apply_arm(c, arm);
  return c;
}

std::string file_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("candidate conservation holds per batch and in total") {
  for (const char* arm : {"naive", "vts", "dedup", "dce"}) {
    auto dir = fresh_dir(std::string("conserve_") + arm);
    auto summary = dce::run_campaign(tiny_config(arm), dir);
    CHECK(summary.completed);
    CHECK(summary.generated ==
          summary.accepted + summary.vts_rejected + summary.dedup_rejected +
              summary.parse_rejected);

    RunData run = dce::load_run(dir);
    for (const auto& batch : run.batches) {
      CHECK(batch.generated == batch.accepted + batch.vts_rejected +
                                   batch.dedup_rejected + batch.parse_rejected);
    }
    // per-candidate records agree with the per-batch counters
    std::map<int, int> accepted_per_batch;
    for (const auto& cand : run.candidates) {
      if (cand.outcome == dce::Outcome::accepted) ++accepted_per_batch[cand.batch_index];
    }
    for (const auto& batch : run.batches) {
      CHECK(accepted_per_batch[batch.batch_index] == batch.accepted);
    }
  }
}

TEST_CASE("dedup-enabled runs never store a pair at or above delta") {
  auto dir = fresh_dir("pairwise");
  CampaignConfig config = tiny_config("dedup", 30);
  auto summary = dce::run_campaign(config, dir);
  CHECK(summary.accepted > 0);

  RunData run = dce::load_run(dir);
  std::vector<const std::vector<double>*> accepted;
  for (const auto& cand : run.candidates) {
    if (cand.outcome == dce::Outcome::accepted) {
      accepted.push_back(run.embedding_of(cand.seq));
    }
  }
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    for (std::size_t j = i + 1; j < accepted.size(); ++j) {
      CHECK(dce::cosine_raw(*accepted[i], *accepted[j]) < config.delta);
    }
  }
}

TEST_CASE("accepted records correspond 1:1 with memory entries") {
  auto dir = fresh_dir("memmatch");
  dce::run_campaign(tiny_config("dce", 20), dir);
  RunData run = dce::load_run(dir);

  auto store = dce::MemoryStore::open_existing(dir / dce::kMemorySubdir);
  std::vector<const dce::CandidateRecord*> accepted;
  for (const auto& cand : run.candidates) {
    if (cand.outcome == dce::Outcome::accepted) accepted.push_back(&cand);
  }
  REQUIRE(store->size() == accepted.size());
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    CHECK(store->entry(i).accept_order == accepted[i]->accept_order);
    CHECK(store->entry(i).idea.name == accepted[i]->name);
    CHECK(store->entry(i).batch_index == accepted[i]->batch_index);
  }
}

TEST_CASE("two campaigns with the same config and seed are byte-identical") {
  auto a = fresh_dir("det_a");
  auto b = fresh_dir("det_b");
  CampaignConfig config = tiny_config("dce", 15);
  dce::run_campaign(config, a);
  dce::run_campaign(config, b);
  CHECK(file_text(a / dce::kCandidatesFile) == file_text(b / dce::kCandidatesFile));
  CHECK(file_text(a / dce::kBatchesFile) == file_text(b / dce::kBatchesFile));
  CHECK(file_text(a / dce::kEmbeddingsFile) == file_text(b / dce::kEmbeddingsFile));
  CHECK(file_text(a / dce::kMemorySubdir / "entries.log") ==
        file_text(b / dce::kMemorySubdir / "entries.log"));
}

TEST_CASE("a fresh run into an occupied directory is refused") {
  auto dir = fresh_dir("occupied");
  dce::run_campaign(tiny_config("naive", 2), dir);
  CHECK_THROWS_AS(dce::run_campaign(tiny_config("naive", 2), dir), dce::ConfigError);
}

TEST_CASE("abort after a batch, then resume: log equals the straight run") {
  CampaignConfig config = tiny_config("dce", 12);

  auto straight = fresh_dir("resume_straight");
  dce::run_campaign(config, straight);

  auto resumed = fresh_dir("resume_split");
  RunHooks stop_hooks;
  stop_hooks.after_batch = [](int batch) { return batch < 7; };
  auto partial = dce::run_campaign(config, resumed, stop_hooks);
  CHECK_FALSE(partial.completed);
  CHECK(partial.batches_completed == 7);

  auto finished = dce::resume_campaign(resumed);
  CHECK(finished.completed);
  CHECK(finished.batches_completed == 12);

  CHECK(file_text(straight / dce::kCandidatesFile) ==
        file_text(resumed / dce::kCandidatesFile));
  CHECK(file_text(straight / dce::kBatchesFile) == file_text(resumed / dce::kBatchesFile));
  CHECK(file_text(straight / dce::kEmbeddingsFile) ==
        file_text(resumed / dce::kEmbeddingsFile));
}

TEST_CASE("mid-batch crash leaves partial records; resume truncates them") {
  CampaignConfig config = tiny_config("dce", 10);

  auto straight = fresh_dir("crash_straight");
  dce::run_campaign(config, straight);

  auto crashed = fresh_dir("crash_split");
  RunHooks crash_hooks;
  // die in the middle of batch 6, after a candidate already hit the log
  crash_hooks.before_candidate = [](int batch, int candidate) {
    return !(batch == 6 && candidate == 2);
  };
  auto partial = dce::run_campaign(config, crashed, crash_hooks);
  CHECK_FALSE(partial.completed);
  CHECK(partial.batches_completed == 5);

  // partial batch-6 rows are on disk, past the checkpoint
  RunData before_resume = dce::load_run(crashed);
  CHECK(before_resume.max_batch_index() == 5);  // no batch record for 6
  bool has_partial = false;
  for (const auto& cand : before_resume.candidates) {
    if (cand.batch_index == 6) has_partial = true;
  }
  CHECK(has_partial);

  auto finished = dce::resume_campaign(crashed);
  CHECK(finished.completed);
  CHECK(file_text(straight / dce::kCandidatesFile) ==
        file_text(crashed / dce::kCandidatesFile));
  CHECK(file_text(straight / dce::kBatchesFile) == file_text(crashed / dce::kBatchesFile));
  CHECK(file_text(straight / dce::kEmbeddingsFile) ==
        file_text(crashed / dce::kEmbeddingsFile));
  CHECK(file_text(straight / dce::kMemorySubdir / "entries.log") ==
        file_text(crashed / dce::kMemorySubdir / "entries.log"));
}

TEST_CASE("checkpoint is idempotent across a no-op resume") {
  auto dir = fresh_dir("idem");
  dce::run_campaign(tiny_config("vts-dedup", 5), dir);
  std::string checkpoint_before = file_text(dir / dce::kCheckpointFile);
  auto summary = dce::resume_campaign(dir);  // nothing left to do
  CHECK(summary.completed);
  CHECK(file_text(dir / dce::kCheckpointFile) == checkpoint_before);
}

TEST_CASE("resume with a mismatched config snapshot is refused") {
  auto dir = fresh_dir("mismatch");
  dce::run_campaign(tiny_config("naive", 3), dir);
  // tamper with the snapshot
  {
    CampaignConfig altered = tiny_config("naive", 3);
    altered.tau = 0.2;
    std::ofstream out(dir / dce::kConfigSnapshotFile, std::ios::trunc);
    out << dce::canonical_config_text(altered);
  }
  CHECK_THROWS_AS(dce::resume_campaign(dir), dce::ConfigError);
}

TEST_CASE("corrupt checkpoint refuses to resume") {
  auto dir = fresh_dir("corruptckpt");
  dce::run_campaign(tiny_config("naive", 3), dir);
  {
    std::ofstream out(dir / dce::kCheckpointFile, std::ios::trunc);
    out << "{ not json";
  }
  CHECK_THROWS_AS(dce::resume_campaign(dir), dce::StorageError);
}

TEST_CASE("token accounting accumulates and survives resume") {
  CampaignConfig config = tiny_config("naive", 8);
  auto straight = fresh_dir("tok_straight");
  auto split = fresh_dir("tok_split");
  auto full = dce::run_campaign(config, straight);

  RunHooks hooks;
  hooks.after_batch = [](int batch) { return batch < 4; };
  dce::run_campaign(config, split, hooks);
  auto resumed = dce::resume_campaign(split);

  CHECK(full.prompt_tokens > 0);
  CHECK(full.completion_tokens > 0);
  CHECK(resumed.prompt_tokens == full.prompt_tokens);
  CHECK(resumed.completion_tokens == full.completion_tokens);
}

TEST_CASE("naive arm accepts everything and fills memory identically") {
  auto dir = fresh_dir("naive_all");
  auto summary = dce::run_campaign(tiny_config("naive", 10), dir);
  CHECK(summary.accepted == summary.generated);
  RunData run = dce::load_run(dir);
  for (const auto& cand : run.candidates) {
    CHECK(cand.outcome == dce::Outcome::accepted);
    CHECK_FALSE(cand.vts_checked);
    CHECK_FALSE(cand.dedup_checked);
  }
}
