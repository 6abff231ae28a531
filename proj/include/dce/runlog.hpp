#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dce/config.hpp"

namespace dce {

enum class Outcome { accepted, vts_rejected, dedup_rejected, parse_rejected };

const char* outcome_name(Outcome o);
Outcome outcome_from_name(const std::string& name);

/// One row of the per-candidate run log (candidates.jsonl, schema v1).
struct CandidateRecord {
  std::int64_t seq = 0;  // global candidate counter, 1-based
  int batch_index = 0;
  int slot_index = 0;
  std::string name;
  std::string description;
  std::string category;
  std::optional<double> probability;  // absent for parse rejections
  std::string strategy;               // "none" when prompt evolution is off
  std::string phase;                  // "none" when prompt evolution is off
  bool vts_checked = false;
  std::optional<bool> vts_accepted;
  bool dedup_checked = false;
  std::optional<bool> dedup_accepted;
  std::optional<double> dedup_max_similarity;
  std::optional<std::int64_t> dedup_nearest_order;
  Outcome outcome = Outcome::accepted;
  std::string reject_reason;
  std::optional<std::int64_t> accept_order;
  bool has_embedding = false;  // vector lives in embeddings.log, keyed by seq
};

/// One row of the per-batch run log (batches.jsonl, schema v1).
/// Wall-clock timings live in timings.tsv so these records stay
/// byte-deterministic.
struct BatchRecord {
  int batch_index = 0;
  std::string strategy;
  std::string phase;
  std::string prompt_hash;  // fnv1a64 of the prompt text, hex
  int generated = 0;        // parsed ideas + parse rejections
  int parse_rejected = 0;
  int vts_rejected = 0;
  int dedup_rejected = 0;
  int accepted = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool failed = false;        // whole-batch failure after retries
  std::string failure_reason; // includes a truncated raw response
};

/// Append-only writers for a run directory. Lines are flushed per append;
/// a partially written trailing line (crash) is dropped by the loader.
class RunLogWriter {
 public:
  explicit RunLogWriter(const std::filesystem::path& run_dir);
  ~RunLogWriter();

  void append_candidate(const CandidateRecord& record);
  void append_batch(const BatchRecord& record);
  void append_embedding(std::int64_t seq, const std::vector<double>& vector);
  void append_timing(int batch_index, double elapsed_ms);

 private:
  int candidates_fd_ = -1;
  int batches_fd_ = -1;
  int embeddings_fd_ = -1;
  int timings_fd_ = -1;
};

/// Everything a metric needs from a finished (or partial) run.
struct RunData {
  CampaignConfig config;
  std::vector<CandidateRecord> candidates;
  std::vector<BatchRecord> batches;
  /// candidate seq -> raw embedding vector
  std::unordered_map<std::int64_t, std::vector<double>> embeddings;

  const std::vector<double>* embedding_of(std::int64_t seq) const;
  int max_batch_index() const;
};

RunData load_run(const std::filesystem::path& run_dir);

/// Resume support: drop every candidate line with seq > max_seq, every batch
/// line with batch_index > max_batch, every embedding with seq > max_seq.
void truncate_run_logs(const std::filesystem::path& run_dir, std::int64_t max_seq,
                       int max_batch);

// file names inside a run directory
extern const char* kConfigSnapshotFile;   // config.cfg
extern const char* kCandidatesFile;       // candidates.jsonl
extern const char* kBatchesFile;          // batches.jsonl
extern const char* kEmbeddingsFile;       // embeddings.log
extern const char* kTimingsFile;          // timings.tsv
extern const char* kCheckpointFile;       // checkpoint.json
extern const char* kMemorySubdir;         // store/

}  // namespace dce
