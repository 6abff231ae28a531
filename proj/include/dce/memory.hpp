#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dce/embedding.hpp"
#include "dce/idea.hpp"

namespace dce {

struct MemoryEntry {
  Idea idea;
  Embedding embedding;
  std::int64_t accept_order = 0;  // global monotone counter, 1-based
  int batch_index = 0;
};

/// Result of a near-duplicate check against the whole store.
/// accepted <=> max_similarity < delta; an empty store records
/// max_similarity 0 with no nearest entry.
struct DedupVerdict {
  bool accepted = false;
  double max_similarity = 0.0;
  std::optional<std::int64_t> nearest_accept_order;
};

/// Persistent semantic memory. Entries live in an append-only record log
/// (entries.log) with an in-memory index rebuilt on load; a meta file pins
/// the embedding dimension and model. One process owns a store directory at
/// a time, enforced via flock on `lock`.
///
/// Record format (little-endian), documented in docs/formats.md:
///   u8  version (=1)
///   u32 payload length in bytes
///   u64 accept_order, u32 batch_index, u32 slot_index, f64 probability,
///   u32+bytes name, u32+bytes description, u32+bytes category,
///   u32 dimension, f64 cached norm, f64 x dimension vector
/// A truncated trailing record (crash mid-append) is discarded on load.
class MemoryStore {
 public:
  /// Creates the store directory if needed, or loads an existing one.
  /// Dimension/model must match an existing store's meta.
  static std::unique_ptr<MemoryStore> open(const std::filesystem::path& dir,
                                           int dimension,
                                           const std::string& model_id,
                                           bool sync_writes = true);

  /// Loads an existing store read-only-style for analysis (still locks).
  static std::unique_ptr<MemoryStore> open_existing(const std::filesystem::path& dir);

  ~MemoryStore();
  MemoryStore(const MemoryStore&) = delete;
  MemoryStore& operator=(const MemoryStore&) = delete;

  /// Linear scan over all stored entries.
  DedupVerdict check_duplicate(const Embedding& candidate, double delta) const;

  /// Durably appends the entry; returns its accept_order. The record hits
  /// disk before the call returns.
  std::int64_t insert(const Idea& idea, const Embedding& embedding);

  /// Up to k most recently accepted ideas, newest first.
  std::vector<Idea> recent(int k) const;

  /// The k entries with the highest local density, where density is the mean
  /// cosine similarity to the entry's m nearest neighbors (m capped at
  /// size-1). Ties break toward lower accept_order. Fewer than 2 entries
  /// yield an empty list.
  std::vector<Idea> dense_regions(int k, int m) const;

  /// Exact counts over raw, untransformed labels.
  std::map<std::string, std::int64_t> category_distribution() const;

  /// The j lowest-count categories, ties broken lexicographically.
  std::vector<std::pair<std::string, std::int64_t>> underrepresented_categories(int j) const;

  std::size_t size() const { return entries_.size(); }
  const MemoryEntry& entry(std::size_t i) const { return entries_[i]; }
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  std::int64_t next_accept_order() const { return next_accept_order_; }

  /// Drops every entry with accept_order > accepted_count (resume support).
  void truncate_to(std::int64_t accepted_count);

  int dimension() const { return dimension_; }
  const std::string& model_id() const { return model_id_; }
  const std::filesystem::path& directory() const { return dir_; }

 private:
  MemoryStore() = default;
  void load();
  void write_meta() const;

  std::filesystem::path dir_;
  int dimension_ = 0;
  std::string model_id_;
  bool sync_writes_ = true;
  int lock_fd_ = -1;
  int log_fd_ = -1;
  std::vector<MemoryEntry> entries_;
  std::int64_t next_accept_order_ = 1;
};

}  // namespace dce
