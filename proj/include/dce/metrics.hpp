#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dce/runlog.hpp"

namespace dce {
namespace metrics {

enum class EdvFormulation { multiplicative, additive, geometric };

const char* formulation_name(EdvFormulation f);
EdvFormulation formulation_from_name(const std::string& name);

/// Per-batch values; index i holds batch i+1. Batches with no accepted ideas
/// hold an absent value rather than zero, so ratios never divide by a
/// phantom batch.
struct MetricSeries {
  std::vector<std::optional<double>> raw;

  /// Rolling mean over the available raw values in (b-window+1 .. b).
  std::vector<std::optional<double>> rolling(int window = 10) const;
};

/// One idea as a metric input: its self-assessed probability and embedding.
struct ScoredIdea {
  double probability = 0.0;
  const std::vector<double>* vector = nullptr;
};

/// Per-batch effective diversity volume over the accepted ideas, with the
/// memory bank as of the start of the batch (same-batch siblings excluded).
/// depth = 1 - P; breadth = min over memory of (1 - cosine), 1 when memory
/// is empty. multiplicative = mean(depth x breadth); additive =
/// mean((depth + breadth) / 2); geometric = mean(sqrt(depth x breadth)).
/// Absent when the batch accepted nothing.
std::optional<double> edv_batch(const std::vector<ScoredIdea>& accepted,
                                const std::vector<const std::vector<double>*>& memory_before,
                                EdvFormulation formulation);

MetricSeries edv_series(const RunData& run, EdvFormulation formulation);

struct Retention {
  double percent = 0.0;
  int first_batch = 0;  // batch whose EDV was used as the start value
  int last_batch = 0;
  bool flagged = false;  // an endpoint was absent, nearest present batch used
};

/// Ratio of last-batch to first-batch EDV, as a percentage.
Retention edv_retention(const MetricSeries& series);

/// Mean over a batch of each idea's minimum cosine distance to all prior
/// accepted ideas; 1.0 when there are no priors.
double batch_novelty(const std::vector<const std::vector<double>*>& batch,
                     const std::vector<const std::vector<double>*>& prior);

MetricSeries novelty_series(const RunData& run);

struct CollapseResult {
  double percent = 0.0;
  int late_ideas = 0;
  int collapsed = 0;
  double threshold = 0.0;
  int window = 0;
};

/// Fraction of accepted ideas in the last `window` batches whose maximum
/// cosine similarity to any accepted idea of the first `window` batches is
/// strictly greater than delta_c. Requires at least 2 x window batches.
CollapseResult collapse_rate(const RunData& run, double delta_c = 0.85, int window = 50);

struct ConfusionMatrix2x2 {
  std::int64_t vts_accept_dedup_accept = 0;
  std::int64_t vts_accept_dedup_reject = 0;
  std::int64_t vts_reject_dedup_accept = 0;
  std::int64_t vts_reject_dedup_reject = 0;
  std::int64_t total() const {
    return vts_accept_dedup_accept + vts_accept_dedup_reject +
           vts_reject_dedup_accept + vts_reject_dedup_reject;
  }
};

/// Counterfactual replay over an unfiltered (naive) run: for every parsed
/// idea in stream order, the VTS side rejects at P >= tau and the dedup side
/// rejects at similarity > delta against all prior ideas in the stream
/// (dedup state accumulates over everything, since naive accepted
/// everything). Errors if the run had either filter enabled.
ConfusionMatrix2x2 confusion_matrix(const RunData& run, double tau, double delta);

/// Spearman rank correlation with average ranks for ties; absent when either
/// side is constant.
std::optional<double> spearman_rho(const std::vector<double>& a,
                                   const std::vector<double>& b);

struct Correlation {
  std::optional<double> rho;
  std::optional<double> p_value;  // two-sided, seeded permutation test
  int n = 0;
};

/// Spearman correlation between self-assessed probability and cosine
/// distance to the centroid (arithmetic mean of raw vectors) over all parsed
/// ideas. Requires >= 10 ideas.
Correlation typicality_correlation(const RunData& run, int permutations = 10000,
                                   std::uint64_t seed = 0x7fb2a517);

struct StrategyRow {
  std::string group;  // strategy or phase name
  int batches = 0;
  std::int64_t generated = 0;
  std::int64_t accepted = 0;
  double acceptance_pct = 0.0;
  std::optional<double> mean_edv;      // multiplicative, over batches with a value
  std::optional<double> mean_novelty;
};

struct StrategyStats {
  std::vector<StrategyRow> per_strategy;
  std::vector<StrategyRow> per_phase;
};

/// Groups per-batch statistics by strategy tag and by phase. Errors unless
/// the run had prompt evolution enabled.
StrategyStats per_strategy_stats(const RunData& run);

struct Coherence {
  int ideas = 0;
  int unique_labels = 0;
  double normalized_entropy = 0.0;          // H(labels) / log(unique), 0 if unique <= 1
  std::optional<double> mean_intra_sim;     // pooled pairs within labels of size >= 2
  std::optional<double> mean_inter_centroid_sim;  // pairs of per-label centroids
};

/// Label statistics over the accepted ideas.
Coherence category_coherence(const RunData& run);

struct PooledStream {
  RunData run;  // synthetic run over the surviving ideas
  std::int64_t pooled = 0;
  std::int64_t survivors = 0;
  std::int64_t rejected = 0;
};

/// Seed-rotation baseline: interleaves >= 2 naive runs round-robin by batch
/// (all of run 1 batch b, then run 2 batch b, ...) and applies greedy
/// order-dependent dedup at delta (first kept, later near-duplicates
/// rejected at similarity >= delta). The synthetic run keeps original batch
/// indices so collapse and retention run on it directly.
PooledStream seed_rotation_baseline(const std::vector<const RunData*>& runs, double delta);

/// Replay helpers over a fixed recorded candidate stream.
/// vts_replay_accepted: seq numbers of parsed ideas whose P < tau.
std::vector<std::int64_t> vts_replay_accepted(const RunData& run, double tau);
/// dedup_replay_accept_count: greedy dedup (reject at >= delta) over the
/// parsed stream in order, returning the surviving count.
std::int64_t dedup_replay_accept_count(const RunData& run, double delta);

}  // namespace metrics
}  // namespace dce
