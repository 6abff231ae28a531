#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dce {

struct SimWorldParams {
  int concept_count = 240;
  int dimension = 64;
  double zipf_exponent = 1.05;
  int category_count = 20;
  std::uint64_t seed = 0;
};

/// Deterministic synthetic concept space used by the simulation backends.
///
/// Concepts are unit vectors with Zipf-ranked popularity (index 0 is the most
/// popular). Every 7th concept is spawned near an earlier one so that
/// *distinct* concepts can still be near-duplicates, the way "smart water
/// bottle" and "intelligent hydration vessel" are in real generations.
/// Re-sampling a concept yields paraphrases: seeded perturbations of the
/// concept vector whose similarity to the original shrinks slowly with the
/// paraphrase counter.
class SimWorld {
 public:
  static SimWorld make(const SimWorldParams& params);

  int concept_count() const { return static_cast<int>(vectors_.size()); }
  int dimension() const { return params_.dimension; }
  std::uint64_t seed() const { return params_.seed; }

  const std::vector<double>& concept_vector(int k) const { return vectors_[k]; }
  double popularity(int k) const { return popularity_[k]; }
  double mean_popularity() const { return mean_popularity_; }

  /// Fraction of concepts no more popular than concept k: (N - k) / N.
  /// The most popular concept scores 1.0. This is the self-assessed
  /// probability the simulated generator reports.
  double popularity_percentile(int k) const;

  const std::string& category_label(int k) const { return categories_[k]; }

  /// Embedding vector for paraphrase j of concept k. j == 0 is the concept
  /// vector itself; j > 0 applies a perturbation seeded by (world, k, j).
  /// Similarity to paraphrase 0 stays >= 0.93 for j <= 5.
  std::vector<double> paraphrase_vector(int k, int j) const;

  const SimWorldParams& params() const { return params_; }

 private:
  SimWorldParams params_;
  std::vector<std::vector<double>> vectors_;
  std::vector<double> popularity_;
  std::vector<std::string> categories_;
  double mean_popularity_ = 0.0;
};

/// Text identity of simulated ideas. The simulation embedder decodes
/// (concept, paraphrase) back out of the text, which keeps embed() a pure
/// function of the text.
std::string sim_idea_name(int concept_index, int paraphrase);
std::string sim_idea_description(const SimWorld& world, int concept_index, int paraphrase);

/// Decode (concept, paraphrase) from a simulated idea's name or
/// "name: description" text. Returns nothing for non-simulated text.
std::optional<std::pair<int, int>> parse_sim_idea_text(const std::string& text);

}  // namespace dce
