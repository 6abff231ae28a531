#pragma once

// Brute-force reference implementations, written straight from the metric
// definitions with no code shared with src/. They exist only to check the
// production metrics against an independent path.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reference {

struct RefIdea {
  int batch = 1;
  double probability = 0.0;
  std::vector<double> vec;
  bool accepted = true;
  std::string category = "c";
};

double ref_cosine(const std::vector<double>& a, const std::vector<double>& b);

// formulation: 0 multiplicative, 1 additive, 2 geometric
std::optional<double> ref_edv(const std::vector<std::pair<double, std::vector<double>>>& accepted,
                              const std::vector<std::vector<double>>& memory,
                              int formulation);

double ref_novelty(const std::vector<std::vector<double>>& batch,
                   const std::vector<std::vector<double>>& prior);

// percent of accepted ideas in the last `window` batches with similarity
// strictly above delta to any accepted idea of the first `window` batches
double ref_collapse(const std::vector<RefIdea>& ideas, int max_batch, int window,
                    double delta);

// cells: [vts_acc&dedup_acc, vts_acc&dedup_rej, vts_rej&dedup_acc, vts_rej&dedup_rej]
std::array<std::int64_t, 4> ref_confusion(const std::vector<RefIdea>& ideas, double tau,
                                          double delta);

std::optional<double> ref_spearman(std::vector<double> a, std::vector<double> b);

struct RefCoherence {
  int unique_labels = 0;
  double normalized_entropy = 0.0;
  std::optional<double> intra;
  std::optional<double> inter;
};
RefCoherence ref_coherence(const std::vector<RefIdea>& ideas);

}  // namespace reference
