#pragma once

#include <span>
#include <string>
#include <vector>

namespace dce {

/// A vector produced by an embedding backend. Vectors are stored
/// unnormalized with a cached Euclidean norm so cosine stays exact and
/// metrics that need raw vectors (centroids, Euclidean clustering) can use
/// them unchanged.
struct Embedding {
  std::vector<double> vector;
  std::string model_id;
  double norm_cached = 0.0;

  static Embedding of(std::vector<double> v, std::string model_id);
  int dimension() const { return static_cast<int>(vector.size()); }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// Standard cosine similarity using the cached norms.
/// Throws ConfigError on dimension mismatch, UndefinedSimilarity on a
/// zero-norm argument.
double cosine(const Embedding& a, const Embedding& b);

/// Cosine over raw vectors (norms computed on the fly).
double cosine_raw(std::span<const double> a, std::span<const double> b);

}  // namespace dce
