#include "dce/embedding.hpp"

#include <cmath>

#include "dce/errors.hpp"

namespace dce {

Embedding Embedding::of(std::vector<double> v, std::string model_id) {
  Embedding e;
  e.vector = std::move(v);
  e.model_id = std::move(model_id);
  e.norm_cached = norm(e.vector);
  return e;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double cosine(const Embedding& a, const Embedding& b) {
  if (a.vector.size() != b.vector.size()) {
    throw ConfigError("cosine: dimension mismatch (" +
                      std::to_string(a.vector.size()) + " vs " +
                      std::to_string(b.vector.size()) + ")");
  }
  if (a.norm_cached <= 0.0 || b.norm_cached <= 0.0) {
    throw UndefinedSimilarity("cosine: zero-norm vector");
  }
  return dot(a.vector, b.vector) / (a.norm_cached * b.norm_cached);
}

double cosine_raw(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("cosine: dimension mismatch");
  }
  double na = norm(a);
  double nb = norm(b);
  if (na <= 0.0 || nb <= 0.0) {
    throw UndefinedSimilarity("cosine: zero-norm vector");
  }
  return dot(a, b) / (na * nb);
}

}  // namespace dce
