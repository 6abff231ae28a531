#include "dce/sim_world.hpp"

#include <cmath>
#include <cstdio>

#include "dce/embedding.hpp"
#include "dce/errors.hpp"
#include "dce/rng.hpp"

namespace dce {

namespace {

// Paraphrase drift: sigma grows with the paraphrase counter and saturates,
// so early paraphrases sit very close to the concept vector (cos ~0.99) and
// heavily re-sampled concepts drift down to cos ~0.89 against the original.
constexpr double kParaphraseSigmaBase = 0.12;
constexpr double kParaphraseSigmaMax = 0.35;

// Sibling concepts: every 7th concept is a perturbation of the concept 7
// slots earlier, with cosine to its parent in roughly [0.82, 0.93].
constexpr int kSiblingStride = 7;
constexpr int kSiblingPhase = 3;
constexpr double kSiblingSigmaLo = 0.40;
constexpr double kSiblingSigmaHi = 0.70;

std::vector<double> normalized(std::vector<double> v) {
  double n = norm(v);
  if (n <= 0.0) throw StorageError("sim world: degenerate zero vector");
  for (double& x : v) x /= n;
  return v;
}

std::vector<double> gaussian_vector(Rng& rng, int d) {
  std::vector<double> v(d);
  for (double& x : v) x = rng.gaussian();
  return v;
}

}  // namespace

SimWorld SimWorld::make(const SimWorldParams& params) {
  if (params.concept_count < 1 || params.dimension < 2) {
    throw ConfigError("sim world: concept_count >= 1 and dimension >= 2 required");
  }
  SimWorld w;
  w.params_ = params;
  Rng rng(mix_seed(params.seed, 0x5157a3d1));

  w.vectors_.reserve(params.concept_count);
  for (int k = 0; k < params.concept_count; ++k) {
    if (k >= kSiblingStride && k % kSiblingStride == kSiblingPhase) {
      // near-duplicate of an earlier, more popular concept
      const auto& parent = w.vectors_[k - kSiblingStride];
      double sigma = rng.uniform(kSiblingSigmaLo, kSiblingSigmaHi);
      auto dir = normalized(gaussian_vector(rng, params.dimension));
      std::vector<double> v(params.dimension);
      for (int i = 0; i < params.dimension; ++i) v[i] = parent[i] + sigma * dir[i];
      w.vectors_.push_back(normalized(std::move(v)));
    } else {
      w.vectors_.push_back(normalized(gaussian_vector(rng, params.dimension)));
    }
  }

  w.popularity_.resize(params.concept_count);
  double total = 0.0;
  for (int k = 0; k < params.concept_count; ++k) {
    w.popularity_[k] = std::pow(static_cast<double>(k + 1), -params.zipf_exponent);
    total += w.popularity_[k];
  }
  w.mean_popularity_ = total / params.concept_count;

  int cats = std::max(1, params.category_count);
  w.categories_.resize(params.concept_count);
  for (int k = 0; k < params.concept_count; ++k) {
    // block assignment: popular categories collect the popular concepts
    int c = static_cast<int>(static_cast<long long>(k) * cats / params.concept_count);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "cat-%02d", c);
    w.categories_[k] = buf;
  }
  return w;
}

double SimWorld::popularity_percentile(int k) const {
  int n = concept_count();
  return static_cast<double>(n - k) / static_cast<double>(n);
}

std::vector<double> SimWorld::paraphrase_vector(int k, int j) const {
  if (k < 0 || k >= concept_count()) {
    throw ConfigError("sim world: concept index out of range");
  }
  if (j <= 0) return vectors_[k];
  double sigma = std::min(kParaphraseSigmaMax,
                          kParaphraseSigmaBase * std::sqrt(static_cast<double>(j)));
  Rng rng(mix_seed(params_.seed,
                   mix_seed(static_cast<std::uint64_t>(k) * 2654435761ULL,
                            static_cast<std::uint64_t>(j))));
  auto dir = normalized(gaussian_vector(rng, params_.dimension));
  std::vector<double> v(params_.dimension);
  for (int i = 0; i < params_.dimension; ++i) {
    v[i] = vectors_[k][i] + sigma * dir[i];
  }
  return normalized(std::move(v));
}

std::string sim_idea_name(int concept_index, int paraphrase) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "sim-%d-v%d", concept_index, paraphrase);
  return buf;
}

std::string sim_idea_description(const SimWorld& world, int concept_index, int paraphrase) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "Variant %d of synthetic concept %d in %s.",
                paraphrase, concept_index,
                world.category_label(concept_index).c_str());
  return buf;
}

std::optional<std::pair<int, int>> parse_sim_idea_text(const std::string& text) {
  // expected shape: "sim-<k>-v<j>" at the start of the name
  if (text.rfind("sim-", 0) != 0) return std::nullopt;
  int k = 0;
  int j = 0;
  if (std::sscanf(text.c_str(), "sim-%d-v%d", &k, &j) == 2 && k >= 0 && j >= 0) {
    return std::make_pair(k, j);
  }
  return std::nullopt;
}

}  // namespace dce
