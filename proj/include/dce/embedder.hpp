#pragma once

#include <memory>
#include <string>

#include "dce/embedding.hpp"
#include "dce/sim_world.hpp"

namespace dce {

/// Pluggable embedding backend. embed() must be deterministic per
/// backend + text (API backends are treated as deterministic per model
/// snapshot; the simulation embedder is strictly deterministic).
class EmbedderBackend {
 public:
  virtual ~EmbedderBackend() = default;
  virtual Embedding embed(const std::string& text) = 0;
  virtual std::string model_id() const = 0;
  virtual int dimension() const = 0;
  /// Whether one backend handle may be shared across campaigns.
  virtual bool reentrant() const { return false; }
};

/// Deterministic embedder over a SimWorld: simulated idea text maps to the
/// concept's paraphrase vector; any other text gets a seeded hash vector so
/// the function stays total.
class SimEmbedder : public EmbedderBackend {
 public:
  explicit SimEmbedder(std::shared_ptr<const SimWorld> world);
  Embedding embed(const std::string& text) override;
  std::string model_id() const override { return "sim-embedder"; }
  int dimension() const override;
  bool reentrant() const override { return true; }  // pure function of text

 private:
  std::shared_ptr<const SimWorld> world_;
};

}  // namespace dce
