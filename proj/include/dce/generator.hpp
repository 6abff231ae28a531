#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dce/idea.hpp"
#include "dce/rng.hpp"
#include "dce/signals.hpp"
#include "dce/sim_world.hpp"

namespace dce {

/// How the output schema reaches the model: native structured output, or the
/// schema injected into the system prompt for providers without it.
enum class SchemaMode { native_structured, schema_in_system_prompt };

const char* schema_mode_name(SchemaMode mode);
SchemaMode schema_mode_from_name(const std::string& name);

struct GenerationRequest {
  std::string prompt;
  int batch_size = 0;
  SchemaMode schema_mode = SchemaMode::native_structured;
  /// Structured side-channel copy of what the prompt encodes; the simulation
  /// backend reads this instead of parsing prose.
  PromptSignals signals;
};

struct ParseRejection {
  int item_index = -1;  // position in the raw response, -1 if unknown
  std::string reason;
  std::string snippet;
};

struct ParseResult {
  std::vector<Idea> ideas;
  std::vector<ParseRejection> rejections;
};

/// Extracts the first well-formed idea-batch object from a raw model
/// response (tolerating prose and code fences around it). Items failing
/// field validation become rejections; valid items beyond expected_count are
/// rejected as excess. Throws BatchFailure when no conforming object exists.
ParseResult parse_structured(const std::string& raw, int expected_count);

/// The JSON schema for one idea batch, as sent to backends.
nlohmann::json idea_batch_schema();

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct GenerationResult {
  std::vector<Idea> ideas;
  std::vector<ParseRejection> rejections;
  TokenUsage usage;
};

/// Uniform generation backend interface. Backends are driven by one
/// campaign loop at a time; a handle may be shared across campaigns only if
/// reentrant() says so.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual GenerationResult generate(const GenerationRequest& request) = 0;
  virtual std::string id() const = 0;
  virtual bool reentrant() const { return false; }
  /// Opaque state for checkpointing (paraphrase counters etc.).
  virtual nlohmann::json state() const { return nlohmann::json::object(); }
  virtual void restore_state(const nlohmann::json&) {}
};

/// Deterministic simulated backend over a SimWorld.
class SimGenerator : public GeneratorBackend {
 public:
  SimGenerator(std::shared_ptr<const SimWorld> world, std::uint64_t rng_seed);

  GenerationResult generate(const GenerationRequest& request) override;
  std::string id() const override { return "sim-generator"; }
  nlohmann::json state() const override;
  void restore_state(const nlohmann::json& state) override;

  const SimWorld& world() const { return *world_; }
  Rng& rng() { return rng_; }

  /// Pure sampling core: n concepts drawn proportional to popularity,
  /// reweighted by the prompt signals. Concepts within cosine 0.9 of any
  /// excluded concept drop to a flat floor weight (0.05 x mean popularity);
  /// targeted-category concepts get weight x 4. Reported probability is the
  /// concept's popularity percentile. paraphrase_counts tracks re-samples
  /// and is advanced by the call.
  static std::vector<Idea> sim_generate(const SimWorld& world,
                                        const PromptSignals& signals, int n,
                                        Rng& rng,
                                        std::map<int, int>& paraphrase_counts);

 private:
  std::shared_ptr<const SimWorld> world_;
  Rng rng_;
  std::map<int, int> paraphrase_counts_;
};

}  // namespace dce
