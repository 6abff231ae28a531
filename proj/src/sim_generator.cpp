#include <algorithm>
#include <set>

#include "dce/embedder.hpp"
#include "dce/errors.hpp"
#include "dce/generator.hpp"

namespace dce {

namespace {

constexpr double kExclusionRadius = 0.9;   // cosine; boundary is inclusive
constexpr double kExclusionFloor = 0.05;   // x mean popularity
constexpr double kTargetBoost = 4.0;

// concept indices named by the prompt's exclusion sections
std::vector<int> decode_excluded_concepts(const PromptSignals& signals) {
  std::set<int> out;
  for (const auto& [name, description] : signals.recent_exclusions) {
    (void)description;
    if (auto kj = parse_sim_idea_text(name)) out.insert(kj->first);
  }
  for (const auto& name : signals.dense_flags) {
    if (auto kj = parse_sim_idea_text(name)) out.insert(kj->first);
  }
  return {out.begin(), out.end()};
}

}  // namespace

SimGenerator::SimGenerator(std::shared_ptr<const SimWorld> world, std::uint64_t rng_seed)
    : world_(std::move(world)), rng_(rng_seed) {}

std::vector<Idea> SimGenerator::sim_generate(const SimWorld& world,
                                             const PromptSignals& signals, int n,
                                             Rng& rng,
                                             std::map<int, int>& paraphrase_counts) {
  const int concepts = world.concept_count();
  std::vector<double> weights(concepts);
  for (int k = 0; k < concepts; ++k) weights[k] = world.popularity(k);

  const auto excluded = decode_excluded_concepts(signals);
  if (!excluded.empty()) {
    const double floor_weight = kExclusionFloor * world.mean_popularity();
    for (int k = 0; k < concepts; ++k) {
      for (int e : excluded) {
        double sim = cosine_raw(world.concept_vector(k), world.concept_vector(e));
        if (sim >= kExclusionRadius) {
          weights[k] = floor_weight;
          break;
        }
      }
    }
  }

  if (!signals.targeted_categories.empty()) {
    std::set<std::string> targets(signals.targeted_categories.begin(),
                                  signals.targeted_categories.end());
    for (int k = 0; k < concepts; ++k) {
      if (targets.count(world.category_label(k))) weights[k] *= kTargetBoost;
    }
  }

  std::vector<double> cumulative(concepts);
  double total = 0.0;
  for (int k = 0; k < concepts; ++k) {
    total += weights[k];
    cumulative[k] = total;
  }

  std::vector<Idea> out;
  out.reserve(std::max(0, n));
  for (int i = 0; i < n; ++i) {
    double r = rng.next_double() * total;
    int k = static_cast<int>(
        std::lower_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    if (k >= concepts) k = concepts - 1;
    int paraphrase = paraphrase_counts[k]++;
    Idea idea;
    idea.name = sim_idea_name(k, paraphrase);
    idea.description = sim_idea_description(world, k, paraphrase);
    idea.category = world.category_label(k);
    idea.probability = world.popularity_percentile(k);
    idea.slot_index = i;
    out.push_back(std::move(idea));
  }
  return out;
}

GenerationResult SimGenerator::generate(const GenerationRequest& request) {
  GenerationResult res;
  res.ideas = sim_generate(*world_, request.signals, request.batch_size, rng_,
                           paraphrase_counts_);
  // deterministic pseudo token accounting, roughly 4 chars per token
  res.usage.prompt_tokens = static_cast<std::int64_t>(request.prompt.size() / 4);
  for (const Idea& idea : res.ideas) {
    res.usage.completion_tokens += static_cast<std::int64_t>(
        (idea.name.size() + idea.description.size() + idea.category.size()) / 4 + 8);
  }
  return res;
}

nlohmann::json SimGenerator::state() const {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [concept_index, count] : paraphrase_counts_) {
    counts[std::to_string(concept_index)] = count;
  }
  return nlohmann::json{{"rng_state", rng_.state()}, {"paraphrase_counts", counts}};
}

void SimGenerator::restore_state(const nlohmann::json& state) {
  rng_.set_state(state.at("rng_state").get<std::uint64_t>());
  paraphrase_counts_.clear();
  for (const auto& [key, value] : state.at("paraphrase_counts").items()) {
    paraphrase_counts_[std::stoi(key)] = value.get<int>();
  }
}

SimEmbedder::SimEmbedder(std::shared_ptr<const SimWorld> world)
    : world_(std::move(world)) {}

int SimEmbedder::dimension() const { return world_->dimension(); }

Embedding SimEmbedder::embed(const std::string& text) {
  if (trim(text).empty()) {
    throw ConfigError("embed: empty text");
  }
  if (auto kj = parse_sim_idea_text(text)) {
    if (kj->first < world_->concept_count()) {
      return Embedding::of(world_->paraphrase_vector(kj->first, kj->second), model_id());
    }
  }
  // non-simulated text: seeded hash vector keeps the function total
  Rng rng(mix_seed(world_->seed(), fnv1a64(text)));
  std::vector<double> v(world_->dimension());
  for (double& x : v) x = rng.gaussian();
  double n = norm(v);
  for (double& x : v) x /= n;
  return Embedding::of(std::move(v), model_id());
}

}  // namespace dce
