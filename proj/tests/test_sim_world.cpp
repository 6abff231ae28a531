#include <doctest.h>

#include "dce/embedder.hpp"
#include "dce/idea.hpp"
#include "dce/embedding.hpp"
#include "dce/sim_world.hpp"

using dce::SimWorld;
using dce::SimWorldParams;

namespace {

SimWorld small_world(std::uint64_t seed = 11) {
  SimWorldParams p;
  p.concept_count = 60;
  p.dimension = 32;
  p.seed = seed;
  return SimWorld::make(p);
}

}  // namespace

TEST_CASE("concept vectors are unit norm") {
  SimWorld w = small_world();
  for (int k = 0; k < w.concept_count(); ++k) {
    CHECK(dce::norm(w.concept_vector(k)) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("popularity is positive and ranked by construction") {
  SimWorld w = small_world();
  for (int k = 0; k < w.concept_count(); ++k) {
    CHECK(w.popularity(k) > 0.0);
    if (k > 0) CHECK(w.popularity(k) < w.popularity(k - 1));
  }
  CHECK(w.popularity_percentile(0) == doctest::Approx(1.0));
  CHECK(w.popularity_percentile(w.concept_count() - 1) ==
        doctest::Approx(1.0 / w.concept_count()));
}

TEST_CASE("paraphrase 0 is the concept vector itself") {
  SimWorld w = small_world();
  for (int k = 0; k < w.concept_count(); k += 7) {
    CHECK(w.paraphrase_vector(k, 0) == w.concept_vector(k));
  }
}

TEST_CASE("paraphrases j<=5 stay within cosine 0.93 of the original") {
  SimWorld w = small_world();
  for (int k = 0; k < w.concept_count(); ++k) {
    for (int j = 1; j <= 5; ++j) {
      double sim = dce::cosine_raw(w.concept_vector(k), w.paraphrase_vector(k, j));
      CHECK(sim >= 0.93);
    }
  }
}

TEST_CASE("world construction is deterministic in the seed") {
  SimWorld a = small_world(3);
  SimWorld b = small_world(3);
  SimWorld c = small_world(4);
  CHECK(a.concept_vector(17) == b.concept_vector(17));
  CHECK(a.concept_vector(17) != c.concept_vector(17));
  CHECK(a.paraphrase_vector(17, 3) == b.paraphrase_vector(17, 3));
}

TEST_CASE("sim idea text round-trips through the parser") {
  auto kj = dce::parse_sim_idea_text(dce::sim_idea_name(42, 7));
  REQUIRE(kj.has_value());
  CHECK(kj->first == 42);
  CHECK(kj->second == 7);

  SimWorld w = small_world();
  dce::Idea idea;
  idea.name = dce::sim_idea_name(3, 1);
  idea.description = dce::sim_idea_description(w, 3, 1);
  auto from_input = dce::parse_sim_idea_text(dce::embedding_input(idea));
  REQUIRE(from_input.has_value());
  CHECK(from_input->first == 3);

  CHECK_FALSE(dce::parse_sim_idea_text("smart water bottle").has_value());
}

TEST_CASE("sim embedder is pure and total") {
  auto world = std::make_shared<const SimWorld>(small_world());
  dce::SimEmbedder embedder(world);

  auto a = embedder.embed("sim-5-v2: anything");
  auto b = embedder.embed("sim-5-v2: anything");
  CHECK(a.vector == b.vector);
  CHECK(a.vector == world->paraphrase_vector(5, 2));

  // non-simulated text still embeds, deterministically
  auto c = embedder.embed("smart water bottle: keeps water smart");
  auto d = embedder.embed("smart water bottle: keeps water smart");
  CHECK(c.vector == d.vector);
  CHECK(c.dimension() == world->dimension());
}
