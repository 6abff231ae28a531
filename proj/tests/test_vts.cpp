#include <doctest.h>
#include <set>

#include "dce/errors.hpp"
#include "dce/rng.hpp"
#include "dce/vts.hpp"

using dce::Idea;
using dce::vts_filter;

namespace {

Idea with_p(const std::string& name, double p) {
  Idea idea;
  idea.name = name;
  idea.description = name;
  idea.probability = p;
  return idea;
}

}  // namespace

TEST_CASE("obvious ideas are rejected, tail ideas retained") {
  std::vector<Idea> candidates = {
      with_p("smart water bottle", 0.45),
      with_p("compressed agricultural waste walls", 0.03),
  };
  auto part = vts_filter(candidates, 0.10);
  REQUIRE(part.accepted.size() == 1);
  CHECK(part.accepted[0].name == "compressed agricultural waste walls");
  REQUIRE(part.rejected.size() == 1);
  CHECK(part.rejected[0].first.name == "smart water bottle");
  CHECK(part.rejected[0].second.probability == doctest::Approx(0.45));
}

TEST_CASE("the boundary P == tau rejects") {
  auto part = vts_filter({with_p("edge", 0.10)}, 0.10);
  CHECK(part.accepted.empty());
  CHECK(part.rejected.size() == 1);
  CHECK_FALSE(part.rejected[0].second.accepted);
}

TEST_CASE("partition conserves candidates and keeps input order") {
  dce::Rng rng(8);
  std::vector<Idea> candidates;
  for (int i = 0; i < 200; ++i) {
    candidates.push_back(with_p("i" + std::to_string(i), rng.next_double()));
  }
  auto part = vts_filter(candidates, 0.3);
  CHECK(part.accepted.size() + part.rejected.size() == candidates.size());

  // order-stability: names appear in the original relative order on each side
  std::size_t cursor = 0;
  for (const auto& idea : part.accepted) {
    std::size_t pos = std::stoul(idea.name.substr(1));
    CHECK(pos >= cursor);
    cursor = pos;
  }
}

TEST_CASE("monotonicity: accepted set grows with tau") {
  dce::Rng rng(9);
  std::vector<Idea> candidates;
  for (int i = 0; i < 300; ++i) {
    candidates.push_back(with_p("i" + std::to_string(i), rng.next_double()));
  }
  double taus[] = {0.05, 0.10, 0.20, 0.5, 1.0};
  std::vector<std::set<std::string>> accepted_sets;
  for (double tau : taus) {
    std::set<std::string> names;
    for (const auto& idea : vts_filter(candidates, tau).accepted) names.insert(idea.name);
    accepted_sets.push_back(std::move(names));
  }
  for (std::size_t i = 0; i + 1 < accepted_sets.size(); ++i) {
    for (const auto& name : accepted_sets[i]) {
      CHECK(accepted_sets[i + 1].count(name) == 1);
    }
  }
}

TEST_CASE("tau outside (0,1] is rejected") {
  CHECK_THROWS_AS(vts_filter({with_p("x", 0.5)}, 0.0), dce::ConfigError);
  CHECK_THROWS_AS(vts_filter({with_p("x", 0.5)}, 1.5), dce::ConfigError);
}
