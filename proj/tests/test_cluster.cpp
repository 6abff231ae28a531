#include <doctest.h>

#include "dce/cluster.hpp"
#include "dce/errors.hpp"
#include "dce/rng.hpp"

using dce::cluster::cluster_count;
using dce::cluster::hdbscan_labels;

namespace {

std::vector<std::vector<double>> blob(dce::Rng& rng, int n, int dim,
                                      const std::vector<double>& center, double spread) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> p(dim);
    for (int d = 0; d < dim; ++d) p[d] = center[d] + spread * rng.gaussian();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("two well-separated blobs form two clusters") {
  dce::Rng rng(1);
  auto points = blob(rng, 10, 3, {0, 0, 0}, 0.05);
  auto far = blob(rng, 10, 3, {5, 5, 5}, 0.05);
  points.insert(points.end(), far.begin(), far.end());
  for (int mcs : {3, 5, 7, 10}) {
    CHECK(cluster_count(points, mcs) == 2);
  }
  // every point is labeled, none as noise, and the labels split 10/10
  auto labels = hdbscan_labels(points, 5);
  int zero = 0;
  int one = 0;
  for (int l : labels) {
    REQUIRE(l >= 0);
    (l == 0 ? zero : one)++;
  }
  CHECK(zero == 10);
  CHECK(one == 10);
}

TEST_CASE("sparse uniform noise yields no clusters") {
  dce::Rng rng(2);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 30; ++i) {
    points.push_back({rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 100)});
  }
  CHECK(cluster_count(points, 10) == 0);
  for (int l : hdbscan_labels(points, 10)) CHECK(l == -1);
}

TEST_CASE("fewer points than min_cluster_size is all noise") {
  dce::Rng rng(3);
  auto points = blob(rng, 4, 2, {0, 0}, 0.01);
  CHECK(cluster_count(points, 5) == 0);
  auto labels = hdbscan_labels(points, 5);
  for (int l : labels) CHECK(l == -1);
}

TEST_CASE("min_cluster_size below 2 is rejected") {
  CHECK_THROWS_AS(cluster_count({{0.0, 0.0}}, 1), dce::ConfigError);
}

TEST_CASE("nested density: one core in a halo is all noise, two cores split") {
  dce::Rng rng(4);
  // a single tight core inside a diffuse halo never truly splits, and with
  // no single-cluster shortcut the root is not selectable: everything noise
  auto single = blob(rng, 20, 2, {0, 0}, 0.01);
  auto halo = blob(rng, 15, 2, {0, 0}, 4.0);
  single.insert(single.end(), halo.begin(), halo.end());
  CHECK(cluster_count(single, 5) == 0);

  // two tight cores inside the same halo force a real split
  auto points = blob(rng, 20, 2, {-3, 0}, 0.01);
  auto second = blob(rng, 20, 2, {3, 0}, 0.01);
  auto noise = blob(rng, 12, 2, {0, 0}, 5.0);
  points.insert(points.end(), second.begin(), second.end());
  points.insert(points.end(), noise.begin(), noise.end());
  CHECK(cluster_count(points, 5) == 2);
  auto labels = hdbscan_labels(points, 5);
  int cores_labeled = 0;
  for (int i = 0; i < 40; ++i) {
    if (labels[i] >= 0) ++cores_labeled;
  }
  CHECK(cores_labeled == 40);
}

TEST_CASE("three blobs of unequal size at mixed min_cluster_size") {
  dce::Rng rng(5);
  auto points = blob(rng, 14, 4, {0, 0, 0, 0}, 0.1);
  auto second = blob(rng, 9, 4, {10, 0, 0, 0}, 0.1);
  auto third = blob(rng, 22, 4, {0, 10, 0, 0}, 0.1);
  points.insert(points.end(), second.begin(), second.end());
  points.insert(points.end(), third.begin(), third.end());
  CHECK(cluster_count(points, 3) == 3);
  CHECK(cluster_count(points, 5) == 3);
  CHECK(cluster_count(points, 7) == 3);
  // at mcs 10 the 9-point blob can no longer stand alone
  CHECK(cluster_count(points, 10) == 2);
}

TEST_CASE("labels are stable under point duplication scale") {
  // clustering runs on raw vectors: scaling all coordinates must not change
  // the structure (Euclidean distances scale uniformly)
  dce::Rng rng(6);
  auto points = blob(rng, 12, 3, {0, 0, 0}, 0.05);
  auto far = blob(rng, 12, 3, {8, 8, 8}, 0.05);
  points.insert(points.end(), far.begin(), far.end());
  auto scaled = points;
  for (auto& p : scaled) {
    for (auto& x : p) x *= 3.7;
  }
  CHECK(hdbscan_labels(points, 5) == hdbscan_labels(scaled, 5));
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(cluster_count({{0.0, 0.0}, {1.0}}, 2), dce::ConfigError);
}
