#pragma once

#include <vector>

namespace dce {
namespace cluster {

/// Density-based hierarchical clustering over Euclidean distances,
/// equivalent to HDBSCAN with its defaults:
///   - min_samples = min_cluster_size
///   - core distance of a point = distance to its min_samples-th nearest
///     neighbor, counting the point itself (so the (min_samples-1)-th other)
///   - mutual reachability d_m(a,b) = max(core(a), core(b), d(a,b))
///   - single-linkage tree over mutual reachability, condensed at
///     min_cluster_size, excess-of-mass cluster selection, no single-cluster
///     shortcut (the root is never a cluster)
/// Points in no selected cluster are noise and get label -1; clusters are
/// labeled 0..k-1 in birth order. Lambda = 1/distance, capped at 1e12 for
/// coincident points.
std::vector<int> hdbscan_labels(const std::vector<std::vector<double>>& points,
                                int min_cluster_size);

/// Number of clusters selected; 0 when points.size() < min_cluster_size.
int cluster_count(const std::vector<std::vector<double>>& points, int min_cluster_size);

}  // namespace cluster
}  // namespace dce
