#include "dce/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dce/errors.hpp"

namespace dce {
namespace cluster {

namespace {

constexpr double kLambdaMax = 1e12;  // stands in for 1/0 on coincident points

double lambda_of(double distance) {
  return distance > 1.0 / kLambdaMax ? 1.0 / distance : kLambdaMax;
}

struct MstEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Single-linkage dendrogram node over mutual reachability. Leaves are
/// points 0..n-1; merges get ids n..2n-2 in edge order.
struct DendrogramNode {
  int left = -1;
  int right = -1;
  double distance = 0.0;
  int size = 1;
};

struct CondensedCluster {
  double birth_lambda = 0.0;
  double stability = 0.0;
  int parent = -1;
  std::vector<int> children;  // child condensed clusters
  // points that fall out of this cluster directly, with their lambda
  std::vector<std::pair<int, double>> points;
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

}  // namespace

std::vector<int> hdbscan_labels(const std::vector<std::vector<double>>& points,
                                int min_cluster_size) {
  if (min_cluster_size < 2) {
    throw ConfigError("hdbscan: min_cluster_size must be >= 2");
  }
  const int n = static_cast<int>(points.size());
  std::vector<int> labels(n, -1);
  if (n < min_cluster_size) return labels;

  for (const auto& p : points) {
    if (p.size() != points[0].size()) {
      throw ConfigError("hdbscan: points must share one dimension");
    }
  }

  // pairwise distances and core distances (min_samples = min_cluster_size,
  // the point itself counts as its own first neighbor)
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      dist[i][j] = dist[j][i] = euclidean(points[i], points[j]);
    }
  }
  const int k_other = min_cluster_size - 1;  // 0 handled by min_cluster_size >= 2
  std::vector<double> core(n, 0.0);
  std::vector<double> row;
  for (int i = 0; i < n; ++i) {
    row = dist[i];
    row[i] = std::numeric_limits<double>::infinity();  // drop self
    std::nth_element(row.begin(), row.begin() + (k_other - 1), row.end());
    core[i] = row[k_other - 1];
  }

  auto mutual_reach = [&](int a, int b) {
    return std::max({core[a], core[b], dist[a][b]});
  };

  // Prim's MST over mutual reachability
  std::vector<MstEdge> edges;
  edges.reserve(n - 1);
  {
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<int> from(n, 0);
    in_tree[0] = true;
    for (int j = 1; j < n; ++j) {
      best[j] = mutual_reach(0, j);
      from[j] = 0;
    }
    for (int step = 1; step < n; ++step) {
      int next = -1;
      double next_weight = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (!in_tree[j] && best[j] < next_weight) {
          next_weight = best[j];
          next = j;
        }
      }
      edges.push_back({from[next], next, next_weight});
      in_tree[next] = true;
      for (int j = 0; j < n; ++j) {
        if (!in_tree[j]) {
          double w = mutual_reach(next, j);
          if (w < best[j]) {
            best[j] = w;
            from[j] = next;
          }
        }
      }
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  // single-linkage dendrogram via union-find over sorted edges
  std::vector<DendrogramNode> nodes(2 * n - 1);
  {
    UnionFind uf(2 * n - 1);
    std::vector<int> component_node(2 * n - 1);
    std::iota(component_node.begin(), component_node.end(), 0);
    int next_id = n;
    for (const MstEdge& e : edges) {
      int ra = component_node[uf.find(e.a)];
      int rb = component_node[uf.find(e.b)];
      DendrogramNode& m = nodes[next_id];
      m.left = ra;
      m.right = rb;
      m.distance = e.weight;
      m.size = nodes[ra].size + nodes[rb].size;
      int root_a = uf.find(e.a);
      int root_b = uf.find(e.b);
      uf.parent[root_a] = root_b;
      component_node[uf.find(e.b)] = next_id;
      ++next_id;
    }
  }
  const int root = 2 * n - 2;

  // condense: walk top-down; a split is real when both sides hold at least
  // min_cluster_size points, otherwise the small side falls out as points
  std::vector<CondensedCluster> clusters;
  clusters.push_back({});  // root cluster, birth lambda 0
  std::vector<int> point_cluster(n, 0);
  std::vector<double> point_lambda(n, kLambdaMax);

  struct WalkItem {
    int node;
    int cluster;
  };
  std::vector<WalkItem> stack{{root, 0}};

  auto spill_points = [&](int node, int cluster_id, double lambda) {
    // every point under `node` falls out of cluster_id at lambda
    std::vector<int> local{node};
    while (!local.empty()) {
      int x = local.back();
      local.pop_back();
      if (x < n) {
        clusters[cluster_id].points.emplace_back(x, lambda);
        point_cluster[x] = cluster_id;
        point_lambda[x] = lambda;
      } else {
        local.push_back(nodes[x].left);
        local.push_back(nodes[x].right);
      }
    }
  };

  while (!stack.empty()) {
    auto [node, cid] = stack.back();
    stack.pop_back();
    if (node < n) {
      // a bare point at the top of a walk only happens for n == 1, which is
      // excluded by n >= min_cluster_size >= 2
      spill_points(node, cid, kLambdaMax);
      continue;
    }
    const DendrogramNode& m = nodes[node];
    double lambda = lambda_of(m.distance);

    // ties are common in mutual-reachability graphs (many pairs share one
    // core distance), so all binary merges at the same distance are handled
    // as one multi-way event; the hierarchy is then independent of MST tie
    // order
    std::vector<int> level_children;
    std::vector<int> frontier{node};
    while (!frontier.empty()) {
      int x = frontier.back();
      frontier.pop_back();
      for (int side : {nodes[x].left, nodes[x].right}) {
        if (side >= n && nodes[side].distance == m.distance) {
          frontier.push_back(side);
        } else {
          level_children.push_back(side);
        }
      }
    }

    std::vector<int> big;
    std::vector<int> small;
    for (int child : level_children) {
      int child_size = child < n ? 1 : nodes[child].size;
      (child_size >= min_cluster_size ? big : small).push_back(child);
    }

    for (int child : small) spill_points(child, cid, lambda);
    if (big.size() >= 2) {
      // true split: the parent dies here, one child cluster per big side
      for (int child_node : big) {
        CondensedCluster child;
        child.birth_lambda = lambda;
        child.parent = cid;
        clusters.push_back(child);
        int child_id = static_cast<int>(clusters.size()) - 1;
        clusters[cid].children.push_back(child_id);
        stack.push_back({child_node, child_id});
      }
    } else if (big.size() == 1) {
      stack.push_back({big[0], cid});
    }
    // zero big children: everything spilled, the cluster bottoms out
  }

  // stability: every member contributes (lambda_leave - lambda_birth);
  // members that transfer to child clusters leave at the split lambda
  const int cluster_total = static_cast<int>(clusters.size());
  std::vector<int> cluster_size(cluster_total, 0);
  for (int c = cluster_total - 1; c >= 0; --c) {
    cluster_size[c] += static_cast<int>(clusters[c].points.size());
    for (int child : clusters[c].children) cluster_size[c] += cluster_size[child];
  }
  for (int c = 0; c < cluster_total; ++c) {
    double birth = clusters[c].birth_lambda;
    double s = 0.0;
    for (const auto& [point, lambda] : clusters[c].points) {
      (void)point;
      s += lambda - birth;
    }
    for (int child : clusters[c].children) {
      s += (clusters[child].birth_lambda - birth) * cluster_size[child];
    }
    clusters[c].stability = s;
  }

  // excess-of-mass selection, children first (ids grow downward); the root
  // is never eligible, ties go to the parent
  std::vector<bool> selected(cluster_total, true);
  std::vector<double> subtree_stability(cluster_total, 0.0);
  selected[0] = false;
  for (int c = cluster_total - 1; c >= 1; --c) {
    double children_sum = 0.0;
    for (int child : clusters[c].children) children_sum += subtree_stability[child];
    if (!clusters[c].children.empty() && children_sum > clusters[c].stability) {
      selected[c] = false;
      subtree_stability[c] = children_sum;
    } else {
      subtree_stability[c] = clusters[c].stability;
      // deselect the whole subtree below
      std::vector<int> below = clusters[c].children;
      while (!below.empty()) {
        int x = below.back();
        below.pop_back();
        selected[x] = false;
        below.insert(below.end(), clusters[x].children.begin(), clusters[x].children.end());
      }
    }
  }

  // labels: a point belongs to the selected ancestor-or-self of the cluster
  // it fell out of; none selected on that path -> noise
  std::vector<int> cluster_label(cluster_total, -1);
  int next_label = 0;
  for (int c = 1; c < cluster_total; ++c) {
    if (selected[c]) cluster_label[c] = next_label++;
  }
  for (int p = 0; p < n; ++p) {
    int c = point_cluster[p];
    while (c >= 0 && !selected[c]) c = clusters[c].parent;
    labels[p] = c >= 0 ? cluster_label[c] : -1;
  }
  return labels;
}

int cluster_count(const std::vector<std::vector<double>>& points, int min_cluster_size) {
  std::vector<int> labels = hdbscan_labels(points, min_cluster_size);
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  return max_label + 1;
}

}  // namespace cluster
}  // namespace dce
