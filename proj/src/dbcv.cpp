#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "monometry/leakage.hpp"

namespace monometry::leakage {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double euclidean(const Eigen::MatrixX2d& pts, int a, int b) {
  const double dx = pts(a, 0) - pts(b, 0);
  const double dy = pts(a, 1) - pts(b, 1);
  return std::sqrt(dx * dx + dy * dy);
}

// All-points core distance: inverse of the local density of a point with
// respect to the other members of its cluster, in the data dimension
// (2 here). Duplicated points yield a core distance of 0.
std::vector<double> core_distances(const Eigen::MatrixX2d& pts,
                                   const std::vector<int>& members) {
  const int k = static_cast<int>(members.size());
  std::vector<double> core(k, 0.0);
  for (int a = 0; a < k; ++a) {
    double acc = 0;
    for (int b = 0; b < k; ++b) {
      if (b == a) continue;
      const double d = euclidean(pts, members[a], members[b]);
      const double inv = d > 0 ? 1.0 / d : kInf;
      acc += inv * inv;
    }
    core[a] = std::isinf(acc) ? 0.0 : std::pow(acc / (k - 1), -0.5);
  }
  return core;
}

struct MstEdge {
  int a, b;
  double weight;
};

// Prim's algorithm on the dense mutual-reachability graph of one cluster.
std::vector<MstEdge> mutual_reachability_mst(const Eigen::MatrixX2d& pts,
                                             const std::vector<int>& members,
                                             const std::vector<double>& core) {
  const int k = static_cast<int>(members.size());
  std::vector<bool> in_tree(k, false);
  std::vector<double> best(k, kInf);
  std::vector<int> parent(k, -1);
  std::vector<MstEdge> edges;
  best[0] = 0;
  for (int step = 0; step < k; ++step) {
    int u = -1;
    for (int v = 0; v < k; ++v)
      if (!in_tree[v] && (u < 0 || best[v] < best[u])) u = v;
    in_tree[u] = true;
    if (parent[u] >= 0) edges.push_back({parent[u], u, best[u]});
    for (int v = 0; v < k; ++v) {
      if (in_tree[v]) continue;
      const double mr = std::max({euclidean(pts, members[u], members[v]),
                                  core[u], core[v]});
      if (mr < best[v]) {
        best[v] = mr;
        parent[v] = u;
      }
    }
  }
  return edges;
}

// Density sparseness: the largest internal MST edge, i.e. an edge both of
// whose endpoints have tree degree > 1. Falls back to the largest edge
// when the tree has no internal edge (2-point clusters).
double density_sparseness(const std::vector<MstEdge>& mst, int k) {
  std::vector<int> degree(k, 0);
  for (const MstEdge& e : mst) {
    ++degree[e.a];
    ++degree[e.b];
  }
  double max_internal = -1, max_any = 0;
  for (const MstEdge& e : mst) {
    max_any = std::max(max_any, e.weight);
    if (degree[e.a] > 1 && degree[e.b] > 1)
      max_internal = std::max(max_internal, e.weight);
  }
  return max_internal >= 0 ? max_internal : max_any;
}

}  // namespace

double dbcv(const Eigen::MatrixX2d& points, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != points.rows())
    throw InvalidArgument("dbcv: labels/points size mismatch");

  std::map<int, std::vector<int>> clusters;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i)
    if (labels[i] >= 0) clusters[labels[i]].push_back(i);

  int usable = 0;
  for (const auto& [id, members] : clusters)
    if (members.size() >= 2) ++usable;
  if (usable < 2)
    throw TooFewClusters("dbcv: need at least 2 clusters with 2+ points");

  // Per-cluster core distances and sparseness.
  std::vector<int> ids;
  std::vector<std::vector<int>> member_lists;
  std::vector<std::vector<double>> cores;
  std::vector<double> sparseness;
  for (const auto& [id, members] : clusters) {
    if (members.size() < 2) continue;  // singleton clusters contribute 0
    ids.push_back(id);
    member_lists.push_back(members);
    cores.push_back(core_distances(points, members));
    const auto mst = mutual_reachability_mst(points, members, cores.back());
    sparseness.push_back(density_sparseness(mst, static_cast<int>(members.size())));
  }

  // Pairwise density separation: minimum mutual-reachability distance
  // between members of two clusters.
  const int c = static_cast<int>(ids.size());
  Eigen::MatrixXd separation = Eigen::MatrixXd::Constant(c, c, kInf);
  for (int i = 0; i < c; ++i) {
    for (int j = i + 1; j < c; ++j) {
      double min_mr = kInf;
      for (size_t a = 0; a < member_lists[i].size(); ++a)
        for (size_t b = 0; b < member_lists[j].size(); ++b) {
          const double mr =
              std::max({euclidean(points, member_lists[i][a], member_lists[j][b]),
                        cores[i][a], cores[j][b]});
          min_mr = std::min(min_mr, mr);
        }
      separation(i, j) = min_mr;
      separation(j, i) = min_mr;
    }
  }

  const double total_points = static_cast<double>(points.rows());
  double score = 0;
  for (int i = 0; i < c; ++i) {
    double min_sep = kInf;
    for (int j = 0; j < c; ++j)
      if (j != i) min_sep = std::min(min_sep, separation(i, j));
    const double denom = std::max(min_sep, sparseness[i]);
    const double validity = denom > 0 ? (min_sep - sparseness[i]) / denom : 0.0;
    score += (static_cast<double>(member_lists[i].size()) / total_points) * validity;
  }
  return score;
}

double dbcv(const std::vector<Reduced2D>& points, const std::vector<int>& labels) {
  Eigen::MatrixX2d m(points.size(), 2);
  for (size_t i = 0; i < points.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = points[i].x;
    m(static_cast<Eigen::Index>(i), 1) = points[i].y;
  }
  return dbcv(m, labels);
}

}  // namespace monometry::leakage
