#include <queue>
#include <vector>

#include "monometry/leakage.hpp"

namespace monometry::leakage {

namespace {

constexpr int kUnvisited = -3;
constexpr int kTentativeNoise = -2;

std::vector<int> neighbors_of(const Eigen::MatrixX2d& points, int idx, double eps2) {
  std::vector<int> out;
  for (int j = 0; j < points.rows(); ++j) {
    const double dx = points(idx, 0) - points(j, 0);
    const double dy = points(idx, 1) - points(j, 1);
    if (dx * dx + dy * dy <= eps2) out.push_back(j);  // point itself included
  }
  return out;
}

}  // namespace

std::vector<int> dbscan(const Eigen::MatrixX2d& points, double eps, int min_samples) {
  if (eps <= 0) throw InvalidArgument("dbscan: eps must be > 0");
  if (min_samples < 1) throw InvalidArgument("dbscan: min_samples must be >= 1");

  const int n = static_cast<int>(points.rows());
  const double eps2 = eps * eps;
  std::vector<int> labels(n, kUnvisited);
  int next_cluster = 0;

  for (int i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    const std::vector<int> seeds = neighbors_of(points, i, eps2);
    if (static_cast<int>(seeds.size()) < min_samples) {
      labels[i] = kTentativeNoise;
      continue;
    }
    const int cluster = next_cluster++;
    labels[i] = cluster;
    std::queue<int> frontier;
    for (int s : seeds)
      if (s != i) frontier.push(s);
    while (!frontier.empty()) {
      const int j = frontier.front();
      frontier.pop();
      if (labels[j] == kTentativeNoise) labels[j] = cluster;  // border point
      if (labels[j] != kUnvisited) continue;
      labels[j] = cluster;
      const std::vector<int> reach = neighbors_of(points, j, eps2);
      if (static_cast<int>(reach.size()) >= min_samples)
        for (int r : reach) {
          if (labels[r] == kUnvisited || labels[r] == kTentativeNoise)
            frontier.push(r);
        }
    }
  }

  for (int& l : labels)
    if (l == kTentativeNoise) l = -1;
  return labels;
}

std::vector<int> dbscan(const std::vector<Reduced2D>& points, double eps,
                        int min_samples) {
  Eigen::MatrixX2d m(points.size(), 2);
  for (size_t i = 0; i < points.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = points[i].x;
    m(static_cast<Eigen::Index>(i), 1) = points[i].y;
  }
  return dbscan(m, eps, min_samples);
}

}  // namespace monometry::leakage
