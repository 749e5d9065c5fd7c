#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "monometry/leakage.hpp"

namespace monometry::leakage {

ImageEmbedding build_embedding(const std::string& image_id,
                               const Eigen::VectorXd& visual,
                               const std::vector<evaluation::GroundTruth>& annotations,
                               double timestamp) {
  if (visual.size() != kVisualFeatures)
    throw WrongVisualLength("build_embedding: visual vector for " + image_id +
                            " has length " + std::to_string(visual.size()) +
                            ", expected " + std::to_string(kVisualFeatures));

  ImageEmbedding emb;
  emb.image_id = image_id;
  emb.visual = visual;
  emb.timestamp = timestamp;

  Eigen::VectorXd features = Eigen::VectorXd::Zero(kAnnotationFeatures);
  double area_sum = 0;
  for (const auto& gt : annotations) {
    if (gt.class_id >= 0 && gt.class_id < 3) features[gt.class_id] += 1.0;
    area_sum += gt.box.width() * gt.box.height();
  }
  features[3] = annotations.empty() ? 0.0 : area_sum / annotations.size();
  emb.annotation_features = features;

  emb.full_vector.resize(kEmbeddingLength);
  emb.full_vector << visual, features, timestamp;
  return emb;
}

void standardize_embeddings(std::vector<ImageEmbedding>& embeddings) {
  if (embeddings.empty()) return;
  const auto n = static_cast<Eigen::Index>(embeddings.size());
  Eigen::MatrixXd m(n, kEmbeddingLength);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (embeddings[i].full_vector.size() != kEmbeddingLength)
      throw InvalidArgument("standardize_embeddings: wrong vector length for " +
                            embeddings[i].image_id);
    m.row(i) = embeddings[i].full_vector;
  }
  const Eigen::RowVectorXd mean = m.colwise().mean();
  m.rowwise() -= mean;
  const Eigen::RowVectorXd stddev =
      (m.array().square().colwise().sum() / static_cast<double>(n)).sqrt();
  for (Eigen::Index c = 0; c < kEmbeddingLength; ++c) {
    if (stddev[c] > 0)
      m.col(c) /= stddev[c];
    else
      m.col(c).setZero();  // constant column
  }
  for (Eigen::Index i = 0; i < n; ++i) embeddings[i].full_vector = m.row(i);
}

namespace {

// Explicit Fisher-Yates so shuffles are identical across standard
// libraries.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (size_t i = items.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace

ClusterPartition cluster_split(const std::map<std::string, int>& labels,
                               std::array<double, 3> ratios, std::uint64_t seed) {
  if (labels.empty()) throw EmptyInput("cluster_split: no labels");
  const double ratio_sum = ratios[0] + ratios[1] + ratios[2];
  if (!(ratio_sum > 0)) throw InvalidArgument("cluster_split: ratios must sum > 0");
  for (auto& r : ratios) r /= ratio_sum;

  // Noise points become singleton clusters so every image is assigned.
  std::vector<std::vector<const std::string*>> groups;
  std::map<int, size_t> cluster_to_group;
  for (const auto& [id, label] : labels) {
    if (label < 0) {
      groups.push_back({&id});
    } else {
      auto it = cluster_to_group.find(label);
      if (it == cluster_to_group.end()) {
        cluster_to_group.emplace(label, groups.size());
        groups.push_back({&id});
      } else {
        groups[it->second].push_back(&id);
      }
    }
  }

  seeded_shuffle(groups, seed);
  // Largest clusters place first, the shuffle ordering equal sizes; a big
  // cluster placed late can overshoot a small subset's target by most of
  // its own size.
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  const double total = static_cast<double>(labels.size());
  std::array<double, 3> fill{0, 0, 0};
  ClusterPartition part;
  part.labels = labels;
  for (const auto& group : groups) {
    // Assign the whole cluster to the subset furthest below its target
    // image count; ties resolve train > val > test.
    int best = 0;
    double best_deficit = ratios[0] * total - fill[0];
    for (int s = 1; s < 3; ++s) {
      const double deficit = ratios[s] * total - fill[s];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    fill[best] += static_cast<double>(group.size());
    for (const std::string* id : group)
      part.split[*id] = static_cast<Subset>(best);
  }
  for (int s = 0; s < 3; ++s) part.achieved_fractions[s] = fill[s] / total;
  return part;
}

std::pair<DayRecord, DayRecord> select_extreme_days(const std::vector<DayRecord>& records) {
  if (records.empty()) throw EmptyInput("select_extreme_days: no records");
  if (records.size() < 2)
    throw InvalidArgument("select_extreme_days: need at least 2 records");

  auto column = [&](auto getter) {
    std::vector<double> v(records.size());
    std::transform(records.begin(), records.end(), v.begin(), getter);
    return v;
  };
  const std::array<std::vector<double>, 3> vars = {
      column([](const DayRecord& r) { return r.inst; }),
      column([](const DayRecord& r) { return r.glot; }),
      column([](const DayRecord& r) { return r.sigma; })};

  for (const auto& v : vars)
    for (double x : v)
      if (!std::isfinite(x))
        throw InvalidArgument("select_extreme_days: non-finite variable");

  bool any_varies = false;
  std::array<double, 3> lo{}, range{};
  for (int k = 0; k < 3; ++k) {
    const auto [mn, mx] = std::minmax_element(vars[k].begin(), vars[k].end());
    lo[k] = *mn;
    range[k] = *mx - *mn;
    if (range[k] > 0) any_varies = true;
  }
  if (!any_varies)
    throw ConstantVariables("select_extreme_days: all three variables are constant");

  size_t argmin = 0, argmax = 0;
  double best_min = std::numeric_limits<double>::infinity();
  double best_max = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < records.size(); ++i) {
    double score = 0;
    for (int k = 0; k < 3; ++k)
      score += range[k] > 0 ? (vars[k][i] - lo[k]) / range[k] : 0.0;
    score /= 3.0;
    // ties break toward the earlier date, independent of input order
    if (score < best_min ||
        (score == best_min && records[i].date < records[argmin].date)) {
      best_min = score;
      argmin = i;
    }
    if (score > best_max ||
        (score == best_max && records[i].date < records[argmax].date)) {
      best_max = score;
      argmax = i;
    }
  }
  return {records[argmin], records[argmax]};
}

}  // namespace monometry::leakage
