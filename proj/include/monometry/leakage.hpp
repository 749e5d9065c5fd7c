#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "monometry/errors.hpp"
#include "monometry/evaluation.hpp"

namespace monometry::leakage {

inline constexpr int kVisualFeatures = 256;
inline constexpr int kAnnotationFeatures = 4;  // 3 class counts + mean box area
inline constexpr int kEmbeddingLength = kVisualFeatures + kAnnotationFeatures + 1;

// Per-image feature vector: ingested visual features, annotation summary
// and timestamp. full_vector holds the concatenation; after
// standardize_embeddings it is column-standardized over the dataset.
struct ImageEmbedding {
  std::string image_id;
  Eigen::VectorXd visual;               // length 256
  Eigen::VectorXd annotation_features;  // length 4
  double timestamp = 0;                 // seconds since epoch
  Eigen::VectorXd full_vector;          // length 261
};

struct Reduced2D {
  std::string image_id;
  double x = 0;
  double y = 0;
};

enum class Subset { train, val, test };

struct ClusterPartition {
  std::map<std::string, int> labels;  // -1 = noise
  double dbcv = 0;
  std::map<std::string, Subset> split;
  std::array<double, 3> achieved_fractions{0, 0, 0};  // train, val, test
};

struct DayRecord {
  std::string date;  // ISO date, ties broken by lexicographic order
  double inst = 0;   // daily insolation duration
  double glot = 0;   // daily global irradiance
  double sigma = 0;  // sunshine fraction of day length, in [0,1]
};

struct TsneParams {
  double perplexity = 30.0;
  double learning_rate = 200.0;
  int iterations = 1000;
  int exaggeration_iters = 250;
  double exaggeration = 12.0;
  std::uint64_t seed = 0;
};

// Builds the raw (unstandardized) 261-length embedding for one image.
// Annotation features: counts of class ids 0, 1 and 2 plus the mean
// bounding-box area in squared pixels (0 when the image has no boxes).
ImageEmbedding build_embedding(const std::string& image_id,
                               const Eigen::VectorXd& visual,
                               const std::vector<evaluation::GroundTruth>& annotations,
                               double timestamp);

// Standardizes each full_vector column to zero mean and unit variance over
// the dataset; constant columns become 0.
void standardize_embeddings(std::vector<ImageEmbedding>& embeddings);

// Per-point Gaussian precisions (beta = 1/(2 sigma^2)) calibrated by
// bisection so each conditional distribution's entropy hits
// log(perplexity).
Eigen::VectorXd perplexity_precisions(const Eigen::MatrixXd& data, double perplexity);

// Exact (dense) t-SNE to 2D: per-point bandwidths found by bisection on
// the conditional entropy, then gradient descent with momentum, adaptive
// gains and early exaggeration. Deterministic given the seed.
Eigen::MatrixX2d tsne(const Eigen::MatrixXd& data, const TsneParams& params);

std::vector<Reduced2D> tsne(const std::vector<ImageEmbedding>& embeddings,
                            const TsneParams& params);

// Euclidean DBSCAN on 2D points; returns one label per point, -1 for
// noise. A point is core when its eps-neighborhood (itself included)
// contains at least min_samples points.
std::vector<int> dbscan(const Eigen::MatrixX2d& points, double eps, int min_samples);

std::vector<int> dbscan(const std::vector<Reduced2D>& points, double eps,
                        int min_samples);

// Density-based clustering validation index in [-1, 1]: compares density
// sparseness (internal mutual-reachability MST edges) against density
// separation between clusters, weighted by cluster size over all points
// (noise counts in the denominator and contributes zero validity).
double dbcv(const Eigen::MatrixX2d& points, const std::vector<int>& labels);

double dbcv(const std::vector<Reduced2D>& points, const std::vector<int>& labels);

// Whole-cluster train/val/test assignment: noise points become singleton
// clusters, clusters are shuffled with the seed and greedily placed in the
// subset furthest below its target image-count ratio. No cluster ever
// spans two subsets.
ClusterPartition cluster_split(const std::map<std::string, int>& labels,
                               std::array<double, 3> ratios, std::uint64_t seed);

// Min-max normalizes the three weather variables, scores each day by their
// mean and returns (cloudiest, sunniest); ties break toward the earlier
// date.
std::pair<DayRecord, DayRecord> select_extreme_days(const std::vector<DayRecord>& records);

}  // namespace monometry::leakage
