#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <random>

#include "monometry/leakage.hpp"

namespace monometry::leakage {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d = sq.replicate(1, x.rows()) +
                      sq.transpose().replicate(x.rows(), 1) -
                      2.0 * x * x.transpose();
  return d.cwiseMax(0.0);
}

}  // namespace

Eigen::VectorXd perplexity_precisions(const Eigen::MatrixXd& data, double perplexity) {
  const Eigen::Index n = data.rows();
  const Eigen::MatrixXd d2 = squared_distances(data);
  const double target = std::log(perplexity);

  Eigen::VectorXd betas(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0;
    double beta_min = -std::numeric_limits<double>::infinity();
    double beta_max = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
      double sum_p = 0, sum_dp = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double p = std::exp(-beta * d2(i, j));
        sum_p += p;
        sum_dp += d2(i, j) * p;
      }
      if (sum_p <= 0) {
        // every neighbor collapsed to zero weight; relax beta
        beta_max = beta;
        beta = (std::isinf(beta_min)) ? beta / 2.0 : 0.5 * (beta + beta_min);
        continue;
      }
      const double entropy = std::log(sum_p) + beta * sum_dp / sum_p;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-7) break;
      if (diff > 0) {
        beta_min = beta;
        beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
      } else {
        beta_max = beta;
        beta = std::isinf(beta_min) ? beta / 2.0 : 0.5 * (beta + beta_min);
      }
    }
    betas[i] = beta;
  }
  return betas;
}

namespace {

// Gradient descent on the unique rows; callers have already validated the
// parameters and removed duplicates.
Eigen::MatrixX2d tsne_unique(const Eigen::MatrixXd& data, const TsneParams& params) {
  const Eigen::Index n = data.rows();
  const Eigen::MatrixXd d2 = squared_distances(data);

  // Conditional distributions with calibrated bandwidths, then the
  // symmetrized joint distribution.
  const Eigen::VectorXd betas = perplexity_precisions(data, params.perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum_p = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      p(i, j) = std::exp(-betas[i] * d2(i, j));
      sum_p += p(i, j);
    }
    if (sum_p > 0) p.row(i) /= sum_p;
  }
  p = (p + p.transpose()).eval() / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1e-4);
  Eigen::MatrixX2d y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k) y(i, k) = gauss(rng);

  Eigen::MatrixX2d increment = Eigen::MatrixX2d::Zero(n, 2);
  Eigen::MatrixX2d gains = Eigen::MatrixX2d::Ones(n, 2);
  Eigen::MatrixXd num(n, n), q(n, n);
  Eigen::MatrixX2d grad(n, 2);

  p *= params.exaggeration;
  for (int iter = 0; iter < params.iterations; ++iter) {
    if (iter == params.exaggeration_iters) p /= params.exaggeration;
    const double momentum = iter < params.exaggeration_iters ? 0.5 : 0.8;

    // Student-t affinities in the embedding.
    double sum_num = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double w = 1.0 / (1.0 + dx * dx + dy * dy);
        num(i, j) = w;
        num(j, i) = w;
        sum_num += 2.0 * w;
      }
    }
    q = (num / sum_num).cwiseMax(1e-12);

    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double mult = (p(i, j) - q(i, j)) * num(i, j);
        grad(i, 0) += mult * (y(i, 0) - y(j, 0));
        grad(i, 1) += mult * (y(i, 1) - y(j, 1));
      }
    }
    grad *= 4.0;

    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0) == (increment(i, k) > 0);
        gains(i, k) = same_sign ? gains(i, k) * 0.8 : gains(i, k) + 0.2;
        gains(i, k) = std::max(gains(i, k), 0.01);
        increment(i, k) = momentum * increment(i, k) -
                          params.learning_rate * gains(i, k) * grad(i, k);
        y(i, k) += increment(i, k);
      }
    }
    y.rowwise() -= y.colwise().mean();
  }
  return y;
}

}  // namespace

Eigen::MatrixX2d tsne(const Eigen::MatrixXd& data, const TsneParams& params) {
  const Eigen::Index n = data.rows();
  if (params.perplexity <= 1.0)
    throw InvalidArgument("tsne: perplexity must be > 1");
  if (static_cast<double>(n) <= 3.0 * params.perplexity)
    throw PerplexityTooLarge("tsne: need n > 3 * perplexity, got n = " +
                             std::to_string(n));

  // Exact duplicate rows collapse onto one representative and receive its
  // coordinates; the gradient descent only ever sees distinct points.
  std::map<std::string, Eigen::Index> first_seen;
  std::vector<Eigen::Index> unique_rows;
  std::vector<Eigen::Index> representative(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::string key(static_cast<size_t>(data.cols()) * sizeof(double), '\0');
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      const double v = data(i, c);
      std::memcpy(key.data() + static_cast<size_t>(c) * sizeof(double), &v, sizeof(double));
    }
    const auto [it, inserted] =
        first_seen.emplace(std::move(key), static_cast<Eigen::Index>(unique_rows.size()));
    if (inserted) unique_rows.push_back(i);
    representative[i] = it->second;
  }

  const auto n_unique = static_cast<Eigen::Index>(unique_rows.size());
  if (n_unique < 2)
    throw DegenerateInput("tsne: all input points are identical");
  if (static_cast<double>(n_unique) <= 3.0 * params.perplexity)
    throw PerplexityTooLarge("tsne: only " + std::to_string(n_unique) +
                             " distinct points for perplexity " +
                             std::to_string(params.perplexity));

  if (n_unique == n) return tsne_unique(data, params);

  Eigen::MatrixXd unique_data(n_unique, data.cols());
  for (Eigen::Index u = 0; u < n_unique; ++u)
    unique_data.row(u) = data.row(unique_rows[u]);
  const Eigen::MatrixX2d unique_y = tsne_unique(unique_data, params);
  Eigen::MatrixX2d y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) y.row(i) = unique_y.row(representative[i]);
  return y;
}

std::vector<Reduced2D> tsne(const std::vector<ImageEmbedding>& embeddings,
                            const TsneParams& params) {
  Eigen::MatrixXd data(embeddings.size(), kEmbeddingLength);
  for (size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].full_vector.size() != kEmbeddingLength)
      throw InvalidArgument("tsne: embedding " + embeddings[i].image_id +
                            " has wrong length");
    data.row(i) = embeddings[i].full_vector;
  }
  const Eigen::MatrixX2d y = tsne(data, params);
  std::vector<Reduced2D> out(embeddings.size());
  for (size_t i = 0; i < embeddings.size(); ++i)
    out[i] = Reduced2D{embeddings[i].image_id, y(static_cast<Eigen::Index>(i), 0),
                       y(static_cast<Eigen::Index>(i), 1)};
  return out;
}

}  // namespace monometry::leakage
