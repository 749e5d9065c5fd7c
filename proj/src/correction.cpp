#include "monometry/correction.hpp"

#include <algorithm>
#include <cmath>

namespace monometry::correction {

namespace {

constexpr double kSizeFloorCm = 0.1;

double poly_eval(const Eigen::VectorXd& coeffs, double x) {
  double acc = 0;
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
    acc = acc * x + coeffs[k];
  return acc;
}

// Strict monotonicity of a degree <= 2 polynomial over [lo, hi]: its
// derivative is affine, so checking the endpoints suffices.
bool increasing_on(const Eigen::VectorXd& coeffs, double lo, double hi) {
  const double c1 = coeffs.size() > 1 ? coeffs[1] : 0.0;
  const double c2 = coeffs.size() > 2 ? coeffs[2] : 0.0;
  return c1 + 2 * c2 * lo > 0 && c1 + 2 * c2 * hi > 0;
}

void check_slot(const std::optional<CorrectionModel>& model, Axis axis,
                CorrectionStage stage, const char* slot) {
  if (!model) return;
  if (model->axis != axis || model->stage != stage)
    throw AxisMismatch(std::string("correct_pipeline: model in slot ") + slot +
                       " is tagged for a different axis or stage");
}

}  // namespace

void PipelineModels::validate() const {
  check_slot(shape_width, Axis::width, CorrectionStage::box_shape, "shape_width");
  check_slot(shape_height, Axis::height, CorrectionStage::box_shape, "shape_height");
  check_slot(dim_width, Axis::width, CorrectionStage::dimension, "dim_width");
  check_slot(dim_height, Axis::height, CorrectionStage::dimension, "dim_height");
}

CorrectionModel fit(const std::vector<PairedSample>& samples, int degree,
                    Axis axis, CorrectionStage stage) {
  if (degree != 1 && degree != 2)
    throw InvalidArgument("fit: degree must be 1 or 2");
  const int n = static_cast<int>(samples.size());
  if (n < degree + 2)
    throw InsufficientSamples("fit: need at least degree + 2 samples, got " +
                              std::to_string(n));

  Eigen::MatrixXd design(n, degree + 1);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(samples[i].predicted) || !std::isfinite(samples[i].reference))
      throw InvalidArgument("fit: non-finite sample");
    design(i, 0) = 1.0;
    for (int k = 1; k <= degree; ++k)
      design(i, k) = design(i, k - 1) * samples[i].predicted;
    target(i) = samples[i].reference;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < degree + 1)
    throw RankDeficient("fit: design matrix is numerically singular "
                        "(predicted values lack variation)");

  CorrectionModel model;
  model.degree = degree;
  model.coefficients = qr.solve(target);
  model.axis = axis;
  model.stage = stage;
  auto [lo, hi] = std::minmax_element(
      samples.begin(), samples.end(),
      [](const PairedSample& a, const PairedSample& b) { return a.predicted < b.predicted; });
  model.fit_min = lo->predicted;
  model.fit_max = hi->predicted;
  model.monotone_on_fit_range =
      increasing_on(model.coefficients, model.fit_min, model.fit_max);
  return model;
}

double evaluate(const CorrectionModel& model, double predicted) {
  return poly_eval(model.coefficients, predicted);
}

double apply(const CorrectionModel& model, double predicted) {
  return std::max(evaluate(model, predicted), kSizeFloorCm);
}

bool extrapolates(const CorrectionModel& model, double predicted) {
  return predicted < model.fit_min || predicted > model.fit_max;
}

geometry::SizeEstimate correct_pipeline(const PipelineModels& models,
                                        const geometry::SizeEstimate& raw) {
  models.validate();
  geometry::SizeEstimate out = raw;
  const bool shape = models.shape_width || models.shape_height;
  const bool dim = models.dim_width || models.dim_height;

  if (models.shape_width) out.dim_x_cm = apply(*models.shape_width, out.dim_x_cm);
  if (models.shape_height) out.dim_y_cm = apply(*models.shape_height, out.dim_y_cm);
  if (models.dim_width) out.dim_x_cm = apply(*models.dim_width, out.dim_x_cm);
  if (models.dim_height) out.dim_y_cm = apply(*models.dim_height, out.dim_y_cm);

  if (dim)
    out.stage = geometry::Stage::dim_corrected;
  else if (shape)
    out.stage = geometry::Stage::shape_corrected;
  return out;
}

namespace {

// Linear interpolation between order statistics (quantile at p of a sorted
// sample: position (n-1)p).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = (sorted.size() - 1) * p;
  const auto lo = static_cast<size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

ErrorReport error_report(const std::vector<PairedSample>& pairs) {
  if (pairs.empty()) throw EmptyInput("error_report: no samples");

  std::vector<double> residuals;
  residuals.reserve(pairs.size());
  double sq = 0, abs = 0;
  for (const PairedSample& s : pairs) {
    const double r = s.reference - s.predicted;
    residuals.push_back(r);
    sq += r * r;
    abs += std::abs(r);
  }
  std::sort(residuals.begin(), residuals.end());

  ErrorReport rep;
  rep.n = static_cast<int>(pairs.size());
  rep.rmse = std::sqrt(sq / rep.n);
  rep.mae = abs / rep.n;
  rep.residual_min = residuals.front();
  rep.q1 = quantile_sorted(residuals, 0.25);
  rep.median = quantile_sorted(residuals, 0.5);
  rep.q3 = quantile_sorted(residuals, 0.75);
  rep.residual_max = residuals.back();
  return rep;
}

}  // namespace monometry::correction
