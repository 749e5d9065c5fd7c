#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "monometry/errors.hpp"
#include "monometry/geometry.hpp"

namespace monometry::correction {

enum class Axis { width, height };
enum class CorrectionStage { box_shape, dimension };

// One (predicted, reference) pair in centimetres.
struct PairedSample {
  double predicted = 0;
  double reference = 0;
  std::string object_id;
};

// Fitted polynomial mapping a predicted dimension to a corrected one.
struct CorrectionModel {
  int degree = 1;                   // 1 or 2
  Eigen::VectorXd coefficients;     // constant term first, degree+1 entries
  Axis axis = Axis::width;
  CorrectionStage stage = CorrectionStage::box_shape;
  double fit_min = 0;               // range of training inputs (cm)
  double fit_max = 0;
  // Whether the fitted polynomial is strictly increasing over
  // [fit_min, fit_max]. A false value is a signal to the caller, not an
  // error: the model still applies.
  bool monotone_on_fit_range = true;
};

struct ErrorReport {
  double rmse = 0;
  double mae = 0;
  // residual (reference - predicted) order statistics, linear interpolation
  double residual_min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double residual_max = 0;
  int n = 0;
};

// Optional per-axis models for the two correction stages. Slots must hold
// models tagged with the matching axis and stage.
struct PipelineModels {
  std::optional<CorrectionModel> shape_width;
  std::optional<CorrectionModel> shape_height;
  std::optional<CorrectionModel> dim_width;
  std::optional<CorrectionModel> dim_height;

  void validate() const;  // throws AxisMismatch
};

// Least-squares polynomial fit (QR factorization of the Vandermonde
// matrix). Requires degree+2 samples and at least degree+1 distinct
// predicted values.
CorrectionModel fit(const std::vector<PairedSample>& samples, int degree,
                    Axis axis, CorrectionStage stage);

// Raw polynomial value, no clamping.
double evaluate(const CorrectionModel& model, double predicted);

// Evaluates the polynomial; results are clamped below at 0.1 cm so a
// correction can never emit a non-physical size.
double apply(const CorrectionModel& model, double predicted);

// True when the input falls outside the model's training range.
bool extrapolates(const CorrectionModel& model, double predicted);

// Applies shape correction then dimension correction per axis, advancing
// the estimate's stage accordingly. Absent models pass through.
geometry::SizeEstimate correct_pipeline(const PipelineModels& models,
                                        const geometry::SizeEstimate& raw);

// RMSE, MAE and residual quartiles of reference - predicted.
ErrorReport error_report(const std::vector<PairedSample>& pairs);

}  // namespace monometry::correction
