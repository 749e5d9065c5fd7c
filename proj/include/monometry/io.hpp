#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "monometry/correction.hpp"
#include "monometry/evaluation.hpp"
#include "monometry/geometry.hpp"
#include "monometry/leakage.hpp"

namespace monometry::io {

enum class IssueKind {
  malformed_line,
  missing_key,
  invalid_value,
  invariant_violation,
};

// Structured parse failure: parsers never throw on bad input, they report
// every offending line/key.
struct ParseIssue {
  IssueKind kind = IssueKind::malformed_line;
  int line = 0;        // 1-based; 0 when not line-oriented
  std::string locus;   // field or key name
  std::string reason;
};

struct ParsedBox {
  geometry::PixelBox box;  // pixel corners; carries class_id/confidence
  int line = 0;
  bool clamped = false;  // normalized corners spilled out of [0,1]
};

struct LabelParse {
  std::vector<ParsedBox> boxes;
  std::vector<ParseIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Parses detector/annotation label text: one `class cx cy w h [conf]` line
// per box, normalized coordinates. Corners are denormalized against
// (W-1, H-1) and clamped into the image.
LabelParse parse_labels(std::string_view text, int image_w, int image_h,
                        bool expect_confidence);

std::string write_labels(const std::vector<geometry::PixelBox>& boxes,
                         int image_w, int image_h, bool with_confidence);

struct RigParse {
  std::optional<geometry::CameraRig> rig;
  std::string id;
  std::string units;
  std::vector<ParseIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Parses `key = value` rig configuration with exactly the keys focal_mm,
// sensor_w_mm, sensor_h_mm, image_w_px, image_h_px, height_m, pitch_deg
// (plus optional id and units). Pitch converts to radians; rig invariants
// are enforced here.
RigParse parse_rig(std::string_view text);

std::string write_rig(const geometry::CameraRig& rig, const std::string& id = "rig",
                      const std::string& units = "metric");

struct ModelParse {
  std::optional<correction::CorrectionModel> model;
  std::vector<ParseIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Correction-model persistence (JSON, lossless coefficients).
std::string write_model(const correction::CorrectionModel& model);
ModelParse parse_model(std::string_view text);

struct SizeRow {
  std::string image_id;
  int class_id = 0;
  double dim_x_cm = 0;
  double dim_y_cm = 0;
  double range_m = 0;  // distance from the camera to the ground point
};

std::string write_size_csv(const std::vector<SizeRow>& rows);

struct PairedRow {
  std::string object_id;
  double width_cm = 0;
  double height_cm = 0;
};

struct PairedParse {
  std::vector<PairedRow> rows;
  std::vector<ParseIssue> issues;
  bool ok() const { return issues.empty(); }
};

// CSV with header object_id,width_cm,height_cm.
PairedParse parse_paired_csv(std::string_view text);
std::string write_paired_csv(const std::vector<PairedRow>& rows);

std::string write_error_report(const correction::ErrorReport& report);
std::string write_eval_report(const evaluation::EvalReport& report);

// image_id,cluster,subset rows, sorted by image id.
std::string write_partition_csv(const leakage::ClusterPartition& partition);
std::string write_partition_summary(const leakage::ClusterPartition& partition);

struct EmbeddingsParse {
  std::vector<std::pair<std::string, Eigen::VectorXd>> rows;
  std::vector<ParseIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Dense matrix text: image_id followed by 256 visual features per row.
EmbeddingsParse parse_embeddings_csv(std::string_view text);

struct WeatherParse {
  std::vector<leakage::DayRecord> records;
  std::vector<ParseIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Delimited text with header date,INST,GLOT,SIGMA. SIGMA values above 1
// are read as percentages.
WeatherParse parse_weather_csv(std::string_view text);

// 6-significant-digit rendering used by every report writer.
std::string format_number(double v);

}  // namespace monometry::io
