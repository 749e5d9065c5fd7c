#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "monometry/errors.hpp"
#include "monometry/geometry.hpp"

namespace monometry::evaluation {

struct Detection {
  geometry::PixelBox box;
  int class_id = 0;
  double confidence = 0;
  std::string image_id;
};

struct GroundTruth {
  geometry::PixelBox box;
  int class_id = 0;
  std::string image_id;
};

// One detection's fate after matching: the index of the ground truth it
// claimed, or nothing (background / false positive).
struct Match {
  int detection_index = -1;
  std::optional<int> gt_index;
};

struct PrPoint {
  double recall = 0;
  double precision = 0;
  double confidence = 0;
};

struct EvalReport {
  std::map<int, double> per_class_ap50;
  double map50 = 0;
  double map50_95 = 0;
  double precision = 0;
  double recall = 0;
  // Raw counts, (num_classes+1)^2; row = predicted class, column = true
  // class, last row/column = background.
  Eigen::MatrixXd confusion;
  int num_classes = 0;
  double confidence_threshold = 0;
};

// Intersection over union of two boxes; 0 when disjoint.
double iou(const geometry::PixelBox& a, const geometry::PixelBox& b);

// Greedy one-to-one matching per image and class: detections in descending
// confidence order (ties by input order) claim the unmatched same-class
// ground truth of highest IoU >= iou_thresh. Results are ordered by
// image_id, then confidence, then input order.
std::vector<Match> match_detections(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruth>& gts,
                                    double iou_thresh);

// Average precision for one class via 101-point interpolation of the
// precision-recall curve. Throws NoGroundTruth when the class has no
// ground truth.
double average_precision(const std::vector<Detection>& dets,
                         const std::vector<GroundTruth>& gts, int class_id,
                         double iou_thresh);

// Raw cumulated precision/recall points for one class at one threshold,
// in descending confidence order (for F1 analyses downstream).
std::vector<PrPoint> pr_curve(const std::vector<Detection>& dets,
                              const std::vector<GroundTruth>& gts, int class_id,
                              double iou_thresh);

// Full metric suite: mAP@50, mAP@[.50:.95], scalar precision/recall over
// detections above conf_thresh matched at scalar_iou, and the confusion
// matrix with background row/column. The AP thresholds are fixed;
// scalar_iou only moves the precision/recall/confusion matching.
EvalReport map_suite(const std::vector<Detection>& dets,
                     const std::vector<GroundTruth>& gts,
                     double conf_thresh = 0.25, double scalar_iou = 0.50);

// Row-normalized view of a confusion matrix (zero rows stay zero).
Eigen::MatrixXd normalized_confusion(const Eigen::MatrixXd& counts);

}  // namespace monometry::evaluation
