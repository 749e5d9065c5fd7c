#include "monometry/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace monometry::evaluation {

namespace {

// Detection indices in descending confidence order, ties by input order.
std::vector<int> confidence_order(const std::vector<Detection>& dets) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return dets[a].confidence > dets[b].confidence;
  });
  return order;
}

// Greedy matching over a detection order. same_class restricts candidates
// to the detection's class (metric matching); when false any class may be
// claimed (confusion-matrix matching).
std::vector<Match> greedy_match(const std::vector<Detection>& dets,
                                const std::vector<GroundTruth>& gts,
                                const std::vector<int>& order,
                                double iou_thresh, bool same_class) {
  std::vector<bool> taken(gts.size(), false);
  std::vector<Match> result;
  result.reserve(order.size());
  for (int di : order) {
    Match m;
    m.detection_index = di;
    double best = -1;
    int best_gt = -1;
    for (int gi = 0; gi < static_cast<int>(gts.size()); ++gi) {
      if (taken[gi]) continue;
      if (gts[gi].image_id != dets[di].image_id) continue;
      if (same_class && gts[gi].class_id != dets[di].class_id) continue;
      const double overlap = iou(dets[di].box, gts[gi].box);
      if (overlap >= iou_thresh && overlap > best) {
        best = overlap;
        best_gt = gi;
      }
    }
    if (best_gt >= 0) {
      taken[best_gt] = true;
      m.gt_index = best_gt;
    }
    result.push_back(m);
  }
  return result;
}

int infer_num_classes(const std::vector<Detection>& dets,
                      const std::vector<GroundTruth>& gts) {
  int max_id = -1;
  for (const auto& d : dets) {
    if (d.class_id < 0) throw InvalidArgument("evaluation: negative class id");
    max_id = std::max(max_id, d.class_id);
  }
  for (const auto& g : gts) {
    if (g.class_id < 0) throw InvalidArgument("evaluation: negative class id");
    max_id = std::max(max_id, g.class_id);
  }
  return max_id + 1;
}

}  // namespace

double iou(const geometry::PixelBox& a, const geometry::PixelBox& b) {
  a.validate();
  b.validate();
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.width() * a.height() + b.width() * b.height() - inter;
  return inter / uni;
}

std::vector<Match> match_detections(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruth>& gts,
                                    double iou_thresh) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (dets[a].image_id != dets[b].image_id)
      return dets[a].image_id < dets[b].image_id;
    return dets[a].confidence > dets[b].confidence;
  });
  return greedy_match(dets, gts, order, iou_thresh, /*same_class=*/true);
}

std::vector<PrPoint> pr_curve(const std::vector<Detection>& dets,
                              const std::vector<GroundTruth>& gts, int class_id,
                              double iou_thresh) {
  std::vector<Detection> class_dets;
  for (const auto& d : dets)
    if (d.class_id == class_id) class_dets.push_back(d);
  int n_gt = 0;
  for (const auto& g : gts)
    if (g.class_id == class_id) ++n_gt;
  if (n_gt == 0)
    throw NoGroundTruth("pr_curve: no ground truth for class " +
                        std::to_string(class_id));

  const std::vector<int> order = confidence_order(class_dets);
  const std::vector<Match> matches =
      greedy_match(class_dets, gts, order, iou_thresh, /*same_class=*/true);

  std::vector<PrPoint> points;
  points.reserve(matches.size());
  int tp = 0, fp = 0;
  for (const Match& m : matches) {
    (m.gt_index ? tp : fp)++;
    PrPoint p;
    p.recall = static_cast<double>(tp) / n_gt;
    p.precision = static_cast<double>(tp) / (tp + fp);
    p.confidence = class_dets[m.detection_index].confidence;
    points.push_back(p);
  }
  return points;
}

double average_precision(const std::vector<Detection>& dets,
                         const std::vector<GroundTruth>& gts, int class_id,
                         double iou_thresh) {
  const std::vector<PrPoint> points = pr_curve(dets, gts, class_id, iou_thresh);
  // 101-point interpolation: mean over the recall grid 0.00..1.00 of the
  // best precision achieved at recall >= grid point.
  double ap = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double best = 0;
    for (const PrPoint& p : points)
      if (p.recall >= r - 1e-12) best = std::max(best, p.precision);
    ap += best;
  }
  return ap / 101.0;
}

EvalReport map_suite(const std::vector<Detection>& dets,
                     const std::vector<GroundTruth>& gts, double conf_thresh,
                     double scalar_iou) {
  if (gts.empty()) throw EmptyGroundTruth("map_suite: no ground truth");

  EvalReport rep;
  rep.num_classes = infer_num_classes(dets, gts);
  rep.confidence_threshold = conf_thresh;

  std::map<int, int> gt_counts;
  for (const auto& g : gts) gt_counts[g.class_id]++;

  // mAP@50 and mAP@[.50:.95]; classes absent from the ground truth are
  // excluded from the means.
  double map5095 = 0;
  for (int k = 0; k < 10; ++k) {
    const double thresh = 0.50 + 0.05 * k;
    double sum = 0;
    for (const auto& [cls, count] : gt_counts) {
      const double ap = average_precision(dets, gts, cls, thresh);
      sum += ap;
      if (k == 0) rep.per_class_ap50[cls] = ap;
    }
    const double map_t = sum / static_cast<double>(gt_counts.size());
    if (k == 0) rep.map50 = map_t;
    map5095 += map_t;
  }
  rep.map50_95 = map5095 / 10.0;

  // Scalar precision/recall over detections above the confidence
  // threshold.
  std::vector<Detection> kept;
  for (const auto& d : dets)
    if (d.confidence >= conf_thresh) kept.push_back(d);
  const std::vector<Match> matches = match_detections(kept, gts, scalar_iou);
  int tp = 0;
  for (const Match& m : matches)
    if (m.gt_index) ++tp;
  const int fp = static_cast<int>(kept.size()) - tp;
  const int fn = static_cast<int>(gts.size()) - tp;
  rep.precision = kept.empty() ? 0.0 : static_cast<double>(tp) / (tp + fp);
  rep.recall = static_cast<double>(tp) / (tp + fn);

  // Confusion matrix: class-agnostic greedy matching so that
  // cross-class confusions land off the diagonal; unmatched detections and
  // ground truths go to the background column/row.
  const int bg = rep.num_classes;
  rep.confusion = Eigen::MatrixXd::Zero(bg + 1, bg + 1);
  const std::vector<Match> agnostic =
      greedy_match(kept, gts, confidence_order(kept), scalar_iou, /*same_class=*/false);
  std::vector<bool> gt_matched(gts.size(), false);
  for (const Match& m : agnostic) {
    const int pred = kept[m.detection_index].class_id;
    if (m.gt_index) {
      rep.confusion(pred, gts[*m.gt_index].class_id) += 1;
      gt_matched[*m.gt_index] = true;
    } else {
      rep.confusion(pred, bg) += 1;
    }
  }
  for (size_t gi = 0; gi < gts.size(); ++gi)
    if (!gt_matched[gi]) rep.confusion(bg, gts[gi].class_id) += 1;

  return rep;
}

Eigen::MatrixXd normalized_confusion(const Eigen::MatrixXd& counts) {
  Eigen::MatrixXd out = counts;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double total = out.row(r).sum();
    if (total > 0) out.row(r) /= total;
  }
  return out;
}

}  // namespace monometry::evaluation
