// Command-line front end: composes the library into the batch workflows
// (size estimation, regression correction, detector evaluation, leak-free
// splitting, sensitivity, weather day selection). All randomness is
// seeded; reruns with identical inputs produce byte-identical outputs.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "monometry/correction.hpp"
#include "monometry/evaluation.hpp"
#include "monometry/geometry.hpp"
#include "monometry/io.hpp"
#include "monometry/leakage.hpp"

namespace fs = std::filesystem;
using namespace monometry;

namespace {

int log_level() {
  const char* env = std::getenv("MONOMETRY_LOG");
  if (!env) return 0;
  const std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[monometry] " << msg << "\n";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << content;
}

// *.txt files in sorted order, so batch outputs are reproducible.
std::vector<fs::path> label_files(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw InvalidArgument(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

geometry::CameraRig load_rig(const fs::path& path) {
  const io::RigParse parsed = io::parse_rig(read_file(path));
  if (!parsed.ok()) {
    std::string msg = "invalid rig file " + path.string() + ":";
    for (const auto& issue : parsed.issues)
      msg += "\n  " + issue.locus + ": " + issue.reason;
    throw InvalidArgument(msg);
  }
  return *parsed.rig;
}

// Per-item disposition log; every skipped item carries a reason.
struct SkipLog {
  std::string csv = "item,locus,disposition,reason\n";
  int skipped = 0;

  void skip(const std::string& item, const std::string& locus, const std::string& reason) {
    csv += item + "," + locus + ",skipped,\"" + reason + "\"\n";
    ++skipped;
  }
  void note(const std::string& item, const std::string& locus, const std::string& reason) {
    csv += item + "," + locus + ",processed,\"" + reason + "\"\n";
  }
};

std::string issue_locus(const io::ParseIssue& issue) {
  return issue.line > 0 ? issue.locus + " (line " + std::to_string(issue.line) + ")"
                        : issue.locus;
}

// ---------------------------------------------------------------------
// size: label directory -> per-box physical dimensions

int cmd_size(const fs::path& labels_dir, const fs::path& rig_path, const fs::path& out) {
  const geometry::CameraRig rig = load_rig(rig_path);
  SkipLog skips;
  std::vector<io::SizeRow> rows;

  for (const fs::path& file : label_files(labels_dir)) {
    const std::string image_id = file.stem().string();
    log_info("sizing " + image_id);
    const io::LabelParse parsed =
        io::parse_labels(read_file(file), rig.image_w_px, rig.image_h_px, false);
    for (const auto& issue : parsed.issues)
      skips.skip(image_id, issue_locus(issue), issue.reason);
    for (const auto& pb : parsed.boxes) {
      if (pb.clamped)
        skips.note(image_id, "line " + std::to_string(pb.line), "box clamped to image bounds");
      try {
        const geometry::SizeEstimate est = geometry::estimate_size(rig, pb.box);
        rows.push_back({image_id, pb.box.class_id.value_or(-1), est.dim_x_cm,
                        est.dim_y_cm, est.ground_point.norm()});
      } catch (const Error& e) {
        skips.skip(image_id, "line " + std::to_string(pb.line), e.what());
      }
    }
  }

  write_file(out / "sizes.csv", io::write_size_csv(rows));
  write_file(out / "skips.csv", skips.csv);
  if (rows.empty()) {
    std::cerr << "size: no box could be processed (" << skips.skipped << " skipped)\n";
    return 1;
  }
  std::cout << "size: " << rows.size() << " boxes, " << skips.skipped
            << " skipped -> " << (out / "sizes.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// correct: paired predicted/reference CSVs -> per-axis models + reports

int cmd_correct(const fs::path& pred_path, const fs::path& ref_path, int degree,
                const std::string& stage_name, const fs::path& out) {
  const io::PairedParse pred = io::parse_paired_csv(read_file(pred_path));
  const io::PairedParse ref = io::parse_paired_csv(read_file(ref_path));
  for (const auto* parse : {&pred, &ref})
    if (!parse->ok()) {
      std::cerr << "correct: malformed input CSV:\n";
      for (const auto& issue : parse->issues)
        std::cerr << "  line " << issue.line << " " << issue.locus << ": "
                  << issue.reason << "\n";
      return 1;
    }

  std::map<std::string, io::PairedRow> by_id;
  for (const auto& row : pred.rows) by_id[row.object_id] = row;
  std::vector<std::string> missing;
  std::map<std::string, std::pair<io::PairedRow, io::PairedRow>> paired;
  for (const auto& row : ref.rows) {
    const auto it = by_id.find(row.object_id);
    if (it == by_id.end())
      missing.push_back(row.object_id + " (reference only)");
    else
      paired[row.object_id] = {it->second, row};
  }
  for (const auto& row : pred.rows)
    if (!paired.contains(row.object_id)) missing.push_back(row.object_id + " (predicted only)");
  if (!missing.empty()) {
    std::string msg = "correct: unpaired samples:";
    for (const auto& id : missing) msg += "\n  " + id;
    throw UnpairedSamples(msg);
  }

  const auto stage = stage_name == "shape" ? correction::CorrectionStage::box_shape
                                           : correction::CorrectionStage::dimension;
  // paired is keyed by object_id, so the fit is independent of input order
  std::vector<correction::PairedSample> width_samples, height_samples;
  for (const auto& [id, rows] : paired) {
    width_samples.push_back({rows.first.width_cm, rows.second.width_cm, id});
    height_samples.push_back({rows.first.height_cm, rows.second.height_cm, id});
  }

  const auto width_model =
      correction::fit(width_samples, degree, correction::Axis::width, stage);
  const auto height_model =
      correction::fit(height_samples, degree, correction::Axis::height, stage);

  auto corrected_pairs = [](const std::vector<correction::PairedSample>& samples,
                            const correction::CorrectionModel& model) {
    std::vector<correction::PairedSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
      out.push_back({correction::apply(model, s.predicted), s.reference, s.object_id});
    return out;
  };

  write_file(out / "model_width.json", io::write_model(width_model));
  write_file(out / "model_height.json", io::write_model(height_model));
  write_file(out / "report_width_before.json",
             io::write_error_report(correction::error_report(width_samples)));
  write_file(out / "report_height_before.json",
             io::write_error_report(correction::error_report(height_samples)));
  write_file(out / "report_width_after.json",
             io::write_error_report(
                 correction::error_report(corrected_pairs(width_samples, width_model))));
  write_file(out / "report_height_after.json",
             io::write_error_report(
                 correction::error_report(corrected_pairs(height_samples, height_model))));

  std::string corrected = "object_id,width_cm,height_cm,width_extrapolated,height_extrapolated\n";
  for (const auto& [id, rows] : paired) {
    const double w = correction::apply(width_model, rows.first.width_cm);
    const double h = correction::apply(height_model, rows.first.height_cm);
    corrected += id + "," + io::format_number(w) + "," + io::format_number(h) + "," +
                 (correction::extrapolates(width_model, rows.first.width_cm) ? "1" : "0") +
                 "," +
                 (correction::extrapolates(height_model, rows.first.height_cm) ? "1" : "0") +
                 "\n";
  }
  write_file(out / "corrected.csv", corrected);

  if (!width_model.monotone_on_fit_range || !height_model.monotone_on_fit_range)
    std::cerr << "correct: warning: fitted polynomial is not monotone over its "
                 "training range (see model files)\n";
  std::cout << "correct: fitted " << paired.size() << " pairs (degree " << degree
            << ", stage " << stage_name << ") -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// evaluate: detection + ground-truth directories -> metric suite

int cmd_evaluate(const fs::path& det_dir, const fs::path& gt_dir, double conf_thresh,
                 double iou_thresh, int image_w, int image_h, const fs::path& out) {
  std::set<std::string> det_ids, gt_ids;
  for (const auto& f : label_files(det_dir)) det_ids.insert(f.stem().string());
  for (const auto& f : label_files(gt_dir)) gt_ids.insert(f.stem().string());
  if (det_ids != gt_ids) {
    std::string msg = "evaluate: detection and ground-truth image sets differ:";
    for (const auto& id : det_ids)
      if (!gt_ids.contains(id)) msg += "\n  only detections: " + id;
    for (const auto& id : gt_ids)
      if (!det_ids.contains(id)) msg += "\n  only ground truth: " + id;
    throw DisjointImageSets(msg);
  }

  SkipLog skips;
  std::vector<evaluation::Detection> dets;
  std::vector<evaluation::GroundTruth> gts;
  for (const auto& id : gt_ids) {
    const io::LabelParse gt_parse =
        io::parse_labels(read_file(gt_dir / (id + ".txt")), image_w, image_h, false);
    const io::LabelParse det_parse =
        io::parse_labels(read_file(det_dir / (id + ".txt")), image_w, image_h, true);
    for (const auto& issue : gt_parse.issues)
      skips.skip(id, "gt " + issue_locus(issue), issue.reason);
    for (const auto& issue : det_parse.issues)
      skips.skip(id, "det " + issue_locus(issue), issue.reason);
    for (const auto& pb : gt_parse.boxes)
      gts.push_back({pb.box, pb.box.class_id.value_or(0), id});
    for (const auto& pb : det_parse.boxes)
      dets.push_back({pb.box, pb.box.class_id.value_or(0),
                      pb.box.confidence.value_or(0), id});
  }

  const evaluation::EvalReport report =
      evaluation::map_suite(dets, gts, conf_thresh, iou_thresh);
  write_file(out / "eval.json", io::write_eval_report(report));
  write_file(out / "skips.csv", skips.csv);
  std::cout << "evaluate: mAP@50 " << io::format_number(report.map50) << ", mAP@[.50:.95] "
            << io::format_number(report.map50_95) << ", precision "
            << io::format_number(report.precision) << ", recall "
            << io::format_number(report.recall) << " -> " << (out / "eval.json").string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// split: embeddings + annotations -> t-SNE, DBSCAN, DBCV, leak-free split

std::optional<double> trailing_number(const std::string& id) {
  size_t end = id.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(id[end - 1]))) --end;
  size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(id[begin - 1]))) --begin;
  if (begin == end) return std::nullopt;
  return std::stod(id.substr(begin, end - begin));
}

int cmd_split(const fs::path& embeddings_path, const fs::path& annotations_dir,
              const fs::path& timestamps_path, std::uint64_t seed, double perplexity,
              double learning_rate, double eps, int min_samples, int image_w,
              int image_h, const fs::path& out) {
  const io::EmbeddingsParse emb_parse = io::parse_embeddings_csv(read_file(embeddings_path));
  if (!emb_parse.ok()) {
    std::cerr << "split: malformed embeddings file:\n";
    for (const auto& issue : emb_parse.issues)
      std::cerr << "  line " << issue.line << ": " << issue.reason << "\n";
    return 1;
  }

  // timestamps: explicit file wins, else the trailing number of the id
  std::map<std::string, double> timestamps;
  if (!timestamps_path.empty()) {
    std::istringstream in(read_file(timestamps_path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || (line_no == 1 && line.rfind("image_id", 0) == 0)) continue;
      const size_t comma = line.find(',');
      if (comma == std::string::npos) {
        std::cerr << "split: timestamps line " << line_no << ": expected image_id,timestamp\n";
        return 1;
      }
      try {
        timestamps[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
      } catch (const std::exception&) {
        std::cerr << "split: timestamps line " << line_no << ": bad number\n";
        return 1;
      }
    }
  }

  std::vector<leakage::ImageEmbedding> embeddings;
  for (const auto& [id, visual] : emb_parse.rows) {
    double ts = 0;
    if (const auto it = timestamps.find(id); it != timestamps.end()) {
      ts = it->second;
    } else if (const auto derived = trailing_number(id)) {
      ts = *derived;
    } else {
      std::cerr << "split: no timestamp for image " << id
                << " (provide --timestamps or number the image ids)\n";
      return 1;
    }
    std::vector<evaluation::GroundTruth> annos;
    const fs::path label_file = annotations_dir / (id + ".txt");
    if (fs::exists(label_file)) {
      const io::LabelParse parsed =
          io::parse_labels(read_file(label_file), image_w, image_h, false);
      for (const auto& pb : parsed.boxes)
        annos.push_back({pb.box, pb.box.class_id.value_or(0), id});
    }
    embeddings.push_back(leakage::build_embedding(id, visual, annos, ts));
  }
  leakage::standardize_embeddings(embeddings);

  log_info("running t-SNE on " + std::to_string(embeddings.size()) + " images");
  leakage::TsneParams params;
  params.perplexity = perplexity;
  params.learning_rate = learning_rate;
  params.seed = seed;
  const std::vector<leakage::Reduced2D> reduced = leakage::tsne(embeddings, params);

  const std::vector<int> labels = leakage::dbscan(reduced, eps, min_samples);
  std::map<std::string, int> label_map;
  for (size_t i = 0; i < reduced.size(); ++i) label_map[reduced[i].image_id] = labels[i];

  double score = 0;
  try {
    score = leakage::dbcv(reduced, labels);
  } catch (const TooFewClusters&) {
    log_info("dbcv unavailable: fewer than two clusters");
  }

  leakage::ClusterPartition partition =
      leakage::cluster_split(label_map, {0.8, 0.1, 0.1}, seed);
  partition.dbcv = score;

  // reduced coordinates, sorted by image id for stable output
  std::map<std::string, const leakage::Reduced2D*> by_id;
  for (const auto& r : reduced) by_id[r.image_id] = &r;
  std::string reduced_csv = "image_id,x,y\n";
  for (const auto& [id, r] : by_id)
    reduced_csv += id + "," + io::format_number(r->x) + "," + io::format_number(r->y) + "\n";
  write_file(out / "reduced.csv", reduced_csv);
  write_file(out / "partition.csv", io::write_partition_csv(partition));
  write_file(out / "summary.json", io::write_partition_summary(partition));

  std::string lists[3];
  for (const auto& [id, subset] : partition.split)
    lists[static_cast<int>(subset)] += id + "\n";
  write_file(out / "train.txt", lists[0]);
  write_file(out / "val.txt", lists[1]);
  write_file(out / "test.txt", lists[2]);

  std::cout << "split: " << embeddings.size() << " images, dbcv "
            << io::format_number(score) << ", fractions "
            << io::format_number(partition.achieved_fractions[0]) << "/"
            << io::format_number(partition.achieved_fractions[1]) << "/"
            << io::format_number(partition.achieved_fractions[2]) << " -> "
            << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// sensitivity: labels + rig -> per-pixel sensitivity report

int cmd_sensitivity(const fs::path& labels_dir, const fs::path& rig_path,
                    double shift_px, const fs::path& out) {
  const geometry::CameraRig rig = load_rig(rig_path);
  SkipLog skips;
  std::vector<geometry::PixelBox> boxes;
  for (const fs::path& file : label_files(labels_dir)) {
    const std::string image_id = file.stem().string();
    const io::LabelParse parsed =
        io::parse_labels(read_file(file), rig.image_w_px, rig.image_h_px, false);
    for (const auto& issue : parsed.issues)
      skips.skip(image_id, issue_locus(issue), issue.reason);
    for (const auto& pb : parsed.boxes) boxes.push_back(pb.box);
  }
  if (boxes.empty()) {
    std::cerr << "sensitivity: no usable boxes\n";
    return 1;
  }

  const geometry::SensitivityReport report =
      geometry::pixel_sensitivity(rig, boxes, shift_px);
  std::ostringstream os;
  os << "{\n";
  os << "  \"s_width_cm\": " << io::format_number(report.s_width_cm) << ",\n";
  os << "  \"s_height_cm\": " << io::format_number(report.s_height_cm) << ",\n";
  os << "  \"boxes_used\": " << report.boxes_used << ",\n";
  os << "  \"boxes_skipped\": " << report.boxes_skipped << ",\n";
  os << "  \"shift_px\": " << io::format_number(shift_px) << "\n";
  os << "}\n";
  if (!out.empty()) {
    write_file(out / "sensitivity.json", os.str());
    write_file(out / "skips.csv", skips.csv);
  }
  std::cout << "sensitivity: S_width " << io::format_number(report.s_width_cm)
            << " cm, S_height " << io::format_number(report.s_height_cm) << " cm ("
            << report.boxes_used << " boxes, " << report.boxes_skipped << " skipped)\n";
  return 0;
}

// ---------------------------------------------------------------------
// select-days: weather CSV -> cloudiest and sunniest dates

int cmd_select_days(const fs::path& weather_path, const fs::path& out) {
  const io::WeatherParse parsed = io::parse_weather_csv(read_file(weather_path));
  if (!parsed.ok()) {
    std::cerr << "select-days: malformed weather file:\n";
    for (const auto& issue : parsed.issues)
      std::cerr << "  line " << issue.line << " " << issue.locus << ": " << issue.reason
                << "\n";
    return 1;
  }
  const auto [cloudiest, sunniest] = leakage::select_extreme_days(parsed.records);
  if (!out.empty()) {
    std::ostringstream os;
    os << "{\n  \"cloudiest\": \"" << cloudiest.date << "\",\n  \"sunniest\": \""
       << sunniest.date << "\"\n}\n";
    write_file(out / "days.json", os.str());
  }
  std::cout << "cloudiest=" << cloudiest.date << " sunniest=" << sunniest.date << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monometry: monocular river-debris metrology toolkit"};
  app.require_subcommand(1);

  std::string labels_dir, rig_path, out_dir, pred_path, ref_path, det_dir, gt_dir;
  std::string embeddings_path, annotations_dir, timestamps_path, weather_path;
  std::string stage = "dimension";
  int degree = 2;
  double conf_thresh = 0.25;
  double iou_thresh = 0.5;
  int image_w = 1280, image_h = 720;
  std::uint64_t seed = 0;
  double perplexity = 30.0, learning_rate = 200.0, eps = 5.0, shift_px = 1.0;
  int min_samples = 10;

  auto* size_cmd = app.add_subcommand("size", "estimate physical object dimensions");
  size_cmd->add_option("--labels", labels_dir, "directory of YOLO label files")->required();
  size_cmd->add_option("--rig", rig_path, "camera rig configuration")->required();
  size_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* correct_cmd = app.add_subcommand("correct", "fit a regression correction");
  correct_cmd->add_option("--pred", pred_path, "predicted dimensions CSV")->required();
  correct_cmd->add_option("--ref", ref_path, "reference dimensions CSV")->required();
  correct_cmd->add_option("--degree", degree, "polynomial degree (1 or 2)")
      ->check(CLI::Range(1, 2));
  correct_cmd->add_option("--stage", stage, "correction stage: shape or dimension")
      ->check(CLI::IsMember({"shape", "dimension"}));
  correct_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "detector metric suite");
  eval_cmd->add_option("--det", det_dir, "detections directory (6-field labels)")->required();
  eval_cmd->add_option("--gt", gt_dir, "ground-truth directory (5-field labels)")->required();
  eval_cmd->add_option("--conf-thresh", conf_thresh, "confidence cut for precision/recall");
  eval_cmd->add_option("--iou", iou_thresh, "IoU threshold for scalar metrics");
  eval_cmd->add_option("--image-w", image_w, "image width in pixels");
  eval_cmd->add_option("--image-h", image_h, "image height in pixels");
  eval_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* split_cmd = app.add_subcommand("split", "leak-free dataset split");
  split_cmd->add_option("--embeddings", embeddings_path, "image_id + 256 visual features CSV")
      ->required();
  split_cmd->add_option("--annotations", annotations_dir, "ground-truth label directory")
      ->required();
  split_cmd->add_option("--timestamps", timestamps_path, "image_id,timestamp CSV");
  split_cmd->add_option("--seed", seed, "random seed")->required();
  split_cmd->add_option("--perplexity", perplexity, "t-SNE perplexity");
  split_cmd->add_option("--learning-rate", learning_rate, "t-SNE learning rate");
  split_cmd->add_option("--eps", eps, "DBSCAN epsilon");
  split_cmd->add_option("--min-samples", min_samples, "DBSCAN minimum samples");
  split_cmd->add_option("--image-w", image_w, "image width in pixels");
  split_cmd->add_option("--image-h", image_h, "image height in pixels");
  split_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* sens_cmd = app.add_subcommand("sensitivity", "per-pixel sensitivity of the sizes");
  sens_cmd->add_option("--labels", labels_dir, "directory of YOLO label files")->required();
  sens_cmd->add_option("--rig", rig_path, "camera rig configuration")->required();
  sens_cmd->add_option("--shift", shift_px, "shift magnitude in pixels");
  sens_cmd->add_option("--out", out_dir, "output directory");

  auto* days_cmd = app.add_subcommand("select-days", "extreme weather day selection");
  days_cmd->add_option("--weather", weather_path, "CSV with date,INST,GLOT,SIGMA")->required();
  days_cmd->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (size_cmd->parsed()) return cmd_size(labels_dir, rig_path, out_dir);
    if (correct_cmd->parsed())
      return cmd_correct(pred_path, ref_path, degree, stage, out_dir);
    if (eval_cmd->parsed())
      return cmd_evaluate(det_dir, gt_dir, conf_thresh, iou_thresh, image_w, image_h,
                          out_dir);
    if (split_cmd->parsed())
      return cmd_split(embeddings_path, annotations_dir, timestamps_path, seed,
                       perplexity, learning_rate, eps, min_samples, image_w, image_h,
                       out_dir);
    if (sens_cmd->parsed())
      return cmd_sensitivity(labels_dir, rig_path, shift_px, out_dir);
    if (days_cmd->parsed()) return cmd_select_days(weather_path, out_dir);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "monometry: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
