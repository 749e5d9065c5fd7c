#include "monometry/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace monometry::io {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

// strict numeric parse: the whole token must convert to a finite double
bool parse_double(std::string_view token, double& out) {
  if (token.empty() || token.size() > 63) return false;
  char buf[64];
  std::copy(token.begin(), token.end(), buf);
  buf[token.size()] = '\0';
  char* end = nullptr;
  const double v = std::strtod(buf, &end);
  if (end != buf + token.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

bool parse_int(std::string_view token, long& out) {
  if (token.empty() || token.size() > 31) return false;
  char buf[32];
  std::copy(token.begin(), token.end(), buf);
  buf[token.size()] = '\0';
  char* end = nullptr;
  out = std::strtol(buf, &end, 10);
  return end == buf + token.size();
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// RFC-style CSV quoting, applied only when needed.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// splits one CSV record honoring double-quoted fields
std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

LabelParse parse_labels(std::string_view text, int image_w, int image_h,
                        bool expect_confidence) {
  if (image_w < 2 || image_h < 2)
    throw InvalidArgument("parse_labels: image dimensions must be >= 2");

  LabelParse result;
  const auto lines = split_lines(text);
  const size_t want = expect_confidence ? 6 : 5;
  for (size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    const std::string_view line = trim(lines[li]);
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (fields.size() != want) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "line",
                               "expected " + std::to_string(want) + " fields, got " +
                                   std::to_string(fields.size())});
      continue;
    }

    long class_id = 0;
    if (!parse_int(fields[0], class_id) || class_id < 0) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "class",
                               "class id must be a non-negative integer"});
      continue;
    }
    double vals[5] = {0, 0, 0, 0, 0};
    bool numeric = true;
    for (size_t f = 1; f < fields.size(); ++f)
      if (!parse_double(fields[f], vals[f - 1])) {
        result.issues.push_back({IssueKind::malformed_line, line_no, "field " + std::to_string(f + 1),
                                 "not a finite number"});
        numeric = false;
        break;
      }
    if (!numeric) continue;

    const double cx = vals[0], cy = vals[1], w = vals[2], h = vals[3];
    if (cx < 0 || cx > 1 || cy < 0 || cy > 1) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "center",
                               "box center outside [0,1]"});
      continue;
    }
    if (w <= 0 || w > 1 || h <= 0 || h > 1) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "size",
                               "box size outside (0,1]"});
      continue;
    }
    std::optional<double> conf;
    if (expect_confidence) {
      if (vals[4] < 0 || vals[4] > 1) {
        result.issues.push_back({IssueKind::malformed_line, line_no, "confidence",
                                 "confidence outside [0,1]"});
        continue;
      }
      conf = vals[4];
    }

    // overhanging corners are an annotation artifact: clamp and flag
    double nx0 = cx - w / 2, nx1 = cx + w / 2;
    double ny0 = cy - h / 2, ny1 = cy + h / 2;
    const bool clamped = nx0 < 0 || ny0 < 0 || nx1 > 1 || ny1 > 1;
    nx0 = std::clamp(nx0, 0.0, 1.0);
    nx1 = std::clamp(nx1, 0.0, 1.0);
    ny0 = std::clamp(ny0, 0.0, 1.0);
    ny1 = std::clamp(ny1, 0.0, 1.0);

    try {
      ParsedBox pb;
      pb.box = geometry::PixelBox::checked(
          nx0 * (image_w - 1), ny0 * (image_h - 1), nx1 * (image_w - 1),
          ny1 * (image_h - 1), static_cast<int>(class_id), conf);
      pb.line = line_no;
      pb.clamped = clamped;
      result.boxes.push_back(std::move(pb));
    } catch (const InvalidBox& e) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "box", e.what()});
    }
  }
  return result;
}

std::string write_labels(const std::vector<geometry::PixelBox>& boxes,
                         int image_w, int image_h, bool with_confidence) {
  if (image_w < 2 || image_h < 2)
    throw InvalidArgument("write_labels: image dimensions must be >= 2");
  std::string out;
  for (const auto& box : boxes) {
    box.validate();
    if (!box.class_id) throw InvalidArgument("write_labels: box without class id");
    if (with_confidence && !box.confidence)
      throw InvalidArgument("write_labels: box without confidence");
    const double cx = box.center_x() / (image_w - 1);
    const double cy = box.center_y() / (image_h - 1);
    const double w = box.width() / (image_w - 1);
    const double h = box.height() / (image_h - 1);
    out += std::to_string(*box.class_id);
    for (double v : {cx, cy, w, h}) out += " " + format_full(v);
    if (with_confidence) out += " " + format_full(*box.confidence);
    out += "\n";
  }
  return out;
}

namespace {

const char* const kRigKeys[] = {"focal_mm",   "sensor_w_mm", "sensor_h_mm",
                                "image_w_px", "image_h_px",  "height_m",
                                "pitch_deg"};

}  // namespace

RigParse parse_rig(std::string_view text) {
  RigParse result;
  std::map<std::string, std::pair<std::string, int>> values;  // key -> (value, line)

  const auto lines = split_lines(text);
  for (size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    std::string_view line = trim(lines[li]);
    if (line.empty() || line.front() == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "line",
                               "expected `key = value`"});
      continue;
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (key.empty() || value.empty()) {
      result.issues.push_back({IssueKind::malformed_line, line_no, key.empty() ? "line" : key,
                               "empty key or value"});
      continue;
    }
    const bool known = std::find_if(std::begin(kRigKeys), std::end(kRigKeys),
                                    [&](const char* k) { return key == k; }) !=
                           std::end(kRigKeys) ||
                       key == "id" || key == "units";
    if (!known) {
      result.issues.push_back({IssueKind::invalid_value, line_no, key, "unknown key"});
      continue;
    }
    if (values.contains(key)) {
      result.issues.push_back({IssueKind::invalid_value, line_no, key, "duplicate key"});
      continue;
    }
    values[key] = {value, line_no};
  }

  if (auto it = values.find("id"); it != values.end()) result.id = it->second.first;
  if (auto it = values.find("units"); it != values.end()) {
    result.units = it->second.first;
    if (result.units != "metric")
      result.issues.push_back({IssueKind::invalid_value, it->second.second, "units",
                               "only `metric` is supported"});
  }

  double numbers[7] = {0, 0, 0, 0, 0, 0, 0};
  for (int k = 0; k < 7; ++k) {
    const auto it = values.find(kRigKeys[k]);
    if (it == values.end()) {
      result.issues.push_back({IssueKind::missing_key, 0, kRigKeys[k], "missing key"});
      continue;
    }
    if (!parse_double(it->second.first, numbers[k])) {
      result.issues.push_back({IssueKind::invalid_value, it->second.second, kRigKeys[k],
                               "not a finite number"});
    }
  }
  if (!result.issues.empty()) return result;

  auto invariant = [&](int k, const std::string& why) {
    result.issues.push_back(
        {IssueKind::invariant_violation, values[kRigKeys[k]].second, kRigKeys[k], why});
  };
  if (numbers[0] <= 0) invariant(0, "must be > 0");
  if (numbers[1] <= 0) invariant(1, "must be > 0");
  if (numbers[2] <= 0) invariant(2, "must be > 0");
  for (int k : {3, 4}) {
    if (numbers[k] < 2 || numbers[k] != std::floor(numbers[k]))
      invariant(k, "must be an integer >= 2");
  }
  if (numbers[5] <= 0) invariant(5, "must be > 0");
  if (numbers[6] <= 0 || numbers[6] >= 90)
    invariant(6, "must lie in (0, 90): the camera has to look down at the water");
  if (!result.issues.empty()) return result;

  geometry::CameraRig rig;
  rig.focal_mm = numbers[0];
  rig.sensor_w_mm = numbers[1];
  rig.sensor_h_mm = numbers[2];
  rig.image_w_px = static_cast<int>(numbers[3]);
  rig.image_h_px = static_cast<int>(numbers[4]);
  rig.height_m = numbers[5];
  rig.pitch_rad = numbers[6] * M_PI / 180.0;
  rig.validate();
  result.rig = rig;
  return result;
}

std::string write_rig(const geometry::CameraRig& rig, const std::string& id,
                      const std::string& units) {
  rig.validate();
  std::string out;
  out += "id = " + id + "\n";
  out += "units = " + units + "\n";
  out += "focal_mm = " + format_full(rig.focal_mm) + "\n";
  out += "sensor_w_mm = " + format_full(rig.sensor_w_mm) + "\n";
  out += "sensor_h_mm = " + format_full(rig.sensor_h_mm) + "\n";
  out += "image_w_px = " + std::to_string(rig.image_w_px) + "\n";
  out += "image_h_px = " + std::to_string(rig.image_h_px) + "\n";
  out += "height_m = " + format_full(rig.height_m) + "\n";
  out += "pitch_deg = " + format_full(rig.pitch_rad * 180.0 / M_PI) + "\n";
  return out;
}

std::string write_model(const correction::CorrectionModel& model) {
  nlohmann::json j;
  j["degree"] = model.degree;
  j["axis"] = model.axis == correction::Axis::width ? "width" : "height";
  j["stage"] = model.stage == correction::CorrectionStage::box_shape ? "box_shape"
                                                                     : "dimension";
  j["coefficients"] = std::vector<double>(
      model.coefficients.data(), model.coefficients.data() + model.coefficients.size());
  j["fit_range"] = {{"min", model.fit_min}, {"max", model.fit_max}};
  j["monotone_on_fit_range"] = model.monotone_on_fit_range;
  return j.dump(2) + "\n";
}

ModelParse parse_model(std::string_view text) {
  ModelParse result;
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    result.issues.push_back({IssueKind::malformed_line, 0, "document", "not a JSON object"});
    return result;
  }
  auto fail = [&](const std::string& key, const std::string& why) {
    result.issues.push_back({IssueKind::invalid_value, 0, key, why});
  };

  correction::CorrectionModel model;
  if (!j.contains("degree") || !j["degree"].is_number_integer())
    fail("degree", "missing or not an integer");
  else
    model.degree = j["degree"].get<int>();
  if (model.degree != 1 && model.degree != 2) fail("degree", "must be 1 or 2");

  if (!j.contains("axis") || !j["axis"].is_string())
    fail("axis", "missing or not a string");
  else if (j["axis"] == "width")
    model.axis = correction::Axis::width;
  else if (j["axis"] == "height")
    model.axis = correction::Axis::height;
  else
    fail("axis", "must be width or height");

  if (!j.contains("stage") || !j["stage"].is_string())
    fail("stage", "missing or not a string");
  else if (j["stage"] == "box_shape")
    model.stage = correction::CorrectionStage::box_shape;
  else if (j["stage"] == "dimension")
    model.stage = correction::CorrectionStage::dimension;
  else
    fail("stage", "must be box_shape or dimension");

  if (!j.contains("coefficients") || !j["coefficients"].is_array())
    fail("coefficients", "missing or not an array");
  else {
    std::vector<double> coeffs;
    for (const auto& c : j["coefficients"]) {
      if (!c.is_number()) {
        fail("coefficients", "non-numeric entry");
        break;
      }
      coeffs.push_back(c.get<double>());
    }
    if (static_cast<int>(coeffs.size()) != model.degree + 1)
      fail("coefficients", "expected degree + 1 entries");
    model.coefficients = Eigen::Map<Eigen::VectorXd>(coeffs.data(),
                                                     static_cast<Eigen::Index>(coeffs.size()));
  }

  if (!j.contains("fit_range") || !j["fit_range"].is_object() ||
      !j["fit_range"].contains("min") || !j["fit_range"].contains("max") ||
      !j["fit_range"]["min"].is_number() || !j["fit_range"]["max"].is_number()) {
    fail("fit_range", "missing min/max");
  } else {
    model.fit_min = j["fit_range"]["min"].get<double>();
    model.fit_max = j["fit_range"]["max"].get<double>();
    if (!(model.fit_min < model.fit_max))
      result.issues.push_back(
          {IssueKind::invariant_violation, 0, "fit_range", "min must be < max"});
  }

  if (j.contains("monotone_on_fit_range")) {
    if (!j["monotone_on_fit_range"].is_boolean())
      fail("monotone_on_fit_range", "not a boolean");
    else
      model.monotone_on_fit_range = j["monotone_on_fit_range"].get<bool>();
  }

  if (result.issues.empty()) result.model = std::move(model);
  return result;
}

std::string write_size_csv(const std::vector<SizeRow>& rows) {
  std::string out = "image_id,class_id,dim_x_cm,dim_y_cm,range_m\n";
  for (const auto& r : rows) {
    out += csv_field(r.image_id) + "," + std::to_string(r.class_id) + "," +
           format_number(r.dim_x_cm) + "," + format_number(r.dim_y_cm) + "," +
           format_number(r.range_m) + "\n";
  }
  return out;
}

PairedParse parse_paired_csv(std::string_view text) {
  PairedParse result;
  const auto lines = split_lines(text);
  if (lines.empty()) {
    result.issues.push_back({IssueKind::malformed_line, 0, "header", "empty file"});
    return result;
  }
  const auto header = csv_split(trim(lines[0]));
  if (header.size() != 3 || header[0] != "object_id" || header[1] != "width_cm" ||
      header[2] != "height_cm") {
    result.issues.push_back({IssueKind::malformed_line, 1, "header",
                             "expected object_id,width_cm,height_cm"});
    return result;
  }
  for (size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty()) continue;
    const auto fields = csv_split(lines[li]);
    if (fields.size() != 3) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "line",
                               "expected 3 fields"});
      continue;
    }
    PairedRow row;
    row.object_id = fields[0];
    if (row.object_id.empty()) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "object_id", "empty"});
      continue;
    }
    if (!parse_double(fields[1], row.width_cm) || row.width_cm <= 0) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "width_cm",
                               "not a positive number"});
      continue;
    }
    if (!parse_double(fields[2], row.height_cm) || row.height_cm <= 0) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "height_cm",
                               "not a positive number"});
      continue;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string write_paired_csv(const std::vector<PairedRow>& rows) {
  std::string out = "object_id,width_cm,height_cm\n";
  for (const auto& r : rows)
    out += csv_field(r.object_id) + "," + format_full(r.width_cm) + "," +
           format_full(r.height_cm) + "\n";
  return out;
}

std::string write_error_report(const correction::ErrorReport& report) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"rmse\": " << format_number(report.rmse) << ",\n";
  os << "  \"mae\": " << format_number(report.mae) << ",\n";
  os << "  \"residual_quartiles\": {\n";
  os << "    \"min\": " << format_number(report.residual_min) << ",\n";
  os << "    \"q1\": " << format_number(report.q1) << ",\n";
  os << "    \"median\": " << format_number(report.median) << ",\n";
  os << "    \"q3\": " << format_number(report.q3) << ",\n";
  os << "    \"max\": " << format_number(report.residual_max) << "\n";
  os << "  },\n";
  os << "  \"n\": " << report.n << "\n";
  os << "}\n";
  return os.str();
}

std::string write_eval_report(const evaluation::EvalReport& report) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"map50\": " << format_number(report.map50) << ",\n";
  os << "  \"map50_95\": " << format_number(report.map50_95) << ",\n";
  os << "  \"precision\": " << format_number(report.precision) << ",\n";
  os << "  \"recall\": " << format_number(report.recall) << ",\n";
  os << "  \"confidence_threshold\": " << format_number(report.confidence_threshold)
     << ",\n";
  os << "  \"num_classes\": " << report.num_classes << ",\n";
  os << "  \"per_class_ap50\": {";
  bool first = true;
  for (const auto& [cls, ap] : report.per_class_ap50) {
    os << (first ? "" : ", ") << "\"" << cls << "\": " << format_number(ap);
    first = false;
  }
  os << "},\n";
  const Eigen::MatrixXd normalized = evaluation::normalized_confusion(report.confusion);
  auto matrix = [&os](const Eigen::MatrixXd& m, const char* name, bool last) {
    os << "  \"" << name << "\": [";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      os << (r ? ", [" : "[");
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        os << (c ? ", " : "") << format_number(m(r, c));
      os << "]";
    }
    os << "]" << (last ? "\n" : ",\n");
  };
  matrix(report.confusion, "confusion_counts", false);
  matrix(normalized, "confusion_normalized", true);
  os << "}\n";
  return os.str();
}

namespace {

const char* subset_name(leakage::Subset s) {
  switch (s) {
    case leakage::Subset::train: return "train";
    case leakage::Subset::val: return "val";
    default: return "test";
  }
}

}  // namespace

std::string write_partition_csv(const leakage::ClusterPartition& partition) {
  std::string out = "image_id,cluster,subset\n";
  for (const auto& [id, cluster] : partition.labels) {
    const auto it = partition.split.find(id);
    out += csv_field(id) + "," + std::to_string(cluster) + "," +
           (it != partition.split.end() ? subset_name(it->second) : "") + "\n";
  }
  return out;
}

std::string write_partition_summary(const leakage::ClusterPartition& partition) {
  int clusters = 0, noise = 0;
  std::map<int, int> sizes;
  for (const auto& [id, cluster] : partition.labels) {
    if (cluster < 0)
      ++noise;
    else
      sizes[cluster]++;
  }
  clusters = static_cast<int>(sizes.size());
  std::ostringstream os;
  os << "{\n";
  os << "  \"images\": " << partition.labels.size() << ",\n";
  os << "  \"clusters\": " << clusters << ",\n";
  os << "  \"noise_points\": " << noise << ",\n";
  os << "  \"dbcv\": " << format_number(partition.dbcv) << ",\n";
  os << "  \"fractions\": {\"train\": " << format_number(partition.achieved_fractions[0])
     << ", \"val\": " << format_number(partition.achieved_fractions[1])
     << ", \"test\": " << format_number(partition.achieved_fractions[2]) << "}\n";
  os << "}\n";
  return os.str();
}

EmbeddingsParse parse_embeddings_csv(std::string_view text) {
  EmbeddingsParse result;
  const auto lines = split_lines(text);
  for (size_t li = 0; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty()) continue;
    const auto fields = csv_split(lines[li]);
    if (li == 0 && !fields.empty() && fields[0] == "image_id") continue;  // header
    if (fields.size() != leakage::kVisualFeatures + 1) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "line",
                               "expected image_id plus " +
                                   std::to_string(leakage::kVisualFeatures) +
                                   " feature columns"});
      continue;
    }
    if (fields[0].empty()) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "image_id", "empty"});
      continue;
    }
    Eigen::VectorXd visual(leakage::kVisualFeatures);
    bool ok = true;
    for (int k = 0; k < leakage::kVisualFeatures; ++k) {
      double v = 0;
      if (!parse_double(fields[k + 1], v)) {
        result.issues.push_back({IssueKind::malformed_line, line_no,
                                 "column " + std::to_string(k + 2), "not a finite number"});
        ok = false;
        break;
      }
      visual[k] = v;
    }
    if (ok) result.rows.emplace_back(fields[0], std::move(visual));
  }
  return result;
}

WeatherParse parse_weather_csv(std::string_view text) {
  WeatherParse result;
  const auto lines = split_lines(text);
  if (lines.empty()) {
    result.issues.push_back({IssueKind::malformed_line, 0, "header", "empty file"});
    return result;
  }
  const auto header = csv_split(trim(lines[0]));
  if (header.size() != 4 || header[0] != "date" || header[1] != "INST" ||
      header[2] != "GLOT" || header[3] != "SIGMA") {
    result.issues.push_back({IssueKind::malformed_line, 1, "header",
                             "expected date,INST,GLOT,SIGMA"});
    return result;
  }
  for (size_t li = 1; li < lines.size(); ++li) {
    const int line_no = static_cast<int>(li) + 1;
    if (trim(lines[li]).empty()) continue;
    const auto fields = csv_split(lines[li]);
    if (fields.size() != 4) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "line",
                               "expected 4 fields"});
      continue;
    }
    leakage::DayRecord rec;
    rec.date = fields[0];
    if (rec.date.empty()) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "date", "empty"});
      continue;
    }
    bool ok = true;
    const char* names[3] = {"INST", "GLOT", "SIGMA"};
    double vals[3] = {0, 0, 0};
    for (int k = 0; k < 3; ++k)
      if (!parse_double(fields[k + 1], vals[k])) {
        result.issues.push_back({IssueKind::malformed_line, line_no, names[k],
                                 "not a finite number"});
        ok = false;
        break;
      }
    if (!ok) continue;
    rec.inst = vals[0];
    rec.glot = vals[1];
    rec.sigma = vals[2];
    if (rec.sigma > 1.0 && rec.sigma <= 100.0) rec.sigma /= 100.0;  // percent input
    if (rec.sigma < 0 || rec.sigma > 1) {
      result.issues.push_back({IssueKind::malformed_line, line_no, "SIGMA",
                               "sunshine fraction outside [0,1] (or [0,100] percent)"});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace monometry::io
