#include "monometry/geometry.hpp"

#include <cmath>
#include <sstream>

namespace monometry::geometry {

namespace {

std::string describe(const PixelBox& b) {
  std::ostringstream os;
  os << "box [" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", "
     << b.y_max << "]";
  if (b.class_id) os << " class " << *b.class_id;
  return os.str();
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void CameraRig::validate_intrinsics() const {
  if (!finite(focal_mm) || focal_mm <= 0)
    throw InvalidArgument("CameraRig: focal_mm must be > 0");
  if (!finite(sensor_w_mm) || sensor_w_mm <= 0)
    throw InvalidArgument("CameraRig: sensor_w_mm must be > 0");
  if (!finite(sensor_h_mm) || sensor_h_mm <= 0)
    throw InvalidArgument("CameraRig: sensor_h_mm must be > 0");
  if (image_w_px < 2) throw InvalidArgument("CameraRig: image_w_px must be >= 2");
  if (image_h_px < 2) throw InvalidArgument("CameraRig: image_h_px must be >= 2");
  if (!finite(pitch_rad)) throw InvalidArgument("CameraRig: pitch_rad must be finite");
}

void CameraRig::validate() const {
  validate_intrinsics();
  if (!finite(height_m) || height_m <= 0)
    throw InvalidArgument("CameraRig: height_m must be > 0");
  if (pitch_rad <= 0 || pitch_rad >= M_PI / 2)
    throw InvalidArgument("CameraRig: pitch_rad must lie in (0, pi/2)");
}

PixelBox PixelBox::checked(double x_min, double y_min, double x_max, double y_max,
                           std::optional<int> class_id,
                           std::optional<double> confidence) {
  PixelBox b{x_min, y_min, x_max, y_max, class_id, confidence};
  b.validate();
  return b;
}

void PixelBox::validate() const {
  if (!finite(x_min) || !finite(y_min) || !finite(x_max) || !finite(y_max))
    throw InvalidBox("PixelBox: non-finite coordinate in " + describe(*this));
  if (!(x_min < x_max) || !(y_min < y_max))
    throw InvalidBox("PixelBox: empty extent in " + describe(*this));
  if (confidence && (!finite(*confidence) || *confidence < 0 || *confidence > 1))
    throw InvalidBox("PixelBox: confidence outside [0,1] in " + describe(*this));
}

std::pair<double, double> focal_pixels(const CameraRig& rig) {
  rig.validate_intrinsics();
  const double fx = rig.image_w_px * rig.focal_mm / rig.sensor_w_mm;
  const double fy = rig.image_h_px * rig.focal_mm / rig.sensor_h_mm;
  return {fx, fy};
}

Vec3 pixel_ray_local(const CameraRig& rig, double x_pix, double y_pix) {
  const auto [fx, fy] = focal_pixels(rig);
  const double cx = (rig.image_w_px - 1) / 2.0;
  const double cy = (rig.image_h_px - 1) / 2.0;
  // Image y grows downward; the camera frame keeps y up, hence the flip.
  const Vec3 v((x_pix - cx) / fx, (cy - y_pix) / fy, -1.0);
  return v.normalized();
}

Mat3 pitch_rotation(double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Mat3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

Ray pixel_ray_world(const CameraRig& rig, double x_pix, double y_pix) {
  // The rig stores pitch as a positive down-tilt; in the y-up world frame
  // that is a rotation by -pitch about x (it sends the optical axis
  // (0,0,-1) to (0,-sin,-cos), i.e. toward the water plane).
  const Vec3 local = pixel_ray_local(rig, x_pix, y_pix);
  const Vec3 world = pitch_rotation(-rig.pitch_rad) * local;
  return Ray{Vec3::Zero(), world.normalized()};
}

Plane plane_from_point_vectors(const Vec3& p0, const Vec3& v1, const Vec3& v2) {
  const Vec3 cross = v1.cross(v2);
  const double norm = cross.norm();
  if (norm <= kDegenerateTol)
    throw DegenerateVectors("plane_from_point_vectors: spanning vectors are colinear");
  const Vec3 n = cross / norm;
  return Plane{n, -n.dot(p0)};
}

Vec3 ray_plane_intersection(const Ray& ray, const Plane& plane) {
  const double denom = plane.normal.dot(ray.direction);
  if (std::abs(denom) <= kDegenerateTol)
    throw ParallelRay("ray_plane_intersection: ray is parallel to the plane");
  const double t = -(plane.normal.dot(ray.origin) + plane.offset) / denom;
  if (t < 0)
    throw BehindCamera("ray_plane_intersection: intersection behind the ray origin");
  return ray.origin + t * ray.direction;
}

double point_plane_distance(const Vec3& p, const Plane& plane) {
  return std::abs(plane.normal.dot(p) + plane.offset);
}

Plane ground_plane(const CameraRig& rig) {
  return Plane{Vec3(0, 1, 0), rig.height_m};
}

SizeEstimate estimate_size(const CameraRig& rig, const PixelBox& box) {
  rig.validate();
  box.validate();
  if (box.x_min < 0 || box.y_min < 0 || box.x_max > rig.image_w_px - 1 ||
      box.y_max > rig.image_h_px - 1)
    throw InvalidBox("estimate_size: " + describe(box) + " outside the image");

  const Vec3 origin = Vec3::Zero();
  const Vec3 tl = pixel_ray_world(rig, box.x_min, box.y_min).direction;
  const Vec3 tr = pixel_ray_world(rig, box.x_max, box.y_min).direction;
  const Vec3 bl = pixel_ray_world(rig, box.x_min, box.y_max).direction;
  const Vec3 br = pixel_ray_world(rig, box.x_max, box.y_max).direction;
  const Ray center = pixel_ray_world(rig, box.center_x(), box.center_y());

  try {
    const Plane top = plane_from_point_vectors(origin, tl, tr);
    const Plane bottom = plane_from_point_vectors(origin, bl, br);
    const Plane left = plane_from_point_vectors(origin, tl, bl);
    const Plane right = plane_from_point_vectors(origin, tr, br);
    const Vec3 o = ray_plane_intersection(center, ground_plane(rig));

    SizeEstimate est;
    est.dim_x_cm = 100.0 * (point_plane_distance(o, left) + point_plane_distance(o, right));
    est.dim_y_cm = 100.0 * (point_plane_distance(o, top) + point_plane_distance(o, bottom));
    est.ground_point = o;
    est.stage = Stage::raw;
    return est;
  } catch (const DegenerateVectors& e) {
    throw DegenerateVectors(std::string(e.what()) + " for " + describe(box));
  } catch (const ParallelRay& e) {
    throw ParallelRay(std::string(e.what()) + " for " + describe(box));
  } catch (const BehindCamera& e) {
    throw BehindCamera(std::string(e.what()) + " for " + describe(box));
  }
}

namespace {

// Sum of distances from the anchor point to the two planes of constant
// image offset c -/+ s, with the anchor at image offset c and depth m.
// Monotone from 0 at s=0 up to its first crossing of any target < 2m.
double spread_distance_sum(double c, double m, double s) {
  const double lo = c - s, hi = c + s;
  return m * s * (1.0 / std::sqrt(1.0 + lo * lo) + 1.0 / std::sqrt(1.0 + hi * hi));
}

// Solves spread_distance_sum(c, m, s) = extent for the smallest s >= 0.
double solve_spread(double c, double m, double extent) {
  if (extent <= 0) return 0.0;
  if (extent >= 2.0 * m)
    throw OutOfView("project_to_box: object extent exceeds twice its depth");
  double hi = 1e-6;
  while (spread_distance_sum(c, m, hi) < extent) {
    hi *= 2.0;
    if (hi > 1e12)
      throw OutOfView("project_to_box: no enclosing box exists");
  }
  double lo = hi * 0.5 < 1e-6 ? 0.0 : hi * 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (spread_distance_sum(c, m, mid) < extent)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PixelBox project_to_box(const CameraRig& rig, const GroundRect& rect) {
  rig.validate();
  if (!finite(rect.dim_x_cm) || !finite(rect.dim_y_cm) || rect.dim_x_cm < 0 ||
      rect.dim_y_cm < 0)
    throw InvalidArgument("project_to_box: dimensions must be non-negative");

  const Vec3 g_world(rect.center_x_m, -rig.height_m, rect.center_z_m);
  // camera <- world is the transpose of the rotation applied by
  // pixel_ray_world, i.e. pitch_rotation(+pitch).
  const Vec3 g = pitch_rotation(rig.pitch_rad) * g_world;
  if (g.z() >= -kDegenerateTol)
    throw OutOfView("project_to_box: ground point not in front of the camera");
  const double m = -g.z();
  const double uc = g.x() / m;
  const double vc = g.y() / m;

  const double su = solve_spread(uc, m, rect.dim_x_cm / 100.0);
  const double sv = solve_spread(vc, m, rect.dim_y_cm / 100.0);

  const auto [fx, fy] = focal_pixels(rig);
  const double cx = (rig.image_w_px - 1) / 2.0;
  const double cy = (rig.image_h_px - 1) / 2.0;
  const double x_min = cx + fx * (uc - su);
  const double x_max = cx + fx * (uc + su);
  const double y_min = cy - fy * (vc + sv);  // top edge has the larger v
  const double y_max = cy - fy * (vc - sv);

  if (x_min < 0 || y_min < 0 || x_max > rig.image_w_px - 1 ||
      y_max > rig.image_h_px - 1)
    throw OutOfView("project_to_box: projected box leaves the image");
  return PixelBox::checked(x_min, y_min, x_max, y_max);
}

SensitivityReport pixel_sensitivity(const CameraRig& rig,
                                    const std::vector<PixelBox>& boxes,
                                    double shift_px) {
  rig.validate();
  if (boxes.empty()) throw EmptyInput("pixel_sensitivity: no boxes");

  SensitivityReport report;
  double width_sum = 0, height_sum = 0;
  for (const PixelBox& box : boxes) {
    // dx, dy per direction: left, right, top, bottom
    const double dx[4] = {-shift_px, shift_px, 0, 0};
    const double dy[4] = {0, 0, -shift_px, shift_px};
    double w_acc = 0, h_acc = 0;
    bool usable = true;
    try {
      const SizeEstimate base = estimate_size(rig, box);
      for (int d = 0; d < 4 && usable; ++d) {
        PixelBox shifted = box;
        shifted.x_min += dx[d];
        shifted.x_max += dx[d];
        shifted.y_min += dy[d];
        shifted.y_max += dy[d];
        if (shifted.x_min < 0 || shifted.y_min < 0 ||
            shifted.x_max > rig.image_w_px - 1 ||
            shifted.y_max > rig.image_h_px - 1) {
          usable = false;
          break;
        }
        const SizeEstimate est = estimate_size(rig, shifted);
        if (d < 2)
          w_acc += std::abs(base.dim_x_cm - est.dim_x_cm);
        else
          h_acc += std::abs(base.dim_y_cm - est.dim_y_cm);
      }
    } catch (const Error&) {
      usable = false;
    }
    if (usable) {
      width_sum += w_acc;
      height_sum += h_acc;
      ++report.boxes_used;
    } else {
      ++report.boxes_skipped;
    }
  }
  if (report.boxes_used == 0)
    throw EmptyInput("pixel_sensitivity: no estimable boxes");
  report.s_width_cm = width_sum / (2.0 * report.boxes_used);
  report.s_height_cm = height_sum / (2.0 * report.boxes_used);
  return report;
}

}  // namespace monometry::geometry
