#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

#include "monometry/errors.hpp"

namespace monometry::geometry {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Tolerances shared by the geometric identities: kDegenerateTol guards
// near-singular configurations (parallel ray, colinear edge rays),
// kGeometryTol is the accuracy expected of the identities themselves.
inline constexpr double kDegenerateTol = 1e-12;
inline constexpr double kGeometryTol = 1e-9;

// Camera intrinsics plus installation pose. The world frame puts the
// optical center at the origin with y up; the water surface is the plane
// {y = -height_m}. Positive pitch_rad tilts the view down toward the water.
struct CameraRig {
  double focal_mm = 0;
  double sensor_w_mm = 0;
  double sensor_h_mm = 0;
  int image_w_px = 0;
  int image_h_px = 0;
  double height_m = 0;
  double pitch_rad = 0;

  // Throws InvalidArgument naming the offending field. The intrinsic
  // check covers the projection formulas alone; the full check also
  // requires a usable pose (positive height, pitch in (0, pi/2)).
  void validate_intrinsics() const;
  void validate() const;
};

// Axis-aligned bounding box in (fractional) pixel coordinates.
struct PixelBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;
  std::optional<int> class_id;
  std::optional<double> confidence;

  static PixelBox checked(double x_min, double y_min, double x_max, double y_max,
                          std::optional<int> class_id = std::nullopt,
                          std::optional<double> confidence = std::nullopt);

  // Throws InvalidBox unless x_min < x_max, y_min < y_max and all
  // coordinates are finite (and confidence, when present, is in [0,1]).
  void validate() const;

  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::Zero();  // unit length
};

// Implicit plane: every point x satisfies normal . x + offset = 0.
struct Plane {
  Vec3 normal = Vec3::Zero();  // unit length
  double offset = 0;
};

enum class Stage { raw, shape_corrected, dim_corrected };

// Recovered physical size of one object. Dimensions are centimetres; the
// ground point stays in metres (world frame).
struct SizeEstimate {
  double dim_x_cm = 0;
  double dim_y_cm = 0;
  Vec3 ground_point = Vec3::Zero();
  Stage stage = Stage::raw;
};

// Axis-aligned object footprint used by the forward oracle: an object of
// lateral extent dim_x_cm and vertical extent dim_y_cm whose center sits on
// the water plane at (center_x_m, -height_m, center_z_m).
struct GroundRect {
  double center_x_m = 0;
  double center_z_m = 0;
  double dim_x_cm = 0;
  double dim_y_cm = 0;
};

struct SensitivityReport {
  double s_width_cm = 0;
  double s_height_cm = 0;
  int boxes_used = 0;
  int boxes_skipped = 0;
};

// Effective focal lengths in pixels: f_x = W.f/w_s, f_y = H.f/h_s.
std::pair<double, double> focal_pixels(const CameraRig& rig);

// Unit direction of the ray through a pixel, in the camera frame
// (optical axis along -z, image up along +y).
Vec3 pixel_ray_local(const CameraRig& rig, double x_pix, double y_pix);

// Rotation about the x-axis: [[1,0,0],[0,cos,-sin],[0,sin,cos]].
Mat3 pitch_rotation(double phi);

// Ray through a pixel in world coordinates. Origin is the optical center
// (world origin); positive rig pitch turns the ray toward the water.
Ray pixel_ray_world(const CameraRig& rig, double x_pix, double y_pix);

// Plane through p0 spanned by v1 and v2. Throws DegenerateVectors when the
// vectors are colinear (cross-product norm <= 1e-12).
Plane plane_from_point_vectors(const Vec3& p0, const Vec3& v1, const Vec3& v2);

// Forward intersection point. Throws ParallelRay when |n.v| <= 1e-12 and
// BehindCamera when the hit parameter is negative.
Vec3 ray_plane_intersection(const Ray& ray, const Plane& plane);

// Unsigned distance |n.p + d|.
double point_plane_distance(const Vec3& p, const Plane& plane);

// The water plane {y = -height_m} of a rig.
Plane ground_plane(const CameraRig& rig);

// Lifts a bounding box to the four edge planes, anchors the object at the
// central ray's water-plane hit, and sums point-plane distances into
// physical width/height. Geometric failures carry the offending box in the
// message.
SizeEstimate estimate_size(const CameraRig& rig, const PixelBox& box);

// Inverse-model oracle: the pixel box a perfect detector would draw around
// an object of the given dimensions centred at the rectangle's ground
// point, i.e. the box whose four edge planes sit at the prescribed
// distances from that point. estimate_size recovers the dimensions of this
// box exactly. Throws OutOfView when the box leaves the image or the
// object cannot be enclosed from the camera position.
PixelBox project_to_box(const CameraRig& rig, const GroundRect& rect);

// Mean absolute change of the estimated size under a one-pixel shift of
// the whole box, averaged over boxes and directions (left/right for width,
// top/bottom for height). Boxes whose shifted variant leaves the image or
// fails geometrically are skipped and counted.
SensitivityReport pixel_sensitivity(const CameraRig& rig,
                                    const std::vector<PixelBox>& boxes,
                                    double shift_px = 1.0);

}  // namespace monometry::geometry
