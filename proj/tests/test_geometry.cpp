#include <doctest.h>

#include <cmath>
#include <random>

#include "monometry/geometry.hpp"
#include "oracles.hpp"

using namespace monometry;
using namespace monometry::geometry;

namespace {

CameraRig demo_rig() {
  CameraRig rig;
  rig.focal_mm = 4.0;
  rig.sensor_w_mm = 6.4;
  rig.sensor_h_mm = 3.6;
  rig.image_w_px = 1280;
  rig.image_h_px = 720;
  rig.height_m = 5.0;
  rig.pitch_rad = 0.5;
  return rig;
}

CameraRig random_rig(std::mt19937_64& rng) {
  CameraRig rig;
  rig.focal_mm = oracles::uniform(rng, 2.0, 12.0);
  rig.sensor_w_mm = oracles::uniform(rng, 4.0, 10.0);
  rig.sensor_h_mm = oracles::uniform(rng, 3.0, 8.0);
  rig.image_w_px = 640 + static_cast<int>(oracles::uniform(rng, 0, 1920));
  rig.image_h_px = 480 + static_cast<int>(oracles::uniform(rng, 0, 1080));
  rig.height_m = oracles::uniform(rng, 1.0, 10.0);
  rig.pitch_rad = oracles::uniform(rng, 5.0, 80.0) * M_PI / 180.0;
  return rig;
}

// a rectangle placed on the central view line, shrunk until it fits the image
GroundRect visible_rect(const CameraRig& rig, std::mt19937_64& rng) {
  GroundRect rect;
  const double central_range = rig.height_m / std::tan(rig.pitch_rad);
  rect.center_x_m = 0;
  rect.center_z_m = -central_range * oracles::uniform(rng, 0.9, 1.5);
  rect.dim_x_cm = oracles::uniform(rng, 5.0, 200.0);
  rect.dim_y_cm = oracles::uniform(rng, 5.0, 200.0);
  return rect;
}

}  // namespace

TEST_CASE("focal lengths convert optics to pixels") {
  CameraRig rig = demo_rig();
  const auto [fx, fy] = focal_pixels(rig);
  CHECK(fx == doctest::Approx(800.0).epsilon(1e-12));
  CHECK(fy == doctest::Approx(800.0).epsilon(1e-12));

  rig.focal_mm = 2.8;
  rig.sensor_w_mm = 5.37;
  rig.image_w_px = 2048;
  const auto [fx2, fy2] = focal_pixels(rig);
  const long double expected = 2048.0L * 2.8L / 5.37L;
  CHECK(fx2 == doctest::Approx(static_cast<double>(expected)).epsilon(1e-9));
  (void)fy2;
}

TEST_CASE("focal lengths reject broken rigs") {
  CameraRig rig = demo_rig();
  rig.focal_mm = 0;
  CHECK_THROWS_AS(focal_pixels(rig), InvalidArgument);
  rig = demo_rig();
  rig.image_w_px = 1;
  CHECK_THROWS_AS(focal_pixels(rig), InvalidArgument);
}

TEST_CASE("pixel rays in the camera frame") {
  CameraRig rig = demo_rig();
  const double cx = (rig.image_w_px - 1) / 2.0;
  const double cy = (rig.image_h_px - 1) / 2.0;

  SUBCASE("center pixel looks along the optical axis") {
    const Vec3 v = pixel_ray_local(rig, cx, cy);
    CHECK(v.x() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v.y() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v.z() == doctest::Approx(-1.0).epsilon(1e-15));
  }

  SUBCASE("one focal length to the right gives a 45 degree ray") {
    const Vec3 v = pixel_ray_local(rig, cx + 800.0, cy);
    CHECK(v.x() == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
    CHECK(v.y() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v.z() == doctest::Approx(-std::sqrt(2.0) / 2).epsilon(1e-12));
  }

  SUBCASE("top-left corner, square sensor") {
    CameraRig square = demo_rig();
    square.image_w_px = 1281;
    square.image_h_px = 1281;
    square.sensor_w_mm = 1281.0 * square.focal_mm / 800.0;  // f_x = f_y = 800
    square.sensor_h_mm = square.sensor_w_mm;
    const Vec3 v = pixel_ray_local(square, 0.0, 0.0);
    // oracle: normalize(-640/800, 640/800, -1) in extended precision
    const long double nx = -0.8L, ny = 0.8L, nz = -1.0L;
    const long double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
    CHECK(v.x() == doctest::Approx(static_cast<double>(nx / norm)).epsilon(1e-12));
    CHECK(v.y() == doctest::Approx(static_cast<double>(ny / norm)).epsilon(1e-12));
    CHECK(v.z() == doctest::Approx(static_cast<double>(nz / norm)).epsilon(1e-12));
  }
}

TEST_CASE("pitch rotation matrix") {
  CHECK((pitch_rotation(0.0) - Mat3::Identity()).norm() == doctest::Approx(0.0));

  const Vec3 quarter = pitch_rotation(M_PI / 2) * Vec3(0, 0, -1);
  CHECK(quarter.isApprox(Vec3(0, 1, 0), 1e-12));

  const Vec3 swung = pitch_rotation(0.3) * Vec3(0, 1, 0);
  CHECK(swung.isApprox(Vec3(0, std::cos(0.3), std::sin(0.3)), 1e-12));

  std::mt19937_64 rng(42);
  for (int i = 0; i < 100; ++i) {
    const double phi = oracles::uniform(rng, -10.0, 10.0);
    const Mat3 r = pitch_rotation(phi);
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("world rays") {
  SUBCASE("zero pitch keeps the optical axis") {
    CameraRig rig = demo_rig();
    rig.pitch_rad = 0.0;
    const Ray ray = pixel_ray_world(rig, (rig.image_w_px - 1) / 2.0,
                                    (rig.image_h_px - 1) / 2.0);
    CHECK(ray.origin.isZero(0.0));
    CHECK(ray.direction.isApprox(Vec3(0, 0, -1), 1e-12));
  }

  SUBCASE("directions are unit length for arbitrary pixels and pitches") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      CameraRig rig = random_rig(rng);
      const double x = oracles::uniform(rng, 0, rig.image_w_px - 1);
      const double y = oracles::uniform(rng, 0, rig.image_h_px - 1);
      CHECK(std::abs(pixel_ray_world(rig, x, y).direction.norm() - 1.0) < 1e-9);
    }
  }

  SUBCASE("pitched ray matches the matrix-vector oracle and descends") {
    CameraRig rig = demo_rig();
    rig.image_h_px = 721;
    rig.sensor_h_mm = 721.0 * rig.focal_mm / 800.0;  // f_y = 800
    rig.pitch_rad = 0.5;
    const Ray ray = pixel_ray_world(rig, (rig.image_w_px - 1) / 2.0, 0.0);
    // positive rig pitch tilts the view cone down, so the world direction
    // is the -0.5 x-rotation of the local ray
    const Vec3 local = Vec3(0, 360.0 / 800.0, -1).normalized();
    const Vec3 expected = pitch_rotation(-0.5) * local;
    CHECK(ray.direction.isApprox(expected, 1e-12));
    // the central pixel column below the top edge must descend toward water
    const Ray center = pixel_ray_world(rig, (rig.image_w_px - 1) / 2.0,
                                       (rig.image_h_px - 1) / 2.0);
    CHECK(center.direction.y() < 0);
  }
}

TEST_CASE("plane construction") {
  const Plane canonical = plane_from_point_vectors(Vec3(0, 0, 0), Vec3(1, 0, 0),
                                                   Vec3(0, 1, 0));
  CHECK(canonical.normal.isApprox(Vec3(0, 0, 1), 1e-15));
  CHECK(canonical.offset == doctest::Approx(0.0));

  const Plane offset = plane_from_point_vectors(Vec3(0, 0, -5), Vec3(1, 0, 0),
                                                Vec3(0, 1, 0));
  CHECK(offset.normal.isApprox(Vec3(0, 0, 1), 1e-15));
  CHECK(offset.offset == doctest::Approx(5.0));

  CHECK_THROWS_AS(
      plane_from_point_vectors(Vec3(1, 2, 3), Vec3(1, 1, 0), Vec3(2, 2, 0)),
      DegenerateVectors);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p0(oracles::uniform(rng, -10, 10), oracles::uniform(rng, -10, 10),
                  oracles::uniform(rng, -10, 10));
    const Vec3 v1(oracles::uniform(rng, -5, 5), oracles::uniform(rng, -5, 5),
                  oracles::uniform(rng, -5, 5));
    const Vec3 v2(oracles::uniform(rng, -5, 5), oracles::uniform(rng, -5, 5),
                  oracles::uniform(rng, -5, 5));
    if (v1.cross(v2).norm() <= 1e-6) continue;
    const Plane plane = plane_from_point_vectors(p0, v1, v2);
    CHECK(std::abs(plane.normal.norm() - 1.0) < 1e-9);
    for (const Vec3& pt : {p0, Vec3(p0 + v1), Vec3(p0 + v2)})
      CHECK(std::abs(plane.normal.dot(pt) + plane.offset) < 1e-9);
  }
}

TEST_CASE("ray-plane intersection") {
  const Plane water{Vec3(0, 1, 0), 2.0};  // y = -2

  const Vec3 hit = ray_plane_intersection(Ray{Vec3(0, 0, 0), Vec3(0, -1, 0)}, water);
  CHECK(hit.isApprox(Vec3(0, -2, 0), 1e-12));

  CHECK_THROWS_AS(ray_plane_intersection(Ray{Vec3(0, 0, 0), Vec3(0, 0, -1)}, water),
                  ParallelRay);
  CHECK_THROWS_AS(ray_plane_intersection(Ray{Vec3(0, 0, 0), Vec3(0, 1, 0)}, water),
                  BehindCamera);

  std::mt19937_64 rng(13);
  int checked = 0;
  while (checked < 1000) {
    const Ray ray{Vec3(oracles::uniform(rng, -5, 5), oracles::uniform(rng, -5, 5),
                       oracles::uniform(rng, -5, 5)),
                  Vec3(oracles::uniform(rng, -1, 1), oracles::uniform(rng, -1, 1),
                       oracles::uniform(rng, -1, 1))
                      .normalized()};
    const Vec3 n = Vec3(oracles::uniform(rng, -1, 1), oracles::uniform(rng, -1, 1),
                        oracles::uniform(rng, -1, 1))
                       .normalized();
    const Plane plane{n, oracles::uniform(rng, -5, 5)};
    const double denom = n.dot(ray.direction);
    if (std::abs(denom) < 1e-6) continue;
    const double t = -(n.dot(ray.origin) + plane.offset) / denom;
    if (t < 0) continue;
    const Vec3 p = ray_plane_intersection(ray, plane);
    // algebraic round trip: on the plane, and on the ray at parameter t
    CHECK(std::abs(n.dot(p) + plane.offset) < 1e-9);
    CHECK((p - (ray.origin + t * ray.direction)).norm() < 1e-9);
    ++checked;
  }
}

TEST_CASE("point-plane distance") {
  const Plane ground{Vec3(0, 1, 0), 0.0};
  CHECK(point_plane_distance(Vec3(4, 0, -7), ground) == doctest::Approx(0.0));
  CHECK(point_plane_distance(Vec3(0, 3, 0), ground) == doctest::Approx(3.0));

  // independent oracle: coarse-to-fine grid minimization over plane points
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 n = Vec3(oracles::uniform(rng, -1, 1), oracles::uniform(rng, -1, 1),
                        oracles::uniform(rng, -1, 1))
                       .normalized();
    const Plane plane{n, oracles::uniform(rng, -3, 3)};
    const Vec3 p(oracles::uniform(rng, -4, 4), oracles::uniform(rng, -4, 4),
                 oracles::uniform(rng, -4, 4));

    Vec3 e1 = n.cross(std::abs(n.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0)).normalized();
    Vec3 e2 = n.cross(e1);
    Vec3 anchor = -plane.offset * n;  // a point on the plane
    double best = (p - anchor).norm();
    double span = 16.0, ca = 0.0, cb = 0.0;
    for (int level = 0; level < 12; ++level) {
      double best_a = ca, best_b = cb;
      for (int ia = -20; ia <= 20; ++ia)
        for (int ib = -20; ib <= 20; ++ib) {
          const double a = ca + span * ia / 20.0;
          const double b = cb + span * ib / 20.0;
          const double d = (p - (anchor + a * e1 + b * e2)).norm();
          if (d < best) {
            best = d;
            best_a = a;
            best_b = b;
          }
        }
      ca = best_a;
      cb = best_b;
      span /= 10.0;
    }
    CHECK(point_plane_distance(p, plane) == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("size estimation recovers forward-modelled objects") {
  CameraRig rig = demo_rig();
  const double central_range = rig.height_m / std::tan(rig.pitch_rad);

  SUBCASE("flat 30x20 object on the central view line") {
    GroundRect rect{0.0, -central_range, 30.0, 20.0};
    const PixelBox box = project_to_box(rig, rect);
    const SizeEstimate est = estimate_size(rig, box);
    CHECK(est.dim_x_cm == doctest::Approx(30.0).epsilon(1e-3));
    CHECK(est.dim_y_cm == doctest::Approx(20.0).epsilon(1e-3));
    CHECK(est.stage == Stage::raw);
    // the anchor point sits on the water plane
    CHECK(std::abs(est.ground_point.y() + rig.height_m) < 1e-9);
  }

  SUBCASE("shrinking the box drives the width to zero monotonically") {
    const double cx = (rig.image_w_px - 1) / 2.0;
    double last = 1e9;
    for (double half_w : {100.0, 50.0, 20.0, 5.0, 1.0, 0.1}) {
      const PixelBox box = PixelBox::checked(cx - half_w, 300, cx + half_w, 400);
      const SizeEstimate est = estimate_size(rig, box);
      CHECK(est.dim_x_cm < last);
      last = est.dim_x_cm;
    }
    CHECK(last < 0.5);
  }

  SUBCASE("boxes above the horizon raise typed errors naming the box") {
    CameraRig shallow = demo_rig();
    shallow.pitch_rad = 0.05;  // nearly horizontal: top pixels look upward
    const PixelBox box = PixelBox::checked(10, 0, 60, 4);
    try {
      estimate_size(shallow, box);
      FAIL("expected a geometric error");
    } catch (const BehindCamera& e) {
      CHECK(std::string(e.what()).find("box [") != std::string::npos);
    } catch (const ParallelRay& e) {
      CHECK(std::string(e.what()).find("box [") != std::string::npos);
    }
  }

  SUBCASE("noiseless synthetic scenes are recovered to numerical precision") {
    std::mt19937_64 rng(23);
    int done = 0;
    while (done < 200) {
      const CameraRig r = random_rig(rng);
      const GroundRect rect = visible_rect(r, rng);
      PixelBox box;
      try {
        box = project_to_box(r, rect);
      } catch (const Error&) {
        continue;
      }
      const SizeEstimate est = estimate_size(r, box);
      CHECK(est.dim_x_cm == doctest::Approx(rect.dim_x_cm).epsilon(1e-3));
      CHECK(est.dim_y_cm == doctest::Approx(rect.dim_y_cm).epsilon(1e-3));
      CHECK(std::abs(est.ground_point.y() + r.height_m) < 1e-9);
      ++done;
    }
  }

  SUBCASE("widening a box never shrinks the recovered dimension") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 200; ++i) {
      const CameraRig r = random_rig(rng);
      const double w = r.image_w_px - 1, h = r.image_h_px - 1;
      const double x0 = oracles::uniform(rng, 0, w * 0.6);
      const double y0 = oracles::uniform(rng, h * 0.55, h * 0.8);
      const double x1 = x0 + oracles::uniform(rng, 1, w * 0.3);
      const double y1 = y0 + oracles::uniform(rng, 1, h * 0.15);
      if (x1 > w || y1 > h) continue;
      const SizeEstimate base = estimate_size(r, PixelBox::checked(x0, y0, x1, y1));
      const double grow_x = oracles::uniform(rng, 0.5, w - x1);
      if (x1 + grow_x <= w) {
        const SizeEstimate wider =
            estimate_size(r, PixelBox::checked(x0, y0, x1 + grow_x, y1));
        CHECK(wider.dim_x_cm >= base.dim_x_cm - 1e-9);
      }
      const double grow_y = oracles::uniform(rng, 0.5, h - y1);
      if (y1 + grow_y <= h) {
        const SizeEstimate taller =
            estimate_size(r, PixelBox::checked(x0, y0, x1, y1 + grow_y));
        CHECK(taller.dim_y_cm >= base.dim_y_cm - 1e-9);
      }
    }
  }
}

TEST_CASE("forward projection") {
  CameraRig rig = demo_rig();
  const double central_range = rig.height_m / std::tan(rig.pitch_rad);

  SUBCASE("a rectangle on the camera axis projects symmetrically") {
    const PixelBox box = project_to_box(rig, {0.0, -central_range, 40.0, 25.0});
    const double cx = (rig.image_w_px - 1) / 2.0;
    CHECK(cx - box.x_min == doctest::Approx(box.x_max - cx).epsilon(1e-9));
  }

  SUBCASE("zero-area objects are rejected by the box invariant") {
    CHECK_THROWS_AS(project_to_box(rig, {0.0, -central_range, 0.0, 0.0}), InvalidBox);
  }

  SUBCASE("objects outside the field of view are reported") {
    CHECK_THROWS_AS(project_to_box(rig, {500.0, -central_range, 30.0, 20.0}),
                    OutOfView);
    CHECK_THROWS_AS(project_to_box(rig, {0.0, 100.0, 30.0, 20.0}), OutOfView);
  }

  SUBCASE("lateral translation leaves the recovered width essentially unchanged") {
    const GroundRect rect{0.0, -central_range * 1.2, 50.0, 30.0};
    const SizeEstimate base = estimate_size(rig, project_to_box(rig, rect));
    GroundRect moved = rect;
    moved.center_x_m = 1.0;
    const SizeEstimate shifted = estimate_size(rig, project_to_box(rig, moved));
    const SensitivityReport bound =
        pixel_sensitivity(rig, {project_to_box(rig, rect)});
    CHECK(std::abs(shifted.dim_x_cm - base.dim_x_cm) <
          std::max(bound.s_width_cm, 1e-6));
  }
}

TEST_CASE("per-pixel sensitivity") {
  CameraRig rig = demo_rig();
  std::vector<PixelBox> boxes;
  std::mt19937_64 rng(31);
  while (boxes.size() < 40) {
    GroundRect rect = visible_rect(rig, rng);
    rect.center_x_m = oracles::uniform(rng, -1.0, 1.0);
    try {
      boxes.push_back(project_to_box(rig, rect));
    } catch (const Error&) {
    }
  }

  SUBCASE("zero shift means zero sensitivity") {
    const SensitivityReport rep = pixel_sensitivity(rig, boxes, 0.0);
    CHECK(rep.s_width_cm == 0.0);
    CHECK(rep.s_height_cm == 0.0);
    CHECK(rep.boxes_used == static_cast<int>(boxes.size()));
  }

  SUBCASE("matches the brute-force definition") {
    const SensitivityReport rep = pixel_sensitivity(rig, boxes, 1.0);
    // independent recomputation of the average absolute one-pixel change
    double w_sum = 0, h_sum = 0;
    int used = 0;
    for (const PixelBox& box : boxes) {
      const SizeEstimate base = estimate_size(rig, box);
      double w_acc = 0, h_acc = 0;
      bool ok = true;
      const double shifts[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (const auto& s : shifts) {
        PixelBox moved = box;
        moved.x_min += s[0];
        moved.x_max += s[0];
        moved.y_min += s[1];
        moved.y_max += s[1];
        if (moved.x_min < 0 || moved.y_min < 0 || moved.x_max > rig.image_w_px - 1 ||
            moved.y_max > rig.image_h_px - 1) {
          ok = false;
          break;
        }
        const SizeEstimate est = estimate_size(rig, moved);
        if (s[0] != 0)
          w_acc += std::abs(base.dim_x_cm - est.dim_x_cm);
        else
          h_acc += std::abs(base.dim_y_cm - est.dim_y_cm);
      }
      if (ok) {
        w_sum += w_acc;
        h_sum += h_acc;
        ++used;
      }
    }
    REQUIRE(used > 0);
    CHECK(rep.s_width_cm == doctest::Approx(w_sum / (2 * used)).epsilon(1e-12));
    CHECK(rep.s_height_cm == doctest::Approx(h_sum / (2 * used)).epsilon(1e-12));
  }

  SUBCASE("boxes touching the border are skipped and counted") {
    std::vector<PixelBox> edge = boxes;
    edge.push_back(PixelBox::checked(0, 300, 40, 360));  // cannot shift left
    const SensitivityReport rep = pixel_sensitivity(rig, edge, 1.0);
    CHECK(rep.boxes_skipped == 1);
    CHECK(rep.boxes_used == static_cast<int>(boxes.size()));
  }

  SUBCASE("empty and unusable inputs raise") {
    CHECK_THROWS_AS(pixel_sensitivity(rig, {}), EmptyInput);
  }
}
