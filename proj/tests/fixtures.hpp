// Synthetic scene builders shared by the unit and acceptance suites.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "rs2v/geometry.hpp"
#include "rs2v/point_cloud.hpp"

namespace fixtures {

using rs2v::FrameTag;
using rs2v::Point;
using rs2v::PointCloud;
using rs2v::Vec3;

inline PointCloud vehicle_cloud(std::vector<Point> points, std::string id = "fixture") {
  PointCloud cloud;
  cloud.points = std::move(points);
  cloud.frame_tag = FrameTag::Vehicle;
  cloud.source_id = std::move(id);
  return cloud;
}

/// Points on the vertical plane x = x0, sampled on a y/z grid.
inline void add_wall_x(std::vector<Point>& out, double x0, double y_min, double y_max,
                       double z_min, double z_max, double step) {
  for (double y = y_min; y <= y_max + 1e-9; y += step) {
    for (double z = z_min; z <= z_max + 1e-9; z += step) {
      out.push_back({{x0, y, z}, 0.3});
    }
  }
}

/// Points on the vertical plane y = y0, sampled on an x/z grid.
inline void add_wall_y(std::vector<Point>& out, double y0, double x_min, double x_max,
                       double z_min, double z_max, double step) {
  for (double x = x_min; x <= x_max + 1e-9; x += step) {
    for (double z = z_min; z <= z_max + 1e-9; z += step) {
      out.push_back({{x, y0, z}, 0.3});
    }
  }
}

/// Points on the horizontal plane z = z0 covering the annulus
/// r_min <= hypot(x, y) <= r_max, sampled on a polar grid dense enough that
/// every view frustum crossing the plane in range contains samples.
inline void add_ground_polar(std::vector<Point>& out, double z0, double r_min,
                             double r_max, double radial_step, double azimuth_step_deg) {
  for (double r = r_min; r <= r_max + 1e-9; r += radial_step) {
    for (double az = 0.0; az < 360.0; az += azimuth_step_deg) {
      const double rad = rs2v::deg_to_rad(az);
      out.push_back({{r * std::cos(rad), r * std::sin(rad), z0}, 0.5});
    }
  }
}

/// Points on the plane z = z0 on a Cartesian grid over an annulus.
inline void add_ground_cartesian(std::vector<Point>& out, double z0, double r_min,
                                 double r_max, double step) {
  for (double x = -r_max; x <= r_max + 1e-9; x += step) {
    for (double y = -r_max; y <= r_max + 1e-9; y += step) {
      const double r = std::hypot(x, y);
      if (r < r_min || r > r_max) continue;
      out.push_back({{x, y, z0}, 0.5});
    }
  }
}

/// A box-shaped cluster of points (slab between z_lo and z_hi).
inline void add_box_cluster(std::vector<Point>& out, double cx, double cy, double half,
                            double z_lo, double z_hi, double step) {
  for (double x = cx - half; x <= cx + half + 1e-9; x += step) {
    for (double y = cy - half; y <= cy + half + 1e-9; y += step) {
      for (double z = z_lo; z <= z_hi + 1e-9; z += step) {
        out.push_back({{x, y, z}, 0.8});
      }
    }
  }
}

/// Adds zero-mean Gaussian displacement along a fixed axis (surface noise).
inline void add_axis_noise(std::vector<Point>& points, const Vec3& axis, double sigma,
                           unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Point& p : points) {
    p.position = p.position + axis * noise(rng);
  }
}

}  // namespace fixtures
