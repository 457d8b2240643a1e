// Virtual spinning-LiDAR resampler.
//
// Builds the ray grid, bins range-gated points into per-ray view frustums,
// fits a TLS plane inside each non-ground frustum and one global ground
// plane, intersects rays with the fitted surfaces, and merges the results
// into the synthesized output cloud.
//
// Ray (i, j) points at azimuth phi = (i/m) * 360 and polar angle
// theta = theta_min + (j/k) * (theta_max - theta_min), both degrees. A point
// bins to i = round(m * phi / 360) mod m and j = round(k * (theta -
// theta_min) / (theta_max - theta_min)) clamped to [0, k-1], which inverts
// the ray grid exactly. With frustum_expansion e > 1 a point is additionally
// assigned to every bin whose ray lies within e/2 nominal resolutions of it
// on each axis.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rs2v/errors.hpp"
#include "rs2v/geometry.hpp"
#include "rs2v/ground_segmentation.hpp"
#include "rs2v/parallel.hpp"
#include "rs2v/plane.hpp"
#include "rs2v/point_cloud.hpp"
#include "rs2v/sensor_spec.hpp"

namespace rs2v {

/// Within an expanded frustum, only points within this range window of the
/// bin's nearest point take part in the plane fit, so a frustum spanning a
/// near and a far surface fits the near one instead of a meaningless average.
inline constexpr double kOcclusionWindowMeters = 1.0;

struct Ray {
  int i = 0;
  int j = 0;
  double phi = 0.0;    ///< degrees
  double theta = 0.0;  ///< degrees
  Vec3 direction;      ///< unit vector
};

struct FrustumIndex {
  int i = 0;
  int j = 0;
  bool operator==(const FrustumIndex&) const = default;
};

/// All m*k rays ordered by (j, i); the flat index of ray (i, j) is j*m + i.
inline std::vector<Ray> build_rays(const SensorSpec& spec) {
  spec.validate();
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(spec.ray_count()));
  const double theta_span = spec.theta_max - spec.theta_min;
  for (int j = 0; j < spec.k; ++j) {
    const double theta = spec.theta_min + theta_span * j / spec.k;
    for (int i = 0; i < spec.m; ++i) {
      const double phi = 360.0 * i / spec.m;
      rays.push_back({i, j, phi, theta, direction_from_angles(phi, theta)});
    }
  }
  return rays;
}

/// Frustum indices of the point at (phi, theta) degrees.
inline FrustumIndex nominal_bin(double phi_deg, double theta_deg, const SensorSpec& spec) {
  long i = std::lround(spec.m * phi_deg / 360.0) % spec.m;
  if (i < 0) i += spec.m;
  long j = std::lround(spec.k * (theta_deg - spec.theta_min) /
                       (spec.theta_max - spec.theta_min));
  j = std::clamp<long>(j, 0, spec.k - 1);
  return {static_cast<int>(i), static_cast<int>(j)};
}

// ---------------------------------------------------------------------------
// Frustum binning
// ---------------------------------------------------------------------------

/// Per-frustum membership of one cloud's points, stored as a CSR table over
/// the m*k bins. Member indices are ascending within each bin.
class BinTable {
 public:
  BinTable() = default;

  static BinTable build(const PointCloud& cloud, const SensorSpec& spec) {
    spec.validate();
    BinTable table;
    table.m_ = spec.m;
    table.k_ = spec.k;
    const std::size_t bin_count = static_cast<std::size_t>(spec.ray_count());
    table.offsets_.assign(bin_count + 1, 0);

    // Bin coordinates (fractional grid positions) per point; rho is kept for
    // the occlusion window during fitting.
    const std::size_t n = cloud.points.size();
    std::vector<double> u(n), v(n);
    table.rho_.resize(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
      const Vec3& p = cloud.points[idx].position;
      const double rho = p.norm();
      table.rho_[idx] = rho;
      if (rho < 1e-12) {
        u[idx] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double phi = rad_to_deg(std::atan2(p.y, p.x));
      if (phi < 0.0) phi += 360.0;
      if (phi >= 360.0) phi = 0.0;
      const double theta = rad_to_deg(std::acos(std::clamp(p.z / rho, -1.0, 1.0)));
      u[idx] = spec.m * phi / 360.0;
      v[idx] = spec.k * (theta - spec.theta_min) / (spec.theta_max - spec.theta_min);
    }

    std::vector<std::uint32_t> counts(bin_count, 0);
    auto for_each_bin = [&](std::size_t idx, auto&& emit) {
      if (std::isnan(u[idx])) return;
      if (spec.frustum_expansion <= 1.0) {
        const FrustumIndex fi = index_from_coords(u[idx], v[idx], spec);
        emit(static_cast<std::size_t>(fi.j) * spec.m + fi.i);
        return;
      }
      const double half = 0.5 * spec.frustum_expansion;
      long i_lo = static_cast<long>(std::ceil(u[idx] - half));
      long i_hi = static_cast<long>(std::floor(u[idx] + half));
      if (i_hi - i_lo + 1 >= spec.m) {
        i_lo = 0;
        i_hi = spec.m - 1;
      }
      const long j_lo = std::max<long>(0, static_cast<long>(std::ceil(v[idx] - half)));
      const long j_hi =
          std::min<long>(spec.k - 1, static_cast<long>(std::floor(v[idx] + half)));
      for (long j = j_lo; j <= j_hi; ++j) {
        for (long i = i_lo; i <= i_hi; ++i) {
          long iw = i % spec.m;
          if (iw < 0) iw += spec.m;
          emit(static_cast<std::size_t>(j) * spec.m + iw);
        }
      }
    };

    for (std::size_t idx = 0; idx < n; ++idx) {
      for_each_bin(idx, [&](std::size_t bin) { ++counts[bin]; });
    }
    for (std::size_t b = 0; b < bin_count; ++b) {
      table.offsets_[b + 1] = table.offsets_[b] + counts[b];
    }
    table.members_.resize(table.offsets_.back());
    std::vector<std::uint32_t> cursor(table.offsets_.begin(), table.offsets_.end() - 1);
    for (std::size_t idx = 0; idx < n; ++idx) {
      for_each_bin(idx, [&](std::size_t bin) {
        table.members_[cursor[bin]++] = static_cast<std::uint32_t>(idx);
      });
    }
    return table;
  }

  std::span<const std::uint32_t> members(int i, int j) const {
    const std::size_t bin = static_cast<std::size_t>(j) * m_ + i;
    return {members_.data() + offsets_[bin], members_.data() + offsets_[bin + 1]};
  }

  bool empty_bin(int i, int j) const { return members(i, j).empty(); }

  /// Radial distance of point idx in the source cloud.
  double rho(std::uint32_t idx) const { return rho_[idx]; }

  int horizontal_bins() const { return m_; }
  int vertical_bins() const { return k_; }

 private:
  static FrustumIndex index_from_coords(double u, double v, const SensorSpec& spec) {
    long i = std::lround(u) % spec.m;
    if (i < 0) i += spec.m;
    const long j = std::clamp<long>(std::lround(v), 0, spec.k - 1);
    return {static_cast<int>(i), static_cast<int>(j)};
  }

  int m_ = 0;
  int k_ = 0;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> members_;
  std::vector<double> rho_;
};

inline BinTable bin_points(const PointCloud& cloud, const SensorSpec& spec) {
  return BinTable::build(cloud, spec);
}

/// Frustum membership of both segmentation classes.
struct FrustumBins {
  BinTable non_ground;
  BinTable ground;
};

inline FrustumBins bin_frustums(const SegmentationResult& seg, const SensorSpec& spec) {
  return {BinTable::build(seg.non_ground, spec), BinTable::build(seg.ground, spec)};
}

// ---------------------------------------------------------------------------
// Ray-plane intersection
// ---------------------------------------------------------------------------

/// Point direction * t with t = offset / (normal . direction), if the ray is
/// not parallel to the plane and t lies within the sensing range.
inline std::optional<Vec3> intersect_ray_plane(const Ray& ray, const Plane& plane,
                                               const SensorSpec& spec) {
  const double denom = plane.normal.dot(ray.direction);
  if (std::abs(denom) <= 1e-9) return std::nullopt;
  const double t = plane.offset / denom;
  if (t < spec.min_range || t > spec.max_range) return std::nullopt;
  return ray.direction * t;
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

/// One optional hit per ray, indexed like build_rays (j*m + i).
using RayHits = std::vector<std::optional<Vec3>>;

/// Fits a plane inside every non-empty non-ground frustum and intersects the
/// frustum's ray with it. Degenerate bins (too few or collinear points after
/// the occlusion window) produce no hit.
inline RayHits non_ground_ray_hits(const PointCloud& non_ground, const BinTable& bins,
                                   const std::vector<Ray>& rays, const SensorSpec& spec,
                                   int threads = 0) {
  RayHits hits(rays.size());
  parallel_for_chunks(
      rays.size(),
      [&](std::size_t begin, std::size_t end) {
        std::vector<Vec3> fit_points;
        for (std::size_t r = begin; r < end; ++r) {
          const Ray& ray = rays[r];
          const std::span<const std::uint32_t> members = bins.members(ray.i, ray.j);
          if (members.size() < 3) continue;

          double rho_min = bins.rho(members.front());
          for (std::uint32_t idx : members) rho_min = std::min(rho_min, bins.rho(idx));

          fit_points.clear();
          for (std::uint32_t idx : members) {
            if (bins.rho(idx) <= rho_min + kOcclusionWindowMeters) {
              fit_points.push_back(non_ground.points[idx].position);
            }
          }
          if (fit_points.size() < 3) continue;

          try {
            const Plane plane = fit_plane_tls(fit_points);
            hits[r] = intersect_ray_plane(ray, plane, spec);
          } catch (const DegenerateGeometry&) {
            // skip this bin, no point emitted
          }
        }
      },
      threads);
  return hits;
}

/// Global TLS ground plane over the whole ground cloud; empty when the cloud
/// has fewer than 3 non-collinear points.
inline std::optional<Plane> fit_global_ground_plane(const PointCloud& ground) {
  if (ground.points.size() < 3) return std::nullopt;
  std::vector<Vec3> positions;
  positions.reserve(ground.points.size());
  for (const Point& p : ground.points) positions.push_back(p.position);
  try {
    return fit_plane_tls(positions);
  } catch (const DegenerateGeometry&) {
    return std::nullopt;
  }
}

/// Intersects the global ground plane with every ray whose frustum contains
/// ground points. Rays whose frustums hold non-ground points but no ground
/// points are thereby filtered out, and rays empty in both classes emit
/// nothing.
inline RayHits ground_ray_hits(const std::optional<Plane>& ground_plane,
                               const BinTable& ground_bins, const std::vector<Ray>& rays,
                               const SensorSpec& spec, int threads = 0) {
  RayHits hits(rays.size());
  if (!ground_plane) return hits;
  parallel_for_chunks(
      rays.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
          const Ray& ray = rays[r];
          if (ground_bins.empty_bin(ray.i, ray.j)) continue;
          hits[r] = intersect_ray_plane(ray, *ground_plane, spec);
        }
      },
      threads);
  return hits;
}

namespace detail {

inline PointCloud collect_hits(const RayHits& hits, const std::string& source_id) {
  PointCloud cloud;
  cloud.frame_tag = FrameTag::Vehicle;
  cloud.source_id = source_id;
  for (const std::optional<Vec3>& hit : hits) {
    if (hit) cloud.points.push_back({*hit, 0.0});  // synthesized: no reflectance
  }
  return cloud;
}

}  // namespace detail

/// V_n: synthesized non-ground cloud, in ray order (j, then i).
inline PointCloud synthesize_non_ground(const PointCloud& non_ground, const BinTable& bins,
                                        const std::vector<Ray>& rays,
                                        const SensorSpec& spec, int threads = 0) {
  return detail::collect_hits(non_ground_ray_hits(non_ground, bins, rays, spec, threads),
                              non_ground.source_id);
}

/// V_g: synthesized ground cloud, in ray order. Membership filtering only;
/// per-ray suppression against non-ground hits happens in synthesize().
inline PointCloud synthesize_ground(const PointCloud& ground, const FrustumBins& bins,
                                    const std::vector<Ray>& rays, const SensorSpec& spec,
                                    int threads = 0) {
  return detail::collect_hits(
      ground_ray_hits(fit_global_ground_plane(ground), bins.ground, rays, spec, threads),
      ground.source_id);
}

struct SynthesisResult {
  PointCloud cloud;                   ///< V, ordered by (j, i) ray index
  std::size_t non_ground_count = 0;   ///< |V_n|
  std::size_t ground_count = 0;       ///< |V_g|
  std::optional<Plane> ground_plane;  ///< empty when the ground fit degenerated
};

/// Full resampling pass: V = V_n merged with V_g. A ray with a valid
/// non-ground hit never also emits a ground hit, so |V| = |V_n| + |V_g| and
/// |V| <= m*k.
inline SynthesisResult synthesize(const PointCloud& gated, const SegmentationResult& seg,
                                  const SensorSpec& spec, int threads = 0) {
  spec.validate();
  if (seg.non_ground.points.size() + seg.ground.points.size() != gated.points.size()) {
    throw Error("segmentation does not partition the gated cloud");
  }

  const std::vector<Ray> rays = build_rays(spec);
  const FrustumBins bins = bin_frustums(seg, spec);
  const RayHits ng_hits = non_ground_ray_hits(seg.non_ground, bins.non_ground, rays,
                                              spec, threads);
  SynthesisResult result;
  result.ground_plane = fit_global_ground_plane(seg.ground);
  const RayHits g_hits = ground_ray_hits(result.ground_plane, bins.ground, rays, spec,
                                         threads);

  result.cloud.frame_tag = FrameTag::Vehicle;
  result.cloud.source_id = gated.source_id;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    if (ng_hits[r]) {
      result.cloud.points.push_back({*ng_hits[r], 0.0});
      ++result.non_ground_count;
    } else if (g_hits[r]) {
      result.cloud.points.push_back({*g_hits[r], 0.0});
      ++result.ground_count;
    }
  }
  return result;
}

}  // namespace rs2v
