// Ground / non-ground partition of a vehicle-frame cloud.
//
// The baseline segmenter is a deterministic stand-in for Patchwork-family
// methods: a concentric polar grid around the sensor, per-cell seeds taken
// near the cell's lowest point, a TLS plane fit per cell with a few
// re-inclusion rounds, and a slope gate on the fitted normal. Anything that
// cannot be fit (sparse or steep cells) stays non-ground. External
// segmentation results can be wired in through a per-point sidecar file.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "rs2v/errors.hpp"
#include "rs2v/geometry.hpp"
#include "rs2v/parallel.hpp"
#include "rs2v/plane.hpp"
#include "rs2v/point_cloud.hpp"

namespace rs2v {

/// Disjoint split of the input; order within each part follows the input.
struct SegmentationResult {
  PointCloud non_ground;
  PointCloud ground;
};

struct GroundSegmenterConfig {
  double cell_size = 2.0;            ///< radial bin width, meters
  double seed_height_margin = 0.2;   ///< meters above the cell's lowest point
  double max_plane_distance = 0.15;  ///< inlier distance to the cell plane, meters
  double max_slope = 25.0;           ///< max normal tilt from vertical, degrees
  int refinement_iterations = 3;
  bool strict_empty = false;  ///< throw EmptyInput instead of returning empties

  void validate() const {
    if (!(cell_size > 0.0) || !(seed_height_margin > 0.0) ||
        !(max_plane_distance > 0.0) || !(max_slope > 0.0) ||
        refinement_iterations < 1) {
      throw ConfigError("segmenter: all parameters must be positive");
    }
    if (!(max_slope < 45.0)) {
      throw ConfigError("segmenter: max_slope must be below 45 degrees");
    }
  }
};

/// Angular width of the polar-grid sectors used by the baseline segmenter.
inline constexpr double kGroundSectorWidthDeg = 22.5;

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual SegmentationResult segment(const PointCloud& cloud) const = 0;
};

namespace detail {

inline SegmentationResult split_by_flags(const PointCloud& cloud,
                                         const std::vector<std::uint8_t>& ground_flag) {
  SegmentationResult out;
  out.non_ground.frame_tag = cloud.frame_tag;
  out.non_ground.source_id = cloud.source_id;
  out.ground.frame_tag = cloud.frame_tag;
  out.ground.source_id = cloud.source_id;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    (ground_flag[i] ? out.ground : out.non_ground).points.push_back(cloud.points[i]);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Baseline polar-grid segmenter
// ---------------------------------------------------------------------------

class GridGroundSegmenter : public Segmenter {
 public:
  explicit GridGroundSegmenter(GroundSegmenterConfig config = {}, int threads = 0)
      : config_(config), threads_(threads) {
    config_.validate();
  }

  SegmentationResult segment(const PointCloud& cloud) const override {
    if (cloud.frame_tag != FrameTag::Vehicle) {
      throw WrongFrame("ground segmentation expects a vehicle-frame cloud");
    }
    if (cloud.empty()) {
      if (config_.strict_empty) throw EmptyInput("segmenter received an empty cloud");
      return detail::split_by_flags(cloud, {});
    }

    // Group point indices by polar cell; std::map keeps the cell order
    // deterministic.
    std::map<std::uint64_t, std::vector<std::uint32_t>> cells;
    for (std::size_t idx = 0; idx < cloud.points.size(); ++idx) {
      const Vec3& p = cloud.points[idx].position;
      const double r = std::hypot(p.x, p.y);
      const auto ring =
          static_cast<std::uint64_t>(std::min(r / config_.cell_size, 1.0e12));
      double phi = rad_to_deg(std::atan2(p.y, p.x));
      if (phi < 0.0) phi += 360.0;
      if (phi >= 360.0) phi = 0.0;
      const auto sector = static_cast<std::uint64_t>(phi / kGroundSectorWidthDeg);
      cells[(ring << 16) | sector].push_back(static_cast<std::uint32_t>(idx));
    }

    std::vector<const std::vector<std::uint32_t>*> cell_list;
    cell_list.reserve(cells.size());
    for (const auto& [key, members] : cells) cell_list.push_back(&members);

    std::vector<std::uint8_t> ground_flag(cloud.points.size(), 0);
    parallel_for_chunks(
        cell_list.size(),
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t c = begin; c < end; ++c) {
            classify_cell(cloud, *cell_list[c], ground_flag);
          }
        },
        threads_);

    return detail::split_by_flags(cloud, ground_flag);
  }

  const GroundSegmenterConfig& config() const { return config_; }

 private:
  void classify_cell(const PointCloud& cloud, const std::vector<std::uint32_t>& members,
                     std::vector<std::uint8_t>& ground_flag) const {
    if (members.size() < 3) return;  // cannot fit a plane: stays non-ground

    double z_min = cloud.points[members.front()].position.z;
    for (std::uint32_t idx : members) {
      z_min = std::min(z_min, cloud.points[idx].position.z);
    }

    std::vector<Vec3> seeds;
    for (std::uint32_t idx : members) {
      const Vec3& p = cloud.points[idx].position;
      if (p.z <= z_min + config_.seed_height_margin) seeds.push_back(p);
    }
    if (seeds.size() < 3) return;

    Plane plane;
    try {
      plane = fit_plane_tls(seeds);
      std::vector<Vec3> inliers;
      for (int iter = 0; iter < config_.refinement_iterations; ++iter) {
        inliers.clear();
        for (std::uint32_t idx : members) {
          const Vec3& p = cloud.points[idx].position;
          if (std::abs(plane.signed_distance(p)) <= config_.max_plane_distance) {
            inliers.push_back(p);
          }
        }
        if (inliers.size() < 3) return;
        plane = fit_plane_tls(inliers);
      }
    } catch (const DegenerateGeometry&) {
      return;
    }

    // Reject cells whose plane is too far from horizontal.
    const double vertical = std::abs(plane.normal.z);
    const double slope_deg = rad_to_deg(std::acos(std::clamp(vertical, 0.0, 1.0)));
    if (slope_deg > config_.max_slope) return;

    for (std::uint32_t idx : members) {
      const Vec3& p = cloud.points[idx].position;
      if (std::abs(plane.signed_distance(p)) <= config_.max_plane_distance) {
        ground_flag[idx] = 1;
      }
    }
  }

  GroundSegmenterConfig config_;
  int threads_;
};

/// Baseline segmentation with the grid segmenter.
inline SegmentationResult segment_ground(const PointCloud& cloud,
                                         const GroundSegmenterConfig& config = {}) {
  return GridGroundSegmenter(config).segment(cloud);
}

// ---------------------------------------------------------------------------
// Precomputed (sidecar) segmenter
// ---------------------------------------------------------------------------

/// Sidecar file: one byte per point, 0 = non-ground, 1 = ground.
inline std::vector<std::uint8_t> read_sidecar_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> labels((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1) {
      throw ParseError(i + 1, "sidecar byte must be 0 or 1");
    }
  }
  return labels;
}

/// Applies an externally computed per-point partition (e.g. a Patchwork++
/// run exported as a sidecar file).
class PrecomputedLabelSegmenter : public Segmenter {
 public:
  explicit PrecomputedLabelSegmenter(std::vector<std::uint8_t> labels)
      : labels_(std::move(labels)) {}

  static PrecomputedLabelSegmenter from_file(const std::filesystem::path& path) {
    return PrecomputedLabelSegmenter(read_sidecar_labels(path));
  }

  SegmentationResult segment(const PointCloud& cloud) const override {
    if (labels_.size() != cloud.points.size()) {
      throw LabelLengthMismatch("sidecar has " + std::to_string(labels_.size()) +
                                " labels for " + std::to_string(cloud.points.size()) +
                                " points");
    }
    return detail::split_by_flags(cloud, labels_);
  }

 private:
  std::vector<std::uint8_t> labels_;
};

}  // namespace rs2v
