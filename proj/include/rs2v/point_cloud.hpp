// In-memory point-cloud model, KITTI binary I/O, and range-gate preprocessing.
//
// The binary format is the KITTI velodyne convention: consecutive 16-byte
// records of little-endian float32 (x, y, z, intensity), no header. An ASCII
// "x y z intensity" per-line format is supported for fixtures and debugging;
// the binary format is canonical.

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rs2v/errors.hpp"
#include "rs2v/geometry.hpp"
#include "rs2v/sensor_spec.hpp"

namespace rs2v {

enum class FrameTag { World, Vehicle };

struct Point {
  Vec3 position;
  double intensity = 0.0;
};

struct PointCloud {
  std::vector<Point> points;
  FrameTag frame_tag = FrameTag::World;
  std::string source_id;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// ---------------------------------------------------------------------------
// KITTI binary I/O
// ---------------------------------------------------------------------------

namespace detail {

inline float load_f32_le(const unsigned char* p) {
  std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                    static_cast<std::uint32_t>(p[1]) << 8 |
                    static_cast<std::uint32_t>(p[2]) << 16 |
                    static_cast<std::uint32_t>(p[3]) << 24;
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

inline void store_f32_le(float f, unsigned char* p) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  p[0] = static_cast<unsigned char>(u & 0xff);
  p[1] = static_cast<unsigned char>((u >> 8) & 0xff);
  p[2] = static_cast<unsigned char>((u >> 16) & 0xff);
  p[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

}  // namespace detail

inline PointCloud read_kitti_bin(const std::filesystem::path& path,
                                 FrameTag tag = FrameTag::World) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  if (bytes.size() % 16 != 0) {
    throw TruncatedRecord(path.string() + ": length " +
                          std::to_string(bytes.size()) +
                          " is not a multiple of 16");
  }

  PointCloud cloud;
  cloud.frame_tag = tag;
  cloud.source_id = path.stem().string();
  cloud.points.resize(bytes.size() / 16);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const unsigned char* rec = bytes.data() + 16 * i;
    cloud.points[i].position.x = detail::load_f32_le(rec);
    cloud.points[i].position.y = detail::load_f32_le(rec + 4);
    cloud.points[i].position.z = detail::load_f32_le(rec + 8);
    cloud.points[i].intensity = detail::load_f32_le(rec + 12);
  }
  return cloud;
}

inline void write_kitti_bin(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  std::vector<unsigned char> bytes(cloud.points.size() * 16);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    unsigned char* rec = bytes.data() + 16 * i;
    detail::store_f32_le(static_cast<float>(cloud.points[i].position.x), rec);
    detail::store_f32_le(static_cast<float>(cloud.points[i].position.y), rec + 4);
    detail::store_f32_le(static_cast<float>(cloud.points[i].position.z), rec + 8);
    detail::store_f32_le(static_cast<float>(cloud.points[i].intensity), rec + 12);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

// ---------------------------------------------------------------------------
// ASCII debug format
// ---------------------------------------------------------------------------

/// One "x y z intensity" line per point, UTF-8, LF line endings.
inline PointCloud read_ascii_cloud(const std::filesystem::path& path,
                                   FrameTag tag = FrameTag::World) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  PointCloud cloud;
  cloud.frame_tag = tag;
  cloud.source_id = path.stem().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Point p;
    if (!(ls >> p.position.x >> p.position.y >> p.position.z >> p.intensity)) {
      throw ParseError(lineno, "expected 'x y z intensity'");
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

inline void write_ascii_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(9);
  for (const Point& p : cloud.points) {
    out << p.position.x << ' ' << p.position.y << ' ' << p.position.z << ' '
        << p.intensity << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

/// Rigidly moves a world-frame cloud into the vehicle frame. Intensity and
/// point order are preserved.
inline PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  if (cloud.frame_tag != FrameTag::World) {
    throw WrongFrame("transform_cloud expects a world-frame cloud");
  }
  PointCloud out;
  out.frame_tag = FrameTag::Vehicle;
  out.source_id = cloud.source_id;
  out.points.resize(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    out.points[i].position = apply_transform(t, cloud.points[i].position);
    out.points[i].intensity = cloud.points[i].intensity;
  }
  return out;
}

/// Indices of the points that survive the range gate: rho in
/// [min_range, max_range] and polar angle in [theta_min, theta_max], all
/// bounds inclusive. No azimuth gate: the horizontal field of view is the
/// full circle.
inline std::vector<std::uint32_t> range_gate_indices(const PointCloud& cloud,
                                                     const SensorSpec& spec) {
  if (cloud.frame_tag != FrameTag::Vehicle) {
    throw WrongFrame("range_gate expects a vehicle-frame cloud");
  }
  std::vector<std::uint32_t> kept;
  kept.reserve(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& pos = cloud.points[i].position;
    const double rho = pos.norm();
    if (rho < spec.min_range || rho > spec.max_range) continue;
    const double theta = rad_to_deg(std::acos(std::clamp(pos.z / rho, -1.0, 1.0)));
    if (theta < spec.theta_min || theta > spec.theta_max) continue;
    kept.push_back(static_cast<std::uint32_t>(i));
  }
  return kept;
}

/// Range-gated copy of the cloud (the preprocessed set P_c), order preserved.
inline PointCloud range_gate(const PointCloud& cloud, const SensorSpec& spec) {
  PointCloud out;
  out.frame_tag = FrameTag::Vehicle;
  out.source_id = cloud.source_id;
  const std::vector<std::uint32_t> kept = range_gate_indices(cloud, spec);
  out.points.reserve(kept.size());
  for (std::uint32_t idx : kept) out.points.push_back(cloud.points[idx]);
  return out;
}

}  // namespace rs2v
