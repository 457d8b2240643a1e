// 3D box annotations: world -> vehicle re-expression and label file I/O.
//
// Native label format, one record per line:
//   object_id category length width height cx cy cz rx ry rz
// Decimal fields are written with 12 significant digits. A lossy export to
// KITTI's camera-frame label format is provided for tooling compatibility.

#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rs2v/errors.hpp"
#include "rs2v/geometry.hpp"
#include "rs2v/point_cloud.hpp"

namespace rs2v {

struct BoxAnnotation {
  std::string object_id;
  std::string category;
  double length = 0.0;  ///< meters, along the box x axis
  double width = 0.0;
  double height = 0.0;
  Vec3 centroid;
  RotationVector rotation;
  FrameTag frame_tag = FrameTag::World;
};

/// Re-expresses a world-frame box in the vehicle frame:
/// centroid -> R X + T, rotation -> inv_rodrigues(R * rodrigues(theta)).
/// Category, dimensions and object_id are unchanged.
inline BoxAnnotation transform_annotation(const BoxAnnotation& box, const RigidTransform& t) {
  if (box.frame_tag != FrameTag::World) {
    throw WrongFrame("transform_annotation expects a world-frame box");
  }
  BoxAnnotation out = box;
  out.centroid = apply_transform(t, box.centroid);
  out.rotation = inv_rodrigues(t.rotation * rodrigues(box.rotation));
  out.frame_tag = FrameTag::Vehicle;
  return out;
}

/// Pose (centroid, rotation) of the uniquely matching box.
inline std::pair<Vec3, RotationVector> select_target(
    const std::vector<BoxAnnotation>& labels, const std::string& object_id) {
  const BoxAnnotation* found = nullptr;
  for (const BoxAnnotation& box : labels) {
    if (box.object_id != object_id) continue;
    if (found) throw DuplicateTarget("object_id '" + object_id + "' appears more than once");
    found = &box;
  }
  if (!found) throw UnknownTarget("object_id '" + object_id + "' not found in labels");
  return {found->centroid, found->rotation};
}

// ---------------------------------------------------------------------------
// Label I/O
// ---------------------------------------------------------------------------

inline std::vector<BoxAnnotation> read_labels(const std::filesystem::path& path,
                                              FrameTag tag = FrameTag::World) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<BoxAnnotation> boxes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    BoxAnnotation box;
    box.frame_tag = tag;
    if (!(ls >> box.object_id >> box.category >> box.length >> box.width >>
          box.height >> box.centroid.x >> box.centroid.y >> box.centroid.z >>
          box.rotation.rx >> box.rotation.ry >> box.rotation.rz)) {
      throw ParseError(lineno, "expected 'object_id category l w h cx cy cz rx ry rz'");
    }
    std::string trailing;
    if (ls >> trailing) {
      throw ParseError(lineno, "unexpected trailing field '" + trailing + "'");
    }
    if (!(box.length > 0.0 && box.width > 0.0 && box.height > 0.0)) {
      throw ParseError(lineno, "box dimensions must be strictly positive");
    }
    boxes.push_back(std::move(box));
  }
  return boxes;
}

inline void write_labels(const std::vector<BoxAnnotation>& boxes,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(12);
  for (const BoxAnnotation& b : boxes) {
    out << b.object_id << ' ' << b.category << ' ' << b.length << ' ' << b.width
        << ' ' << b.height << ' ' << b.centroid.x << ' ' << b.centroid.y << ' '
        << b.centroid.z << ' ' << b.rotation.rx << ' ' << b.rotation.ry << ' '
        << b.rotation.rz << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

/// Lossy KITTI label export. Boxes are assumed to sit in the vehicle (LiDAR)
/// frame; locations are converted to KITTI's camera frame (x right, y down,
/// z forward) at the box bottom center, yaw is taken from the z component of
/// the rotation vector, and truncation/occlusion/bbox fields are zeroed.
inline void write_kitti_labels(const std::vector<BoxAnnotation>& boxes,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(6);
  out << std::fixed;
  for (const BoxAnnotation& b : boxes) {
    // LiDAR (x fwd, y left, z up) -> camera (x right, y down, z fwd).
    const double cam_x = -b.centroid.y;
    const double cam_y = -(b.centroid.z - 0.5 * b.height);  // bottom center
    const double cam_z = b.centroid.x;
    const double rotation_y = -b.rotation.rz - kPi / 2.0;
    out << b.category << " 0 0 0 0 0 0 0 " << b.height << ' ' << b.width << ' '
        << b.length << ' ' << cam_x << ' ' << cam_y << ' ' << cam_z << ' '
        << rotation_y << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

/// Object ids of all boxes whose category names a vehicle
/// (car/van/truck/bus/vehicle, case-insensitive), in label order.
inline std::vector<std::string> vehicle_object_ids(const std::vector<BoxAnnotation>& boxes) {
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
  };
  std::vector<std::string> ids;
  for (const BoxAnnotation& b : boxes) {
    const std::string c = lower(b.category);
    if (c == "car" || c == "van" || c == "truck" || c == "bus" || c == "vehicle") {
      ids.push_back(b.object_id);
    }
  }
  return ids;
}

}  // namespace rs2v
