// End-to-end orchestration: job configuration, per-target frame generation,
// batch runs over frame directories, and the CSV manifest.
//
// Requires the vendored nlohmann/json header on the include path.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rs2v/annotations.hpp"
#include "rs2v/errors.hpp"
#include "rs2v/geometry.hpp"
#include "rs2v/ground_segmentation.hpp"
#include "rs2v/point_cloud.hpp"
#include "rs2v/sensor_spec.hpp"
#include "rs2v/virtual_lidar.hpp"

namespace rs2v {

// ---------------------------------------------------------------------------
// Job configuration
// ---------------------------------------------------------------------------

struct JobConfig {
  std::string input_path;   ///< roadside frame (.bin) or directory of frames
  std::string labels_path;  ///< label file or directory of <frame_id>.txt
  std::string output_dir;
  std::vector<std::string> target_ids;
  bool all_vehicles = false;  ///< expand targets to every vehicle-category box
  Vec3 delta_t{0.0, 0.0, 1.73};  ///< sensor mount offset above the vehicle centroid
  SensorSpec sensor;
  GroundSegmenterConfig segmenter;
  std::string segmentation_sidecar;  ///< optional: .seg file or directory
  bool emit_kitti_labels = false;
  int threads = 0;  ///< 0 = all hardware threads

  void validate() const {
    if (input_path.empty()) throw ConfigError("input path is required");
    if (labels_path.empty()) throw ConfigError("labels path is required");
    if (output_dir.empty()) throw ConfigError("output directory is required");
    if (!all_vehicles && target_ids.empty()) {
      throw ConfigError("no targets: set \"targets\" to a list of ids or \"all-vehicles\"");
    }
    if (!delta_t.finite()) throw ConfigError("delta_t must be finite");
    sensor.validate();
    segmenter.validate();
  }
};

namespace detail {

inline double json_number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j[key].get<double>();
}

inline int json_int(const nlohmann::json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
  return j[key].get<int>();
}

inline bool json_bool(const nlohmann::json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(std::string(key) + " must be a boolean");
  return j[key].get<bool>();
}

inline std::string json_string(const nlohmann::json& j, const char* key,
                               const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(std::string(key) + " must be a string");
  return j[key].get<std::string>();
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown config key " + where + "\"" + key + "\"");
  }
}

}  // namespace detail

/// Loads a JSON job config with full defaulting; every key is optional in
/// the file and unknown keys are rejected. CLI flags override afterwards.
inline JobConfig load_job_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());

  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"input", "labels", "output", "targets", "delta_t", "sensor",
                               "segmenter", "segmentation_sidecar", "emit_kitti_labels",
                               "threads"},
                              "");

  JobConfig cfg;
  cfg.input_path = detail::json_string(j, "input", "");
  cfg.labels_path = detail::json_string(j, "labels", "");
  cfg.output_dir = detail::json_string(j, "output", "");
  cfg.segmentation_sidecar = detail::json_string(j, "segmentation_sidecar", "");
  cfg.emit_kitti_labels = detail::json_bool(j, "emit_kitti_labels", false);
  cfg.threads = detail::json_int(j, "threads", 0);

  if (j.contains("targets")) {
    const nlohmann::json& t = j["targets"];
    if (t.is_string()) {
      if (t.get<std::string>() != "all-vehicles") {
        throw ConfigError("targets must be \"all-vehicles\" or an array of object ids");
      }
      cfg.all_vehicles = true;
    } else if (t.is_array()) {
      for (const nlohmann::json& id : t) {
        if (!id.is_string()) throw ConfigError("targets array entries must be strings");
        cfg.target_ids.push_back(id.get<std::string>());
      }
    } else {
      throw ConfigError("targets must be \"all-vehicles\" or an array of object ids");
    }
  }

  if (j.contains("delta_t")) {
    const nlohmann::json& d = j["delta_t"];
    if (!d.is_array() || d.size() != 3 || !d[0].is_number() || !d[1].is_number() ||
        !d[2].is_number()) {
      throw ConfigError("delta_t must be an array of 3 numbers");
    }
    cfg.delta_t = {d[0].get<double>(), d[1].get<double>(), d[2].get<double>()};
  }

  if (j.contains("sensor")) {
    const nlohmann::json& s = j["sensor"];
    if (!s.is_object()) throw ConfigError("sensor must be an object");
    detail::reject_unknown_keys(s,
                                {"m", "k", "min_range", "max_range", "theta_min",
                                 "theta_max", "frustum_expansion"},
                                "sensor.");
    cfg.sensor.m = detail::json_int(s, "m", cfg.sensor.m);
    cfg.sensor.k = detail::json_int(s, "k", cfg.sensor.k);
    cfg.sensor.min_range = detail::json_number(s, "min_range", cfg.sensor.min_range);
    cfg.sensor.max_range = detail::json_number(s, "max_range", cfg.sensor.max_range);
    cfg.sensor.theta_min = detail::json_number(s, "theta_min", cfg.sensor.theta_min);
    cfg.sensor.theta_max = detail::json_number(s, "theta_max", cfg.sensor.theta_max);
    cfg.sensor.frustum_expansion =
        detail::json_number(s, "frustum_expansion", cfg.sensor.frustum_expansion);
  }

  if (j.contains("segmenter")) {
    const nlohmann::json& s = j["segmenter"];
    if (!s.is_object()) throw ConfigError("segmenter must be an object");
    detail::reject_unknown_keys(s,
                                {"cell_size", "seed_height_margin", "max_plane_distance",
                                 "max_slope", "refinement_iterations"},
                                "segmenter.");
    cfg.segmenter.cell_size = detail::json_number(s, "cell_size", cfg.segmenter.cell_size);
    cfg.segmenter.seed_height_margin =
        detail::json_number(s, "seed_height_margin", cfg.segmenter.seed_height_margin);
    cfg.segmenter.max_plane_distance =
        detail::json_number(s, "max_plane_distance", cfg.segmenter.max_plane_distance);
    cfg.segmenter.max_slope = detail::json_number(s, "max_slope", cfg.segmenter.max_slope);
    cfg.segmenter.refinement_iterations =
        detail::json_int(s, "refinement_iterations", cfg.segmenter.refinement_iterations);
  }

  return cfg;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ManifestRow {
  std::string frame_id;
  std::string object_id;
  std::string status = "ok";  ///< "ok" or an error description
  std::size_t points_gated = 0;
  std::size_t points_non_ground = 0;
  std::size_t points_ground = 0;
  std::size_t synth_non_ground = 0;
  std::size_t synth_ground = 0;
  std::size_t synth_total = 0;
  std::optional<Plane> ground_plane;
  double duration_ms = 0.0;  ///< wall clock; kept in the last column
};

struct FrameManifest {
  std::vector<ManifestRow> rows;

  static constexpr const char* kCsvHeader =
      "frame_id,object_id,status,points_gated,points_non_ground,points_ground,"
      "synth_non_ground,synth_ground,synth_total,ground_nx,ground_ny,ground_nz,"
      "ground_offset,duration_ms";

  std::size_t failure_count() const {
    std::size_t n = 0;
    for (const ManifestRow& r : rows) {
      if (r.status != "ok") ++n;
    }
    return n;
  }
};

inline void write_manifest_csv(const FrameManifest& manifest,
                               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << FrameManifest::kCsvHeader << '\n';
  out.precision(12);
  for (const ManifestRow& r : manifest.rows) {
    std::string status = r.status;
    for (char& c : status) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << r.frame_id << ',' << r.object_id << ',' << status << ',' << r.points_gated
        << ',' << r.points_non_ground << ',' << r.points_ground << ','
        << r.synth_non_ground << ',' << r.synth_ground << ',' << r.synth_total << ',';
    if (r.ground_plane) {
      out << r.ground_plane->normal.x << ',' << r.ground_plane->normal.y << ','
          << r.ground_plane->normal.z << ',' << r.ground_plane->offset;
    } else {
      out << ",,,";
    }
    out << ',' << r.duration_ms << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

// ---------------------------------------------------------------------------
// Frame generation
// ---------------------------------------------------------------------------

/// One roadside frame loaded into memory.
struct FrameInputs {
  std::string frame_id;
  PointCloud world_cloud;  ///< frame_tag = World
  std::vector<BoxAnnotation> labels;
  /// Optional per-point ground flags for world_cloud (external segmentation).
  std::optional<std::vector<std::uint8_t>> sidecar;
};

/// Runs the full per-target pipeline (select target, world->vehicle
/// transform of cloud and labels, range gate, ground segmentation,
/// synthesis) and writes <frame_id>_<object_id>.bin plus label files into
/// cfg.output_dir. Throws on failure; callers record the error per frame.
inline ManifestRow generate_frame(const JobConfig& cfg, const FrameInputs& frame,
                                  const std::string& target_id) {
  const auto start = std::chrono::steady_clock::now();

  ManifestRow row;
  row.frame_id = frame.frame_id;
  row.object_id = target_id;

  const auto [x_wc, theta_wc] = select_target(frame.labels, target_id);
  const RigidTransform to_vehicle = world_to_vehicle_transform(x_wc, theta_wc, cfg.delta_t);

  const PointCloud vehicle_cloud = transform_cloud(frame.world_cloud, to_vehicle);
  std::vector<BoxAnnotation> vehicle_labels;
  vehicle_labels.reserve(frame.labels.size());
  for (const BoxAnnotation& box : frame.labels) {
    vehicle_labels.push_back(transform_annotation(box, to_vehicle));
  }

  const std::vector<std::uint32_t> kept = range_gate_indices(vehicle_cloud, cfg.sensor);
  PointCloud gated;
  gated.frame_tag = FrameTag::Vehicle;
  gated.source_id = vehicle_cloud.source_id;
  gated.points.reserve(kept.size());
  for (std::uint32_t idx : kept) gated.points.push_back(vehicle_cloud.points[idx]);
  row.points_gated = gated.points.size();

  SegmentationResult seg;
  if (frame.sidecar) {
    // Sidecar flags index the original world cloud; carry them through the
    // (order-preserving) transform and gate.
    if (frame.sidecar->size() != frame.world_cloud.points.size()) {
      throw LabelLengthMismatch("sidecar has " + std::to_string(frame.sidecar->size()) +
                                " labels for " +
                                std::to_string(frame.world_cloud.points.size()) +
                                " input points");
    }
    std::vector<std::uint8_t> gated_flags;
    gated_flags.reserve(kept.size());
    for (std::uint32_t idx : kept) gated_flags.push_back((*frame.sidecar)[idx]);
    seg = PrecomputedLabelSegmenter(std::move(gated_flags)).segment(gated);
  } else {
    seg = GridGroundSegmenter(cfg.segmenter, cfg.threads).segment(gated);
  }
  row.points_non_ground = seg.non_ground.points.size();
  row.points_ground = seg.ground.points.size();

  SynthesisResult synth = synthesize(gated, seg, cfg.sensor, cfg.threads);
  row.synth_non_ground = synth.non_ground_count;
  row.synth_ground = synth.ground_count;
  row.synth_total = synth.cloud.points.size();
  row.ground_plane = synth.ground_plane;

  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);
  const std::string stem = frame.frame_id + "_" + target_id;
  write_kitti_bin(synth.cloud, out_dir / (stem + ".bin"));
  write_labels(vehicle_labels, out_dir / (stem + ".txt"));
  if (cfg.emit_kitti_labels) {
    write_kitti_labels(vehicle_labels, out_dir / (stem + "_kitti.txt"));
  }

  row.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  return row;
}

// ---------------------------------------------------------------------------
// Batch runs
// ---------------------------------------------------------------------------

struct BatchResult {
  FrameManifest manifest;
  std::size_t outputs = 0;  ///< successfully written frames
};

namespace detail {

inline std::vector<std::filesystem::path> list_frames(const std::filesystem::path& input) {
  std::vector<std::filesystem::path> frames;
  if (std::filesystem::is_directory(input)) {
    for (const auto& entry : std::filesystem::directory_iterator(input)) {
      if (entry.is_regular_file() && entry.path().extension() == ".bin") {
        frames.push_back(entry.path());
      }
    }
    std::sort(frames.begin(), frames.end());
  } else {
    frames.push_back(input);
  }
  return frames;
}

inline std::filesystem::path sibling_for_frame(const std::filesystem::path& configured,
                                               const std::string& frame_id,
                                               const char* extension) {
  if (std::filesystem::is_directory(configured)) {
    return configured / (frame_id + extension);
  }
  return configured;
}

}  // namespace detail

/// Runs every (frame, target) job. Per-frame errors are recorded in the
/// manifest without aborting the batch; rows are sorted by (frame_id,
/// object_id) and the manifest is written to <output_dir>/manifest.csv.
inline BatchResult run_batch(const JobConfig& cfg) {
  cfg.validate();

  BatchResult result;
  const std::filesystem::path input(cfg.input_path);
  if (!std::filesystem::exists(input)) {
    throw ConfigError("input path does not exist: " + cfg.input_path);
  }

  for (const std::filesystem::path& frame_path : detail::list_frames(input)) {
    const std::string frame_id = frame_path.stem().string();

    FrameInputs frame;
    frame.frame_id = frame_id;
    try {
      frame.world_cloud = read_kitti_bin(frame_path, FrameTag::World);
      frame.labels = read_labels(
          detail::sibling_for_frame(cfg.labels_path, frame_id, ".txt"), FrameTag::World);
      if (!cfg.segmentation_sidecar.empty()) {
        frame.sidecar = read_sidecar_labels(detail::sibling_for_frame(
            std::filesystem::path(cfg.segmentation_sidecar), frame_id, ".seg"));
      }
    } catch (const Error& e) {
      ManifestRow row;
      row.frame_id = frame_id;
      row.status = std::string("error: ") + e.what();
      result.manifest.rows.push_back(std::move(row));
      continue;
    }

    std::vector<std::string> targets =
        cfg.all_vehicles ? vehicle_object_ids(frame.labels) : cfg.target_ids;
    for (const std::string& target_id : targets) {
      try {
        result.manifest.rows.push_back(generate_frame(cfg, frame, target_id));
        ++result.outputs;
      } catch (const Error& e) {
        ManifestRow row;
        row.frame_id = frame_id;
        row.object_id = target_id;
        row.status = std::string("error: ") + e.what();
        result.manifest.rows.push_back(std::move(row));
      }
    }
  }

  std::sort(result.manifest.rows.begin(), result.manifest.rows.end(),
            [](const ManifestRow& a, const ManifestRow& b) {
              return std::tie(a.frame_id, a.object_id) < std::tie(b.frame_id, b.object_id);
            });

  std::filesystem::create_directories(cfg.output_dir);
  write_manifest_csv(result.manifest, std::filesystem::path(cfg.output_dir) / "manifest.csv");
  return result;
}

}  // namespace rs2v
