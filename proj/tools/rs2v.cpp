// rs2v command-line tool.
//
//   rs2v generate  --config job.json [overrides]   batch-generate frames
//   rs2v inspect   <cloud.bin|cloud.txt>           point count and bounds
//   rs2v validate  <config.json>                   check a config, no run
//
// Exit codes: 0 success, 1 partial failure (some frames failed), 2 invalid
// configuration.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rs2v/pipeline.hpp"
#include "rs2v/rs2v.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_generate(const std::string& config_path, const std::string& input,
                 const std::string& labels, const std::string& targets,
                 const std::string& output, int threads, bool emit_kitti,
                 const std::string& sidecar) {
  rs2v::JobConfig cfg;
  if (!config_path.empty()) cfg = rs2v::load_job_config(config_path);
  if (!input.empty()) cfg.input_path = input;
  if (!labels.empty()) cfg.labels_path = labels;
  if (!output.empty()) cfg.output_dir = output;
  if (!sidecar.empty()) cfg.segmentation_sidecar = sidecar;
  if (threads >= 0) cfg.threads = threads;
  if (emit_kitti) cfg.emit_kitti_labels = true;
  if (!targets.empty()) {
    if (targets == "all-vehicles") {
      cfg.all_vehicles = true;
      cfg.target_ids.clear();
    } else {
      cfg.all_vehicles = false;
      cfg.target_ids = split_csv(targets);
    }
  }
  cfg.validate();

  const rs2v::BatchResult result = rs2v::run_batch(cfg);
  const std::size_t failures = result.manifest.failure_count();
  for (const rs2v::ManifestRow& row : result.manifest.rows) {
    if (row.status != "ok") {
      std::cerr << row.frame_id << (row.object_id.empty() ? "" : "/" + row.object_id)
                << ": " << row.status << "\n";
    } else if (!row.ground_plane) {
      std::cerr << "warning: " << row.frame_id << "/" << row.object_id
                << ": ground plane fit degenerated, no ground points synthesized\n";
    }
  }
  std::cout << result.outputs << " frame(s) written, " << failures << " failure(s); "
            << "manifest: " << cfg.output_dir << "/manifest.csv\n";
  return failures == 0 ? 0 : 1;
}

int run_inspect(const std::string& path) {
  const bool ascii = path.size() > 4 && path.substr(path.size() - 4) == ".txt";
  const rs2v::PointCloud cloud =
      ascii ? rs2v::read_ascii_cloud(path) : rs2v::read_kitti_bin(path);
  std::cout << path << ": " << cloud.size() << " points\n";
  if (cloud.empty()) return 0;

  rs2v::Vec3 lo = cloud.points.front().position;
  rs2v::Vec3 hi = lo;
  double imin = cloud.points.front().intensity, imax = imin;
  for (const rs2v::Point& p : cloud.points) {
    lo.x = std::min(lo.x, p.position.x);
    lo.y = std::min(lo.y, p.position.y);
    lo.z = std::min(lo.z, p.position.z);
    hi.x = std::max(hi.x, p.position.x);
    hi.y = std::max(hi.y, p.position.y);
    hi.z = std::max(hi.z, p.position.z);
    imin = std::min(imin, p.intensity);
    imax = std::max(imax, p.intensity);
  }
  std::printf("  x: [%.3f, %.3f]\n  y: [%.3f, %.3f]\n  z: [%.3f, %.3f]\n", lo.x, hi.x,
              lo.y, hi.y, lo.z, hi.z);
  std::printf("  intensity: [%.3f, %.3f]\n", imin, imax);
  return 0;
}

int run_validate(const std::string& path) {
  const rs2v::JobConfig cfg = rs2v::load_job_config(path);
  cfg.validate();
  std::cout << path << ": ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstruct vehicle-mounted LiDAR frames from roadside LiDAR data"};
  app.require_subcommand(1);

  std::string config_path, input, labels, targets, output, inspect_path, validate_path;
  std::string sidecar;
  int threads = -1;
  bool emit_kitti = false;

  CLI::App* generate = app.add_subcommand("generate", "Generate vehicle-mounted frames");
  generate->add_option("--config", config_path, "Job config (JSON)");
  generate->add_option("--input", input, "Roadside frame .bin or directory of frames");
  generate->add_option("--labels", labels, "Label file or directory");
  generate->add_option("--targets", targets,
                       "Comma-separated object ids, or 'all-vehicles'");
  generate->add_option("--output", output, "Output directory");
  generate->add_option("--threads", threads, "Worker threads (0 = all cores)");
  generate->add_flag("--emit-kitti-labels", emit_kitti, "Also write KITTI-format labels");
  generate->add_option("--segmentation-sidecar", sidecar,
                       "Per-point ground flags (.seg file or directory)");

  CLI::App* inspect = app.add_subcommand("inspect", "Print point count and bounds");
  inspect->add_option("cloud", inspect_path, "Point cloud (.bin or .txt)")->required();

  CLI::App* validate = app.add_subcommand("validate", "Check a config without running");
  validate->add_option("config", validate_path, "Job config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return run_generate(config_path, input, labels, targets, output, threads,
                          emit_kitti, sidecar);
    }
    if (inspect->parsed()) return run_inspect(inspect_path);
    if (validate->parsed()) return run_validate(validate_path);
  } catch (const rs2v::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return validate->parsed() ? 2 : 1;
  }
  return 0;
}
