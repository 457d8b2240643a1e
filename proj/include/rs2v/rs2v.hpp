// Umbrella header for the rs2v library.
//
// rs2v reconstructs vehicle-mounted LiDAR point clouds from roadside LiDAR
// frames: it re-expresses a roadside scene in a target vehicle's sensor
// frame, models a virtual spinning LiDAR, and resamples the scene by fitting
// local planes inside per-ray view frustums and intersecting rays with them.
//
// Note: pipeline.hpp needs the vendored nlohmann/json header on the include
// path; include it separately if you only want the core modules.

#pragma once

#include "rs2v/annotations.hpp"
#include "rs2v/errors.hpp"
#include "rs2v/geometry.hpp"
#include "rs2v/ground_segmentation.hpp"
#include "rs2v/parallel.hpp"
#include "rs2v/plane.hpp"
#include "rs2v/point_cloud.hpp"
#include "rs2v/sensor_spec.hpp"
#include "rs2v/virtual_lidar.hpp"
