#pragma once

#include <string>

#include "curveseg/driver.hpp"

namespace curveseg {

struct SegmentationSetup {
  Image image;
  CurveNetwork net;
  DriverParams params;
  std::string output_dir;
};

// Reads a flat key=value description: the image, the output directory,
// model and weights, evolution parameters, and the seed curves (with
// optional junction / wallpoint lines for open seeds). Relative paths are
// resolved against the config file's directory. Throws ConfigError for
// malformed input and IoError when a file cannot be read.
SegmentationSetup load_segmentation(const std::string& config_path);

// "0.3" or "0:0.5,200:0.1" (step:value pairs, ascending steps).
SigmaSchedule parse_sigma_schedule(const std::string& text);

}  // namespace curveseg
