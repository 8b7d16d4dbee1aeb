#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "delib/core/geometry.hpp"

namespace delib {

struct DetectionLabel {
  std::string category;
  std::map<std::string, bool> states;  // per-detection labels, possibly noisy
};

// Egocentric frame: depth + instance segmentation + per-detection labels.
// Depth is the Euclidean distance along the pixel ray, 0 where nothing was hit.
struct Observation {
  Pose pose;
  int width = 0, height = 0;
  std::vector<float> depth;    // row-major W*H
  std::vector<int32_t> seg;    // instance key per pixel, -1 = none
  std::map<int32_t, DetectionLabel> labels;

  float depth_at(int u, int v) const { return depth[v * width + u]; }
  int32_t seg_at(int u, int v) const { return seg[v * width + u]; }
};

}  // namespace delib
