#pragma once

#include <cmath>

#include "delib/core/geometry.hpp"

namespace delib {

// Amanatides & Woo voxel traversal. Calls fn(voxel, t_entry) for every voxel
// the ray enters, starting with the voxel containing the origin (t_entry 0),
// until fn returns false or t exceeds t_max.
template <typename Fn>
void walk_ray(const Vec3& origin, const Vec3& dir, double t_max, Fn&& fn) {
  VoxelIdx v = voxel_of(origin);

  const double inf = 1e30;
  int step_x = dir.x > 0 ? 1 : (dir.x < 0 ? -1 : 0);
  int step_y = dir.y > 0 ? 1 : (dir.y < 0 ? -1 : 0);
  int step_z = dir.z > 0 ? 1 : (dir.z < 0 ? -1 : 0);

  auto boundary = [](double coord, int step) {
    double cell = std::floor(coord / kVoxelSize);
    return (cell + (step > 0 ? 1.0 : 0.0)) * kVoxelSize;
  };
  double tx = step_x ? (boundary(origin.x, step_x) - origin.x) / dir.x : inf;
  double ty = step_y ? (boundary(origin.y, step_y) - origin.y) / dir.y : inf;
  double tz = step_z ? (boundary(origin.z, step_z) - origin.z) / dir.z : inf;
  double dtx = step_x ? kVoxelSize / std::abs(dir.x) : inf;
  double dty = step_y ? kVoxelSize / std::abs(dir.y) : inf;
  double dtz = step_z ? kVoxelSize / std::abs(dir.z) : inf;

  double t = 0;
  while (t <= t_max) {
    if (!fn(v, t)) return;
    if (tx <= ty && tx <= tz) {
      t = tx;
      tx += dtx;
      v.x += step_x;
    } else if (ty <= tz) {
      t = ty;
      ty += dty;
      v.y += step_y;
    } else {
      t = tz;
      tz += dtz;
      v.z += step_z;
    }
    if (t > t_max) return;
  }
}

}  // namespace delib
