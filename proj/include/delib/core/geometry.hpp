#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <compare>

namespace delib {

inline constexpr double kVoxelSize = 0.25;   // meters per voxel edge
inline constexpr double kEyeHeight = 1.5;    // camera height above floor
inline constexpr double kInteractDist = 1.0; // max manipulation distance (2D)

struct Vec3 {
  double x = 0, y = 0, z = 0;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

inline double dist2d(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct VoxelIdx {
  int x = 0, y = 0, z = 0;
  auto operator<=>(const VoxelIdx&) const = default;
};

inline VoxelIdx voxel_of(const Vec3& p) {
  return {static_cast<int>(std::floor(p.x / kVoxelSize)),
          static_cast<int>(std::floor(p.y / kVoxelSize)),
          static_cast<int>(std::floor(p.z / kVoxelSize))};
}

inline Vec3 voxel_center(const VoxelIdx& v) {
  return {(v.x + 0.5) * kVoxelSize, (v.y + 0.5) * kVoxelSize,
          (v.z + 0.5) * kVoxelSize};
}

struct Cell {
  int x = 0, y = 0;
  auto operator<=>(const Cell&) const = default;
};

// Agent pose. Position is a grid cell; heading is compass-style degrees
// (0 faces +y, 90 faces +x), pitch positive looks up.
struct Pose {
  Cell cell;
  int heading = 0;  // {0, 90, 180, 270}
  int pitch = 0;    // {-60, -30, 0, 30, 60}

  Vec3 eye() const {
    return {(cell.x + 0.5) * kVoxelSize, (cell.y + 0.5) * kVoxelSize, kEyeHeight};
  }
  bool operator==(const Pose&) const = default;
};

inline int wrap_heading(int h) { return ((h % 360) + 360) % 360; }

inline std::array<int, 2> heading_step(int heading) {
  switch (wrap_heading(heading)) {
    case 0: return {0, 1};
    case 90: return {1, 0};
    case 180: return {0, -1};
    default: return {-1, 0};
  }
}

inline Vec3 view_forward(int heading, int pitch) {
  const double h = wrap_heading(heading) * M_PI / 180.0;
  const double p = pitch * M_PI / 180.0;
  return {std::sin(h) * std::cos(p), std::cos(h) * std::cos(p), std::sin(p)};
}

inline Vec3 view_right(int heading) {
  const double h = wrap_heading(heading) * M_PI / 180.0;
  return {std::cos(h), -std::sin(h), 0.0};
}

// up = right x forward (right-handed)
inline Vec3 view_up(int heading, int pitch) {
  const Vec3 r = view_right(heading);
  const Vec3 f = view_forward(heading, pitch);
  return {r.y * f.z - r.z * f.y, r.z * f.x - r.x * f.z, r.x * f.y - r.y * f.x};
}

struct Camera {
  int width = 60;
  int height = 60;
  // 90 degree horizontal FOV: focal = (W/2) / tan(45deg) = W/2
  double focal() const { return width / 2.0; }

  // Ray direction through pixel (u,v); u=W/2, v=H/2 is the exact view axis.
  Vec3 pixel_ray(const Pose& pose, int u, int v) const {
    const double a = (u - width / 2.0) / focal();
    const double b = (height / 2.0 - v) / focal();
    const Vec3 f = view_forward(pose.heading, pose.pitch);
    const Vec3 r = view_right(pose.heading);
    const Vec3 up = view_up(pose.heading, pose.pitch);
    Vec3 d = f + r * a + up * b;
    const double n = d.norm();
    return d * (1.0 / n);
  }
};

}  // namespace delib
