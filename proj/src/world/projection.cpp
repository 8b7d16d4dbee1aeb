#include <algorithm>
#include <map>

#include "delib/core/dda.hpp"
#include "delib/world/world_model.hpp"

namespace delib::world {

namespace {

void sort_unique(std::vector<int32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Projection project_observation(const Observation& obs, const Camera& camera,
                               const VoxelMap& map) {
  Projection out;
  const Vec3 eye = obs.pose.eye();

  struct Accum {
    std::string category;
    std::vector<int32_t> voxels;
    int x1 = 1 << 30, y1 = 1 << 30, x2 = -1, y2 = -1;
    std::vector<std::pair<int, int>> pixels;
    std::map<std::string, bool> labels;
  };
  std::map<int32_t, Accum> dets;
  std::vector<int32_t> visibility, free_seen;

  for (int v = 0; v < obs.height; ++v) {
    for (int u = 0; u < obs.width; ++u) {
      const float depth = obs.depth_at(u, v);
      const Vec3 dir = camera.pixel_ray(obs.pose, u, v);
      const double t_hit = depth > 0 ? depth : 10.0;

      // traversed voxels ahead of the surface are seen-free
      walk_ray(eye, dir, t_hit, [&](const VoxelIdx& vox, double) {
        if (map.in_bounds(vox)) free_seen.push_back(map.index(vox));
        return true;
      });

      if (depth <= 0) continue;

      // nudge the sample point into the hit voxel so boundary points do not
      // bin into the empty neighbour
      const Vec3 point = eye + dir * (depth + 1e-4);
      const VoxelIdx vox = voxel_of(point);
      if (!map.in_bounds(vox)) continue;
      const int32_t id = map.index(vox);
      visibility.push_back(id);

      const int32_t key = obs.seg_at(u, v);
      if (key < 0) continue;
      Accum& a = dets[key];
      a.voxels.push_back(id);
      a.x1 = std::min(a.x1, u);
      a.y1 = std::min(a.y1, v);
      a.x2 = std::max(a.x2, u + 1);
      a.y2 = std::max(a.y2, v + 1);
      a.pixels.emplace_back(u, v);
    }
  }

  sort_unique(free_seen);
  sort_unique(visibility);
  // the visibility mask covers traversed voxels and hit voxels
  std::vector<int32_t> vis_all = free_seen;
  vis_all.insert(vis_all.end(), visibility.begin(), visibility.end());
  sort_unique(vis_all);
  // seen-free excludes hit voxels
  std::vector<int32_t> free_only;
  std::set_difference(free_seen.begin(), free_seen.end(), visibility.begin(),
                      visibility.end(), std::back_inserter(free_only));

  out.visibility = std::move(vis_all);
  out.seen_free = std::move(free_only);

  for (auto& [key, a] : dets) {
    FrameDetection d;
    d.key = key;
    auto lbl = obs.labels.find(key);
    if (lbl != obs.labels.end()) {
      d.category = lbl->second.category;
      d.labels = lbl->second.states;
    }
    sort_unique(a.voxels);
    d.voxels = std::move(a.voxels);
    Vec3 sum{0, 0, 0};
    for (int32_t vox : d.voxels) sum = sum + voxel_center(map.unindex(vox));
    d.centroid = sum * (1.0 / static_cast<double>(d.voxels.size()));
    d.x1 = a.x1;
    d.y1 = a.y1;
    d.x2 = a.x2;
    d.y2 = a.y2;
    d.pixels = std::move(a.pixels);
    out.detections.push_back(std::move(d));
  }
  return out;
}

bool predict_on_relation(int ax1, int ay1, int ax2, int ay2, int bx1, int by1,
                         int bx2, int by2, const std::string& cat_a,
                         const std::string& cat_b,
                         const sim::AffordanceTable& receptibility) {
  if (!receptibility.can_rest_on(cat_a, cat_b)) return false;
  const double xc = (ax1 + ax2) / 2.0;
  const double yc = (ay1 + ay2) / 2.0;
  return bx1 <= xc && xc <= bx2 && ay2 >= by1 && yc <= by2;
}

}  // namespace delib::world
