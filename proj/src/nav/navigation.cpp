#include "delib/nav/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>

namespace delib::nav {

using world::VoxelState;

OccupancyGrid derive_occupancy(const world::WorldModel& world, const Pose& agent,
                               const std::string& target_id) {
  const auto& map = world.map();
  OccupancyGrid grid;
  grid.X = map.X;
  grid.Y = map.Y;
  grid.cells.assign(static_cast<size_t>(map.X) * map.Y, CellState::Unknown);

  // voxel -> owning instance id
  std::map<int32_t, const world::InstanceRecord*> owner;
  for (const auto& r : world.records())
    for (int32_t v : r.voxels) owner[v] = &r;

  const int zlo = 1, zhi = std::min(6, map.Z - 1);
  for (int y = 0; y < map.Y; ++y) {
    for (int x = 0; x < map.X; ++x) {
      bool blocked = false, observed = false;
      for (int z = zlo; z <= zhi && !blocked; ++z) {
        int32_t id = map.index(x, y, z);
        VoxelState s = map.state(id);
        if (s != VoxelState::Unknown) observed = true;
        if (s == VoxelState::Occupied) {
          auto it = owner.find(id);
          if (it == owner.end() || it->second->id != target_id) blocked = true;
        }
      }
      Cell c{x, y};
      grid.set(c, blocked ? CellState::Blocked
                          : (observed ? CellState::Free : CellState::Unknown));
    }
  }
  grid.set(agent.cell, CellState::Free);
  return grid;
}

std::vector<NavGoal> goal_region(const OccupancyGrid& grid,
                                 const Vec3& target_centroid) {
  std::vector<NavGoal> out;
  const int cx = static_cast<int>(std::floor(target_centroid.x / kVoxelSize));
  const int cy = static_cast<int>(std::floor(target_centroid.y / kVoxelSize));
  const int r = static_cast<int>(std::ceil(kInteractDist / kVoxelSize));
  for (int y = cy - r; y <= cy + r; ++y) {
    for (int x = cx - r; x <= cx + r; ++x) {
      Cell c{x, y};
      if (!grid.in_bounds(c) || grid.at(c) != CellState::Free) continue;
      Vec3 eye{(x + 0.5) * kVoxelSize, (y + 0.5) * kVoxelSize, kEyeHeight};
      if (dist2d(eye, target_centroid) > kInteractDist) continue;

      double dx = target_centroid.x - eye.x;
      double dy = target_centroid.y - eye.y;
      int heading;
      if (std::abs(dx) >= std::abs(dy))
        heading = dx >= 0 ? 90 : 270;
      else
        heading = dy >= 0 ? 0 : 180;

      double horiz = std::hypot(dx, dy);
      double vert = target_centroid.z - kEyeHeight;
      double angle = horiz < 1e-9 ? (vert >= 0 ? 60 : -60)
                                  : std::atan2(vert, horiz) * 180.0 / M_PI;
      int pitch = static_cast<int>(std::lround(angle / 30.0)) * 30;
      pitch = std::clamp(pitch, -60, 60);
      out.push_back({c, heading, pitch});
    }
  }
  std::sort(out.begin(), out.end(), [](const NavGoal& a, const NavGoal& b) {
    if (a.cell.x != b.cell.x) return a.cell.x < b.cell.x;
    return a.cell.y < b.cell.y;
  });
  return out;
}

std::vector<Cell> plan_path(const OccupancyGrid& grid, const Cell& start,
                            const std::vector<Cell>& goals,
                            bool unknown_traversable) {
  if (goals.empty()) throw Unreachable();
  std::set<Cell> goal_set(goals.begin(), goals.end());
  if (goal_set.count(start)) return {start};

  auto passable = [&](const Cell& c) {
    if (!grid.in_bounds(c)) return false;
    CellState s = grid.at(c);
    if (s == CellState::Blocked) return false;
    if (s == CellState::Unknown) return unknown_traversable;
    return true;
  };

  struct Entry {
    int dist, x, y;
    bool operator>(const Entry& o) const {
      if (dist != o.dist) return dist > o.dist;
      if (x != o.x) return x > o.x;
      return y > o.y;
    }
  };
  const int n = grid.X * grid.Y;
  std::vector<int> dist(n, 1 << 30);
  std::vector<int32_t> parent(n, -1);
  auto idx = [&](const Cell& c) { return c.y * grid.X + c.x; };

  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[idx(start)] = 0;
  open.push({0, start.x, start.y});

  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};

  while (!open.empty()) {
    Entry e = open.top();
    open.pop();
    Cell c{e.x, e.y};
    if (e.dist > dist[idx(c)]) continue;
    if (goal_set.count(c)) {
      std::vector<Cell> path;
      for (int32_t cur = idx(c); cur != -1; cur = parent[cur])
        path.push_back({cur % grid.X, cur / grid.X});
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int k = 0; k < 4; ++k) {
      Cell nb{c.x + dx[k], c.y + dy[k]};
      if (!passable(nb)) continue;
      int nd = e.dist + 1;
      if (nd < dist[idx(nb)]) {
        dist[idx(nb)] = nd;
        parent[idx(nb)] = idx(c);
        open.push({nd, nb.x, nb.y});
      }
    }
  }
  throw Unreachable();
}

namespace {

std::vector<ActionType> turns_to(int from_heading, int to_heading) {
  int delta = wrap_heading(to_heading - from_heading);
  switch (delta) {
    case 0: return {};
    case 90: return {ActionType::TurnRight};
    case 270: return {ActionType::TurnLeft};
    default: return {ActionType::TurnRight, ActionType::TurnRight};
  }
}

int heading_between(const Cell& a, const Cell& b) {
  if (b.x > a.x) return 90;
  if (b.x < a.x) return 270;
  if (b.y > a.y) return 0;
  return 180;
}

}  // namespace

std::vector<ActionType> path_to_primitives(const std::vector<Cell>& path,
                                           const Pose& start, int final_heading,
                                           int final_pitch) {
  std::vector<ActionType> out;
  int heading = start.heading;
  int pitch = start.pitch;

  // level the camera before walking
  while (pitch < 0) { out.push_back(ActionType::LookUp); pitch += 30; }
  while (pitch > 0) { out.push_back(ActionType::LookDown); pitch -= 30; }

  for (size_t i = 0; i + 1 < path.size(); ++i) {
    int want = heading_between(path[i], path[i + 1]);
    for (ActionType t : turns_to(heading, want)) out.push_back(t);
    heading = want;
    out.push_back(ActionType::Forward);
  }
  for (ActionType t : turns_to(heading, final_heading)) out.push_back(t);
  while (pitch < final_pitch) { out.push_back(ActionType::LookUp); pitch += 30; }
  while (pitch > final_pitch) { out.push_back(ActionType::LookDown); pitch -= 30; }
  return out;
}

SearchTarget select_search_target(const world::WorldModel& world, const Pose& pose,
                                  Rng& rng, const std::string& previous) {
  const auto& records = world.records();
  if (records.size() >= 2) {
    auto far = world.farthest_instances(pose, 5);
    std::vector<const world::InstanceRecord*> cands(far.begin(), far.end());
    if (cands.size() > 1 && !previous.empty()) {
      auto it = std::remove_if(cands.begin(), cands.end(),
                               [&](const world::InstanceRecord* r) {
                                 return r->id == previous;
                               });
      if (it != cands.begin()) cands.erase(it, cands.end());
    }
    SearchTarget t;
    t.is_instance = true;
    t.instance_id = cands[rng.below(cands.size())]->id;
    return t;
  }

  // frontier fallback: free cells adjacent to unknown space
  OccupancyGrid grid = derive_occupancy(world, pose);
  std::vector<Cell> frontier;
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  for (int y = 0; y < grid.Y; ++y)
    for (int x = 0; x < grid.X; ++x) {
      Cell c{x, y};
      if (grid.at(c) != CellState::Free) continue;
      for (int k = 0; k < 4; ++k) {
        Cell nb{x + dx[k], y + dy[k]};
        if (grid.in_bounds(nb) && grid.at(nb) == CellState::Unknown) {
          frontier.push_back(c);
          break;
        }
      }
    }
  if (!frontier.empty()) {
    SearchTarget t;
    t.cell = frontier[rng.below(frontier.size())];
    return t;
  }
  if (!records.empty()) {
    SearchTarget t;
    t.is_instance = true;
    t.instance_id = records.front().id;
    return t;
  }
  throw NoFrontier();
}

std::pair<int, int> interaction_point(const world::WorldModel& world,
                                      const std::string& instance_id) {
  const auto* pixels = world.frame_pixels(instance_id);
  if (!pixels || pixels->empty()) throw NotVisible(instance_id);

  double su = 0, sv = 0;
  for (const auto& [u, v] : *pixels) {
    su += u;
    sv += v;
  }
  int cu = static_cast<int>(std::lround(su / pixels->size()));
  int cv = static_cast<int>(std::lround(sv / pixels->size()));
  for (const auto& [u, v] : *pixels)
    if (u == cu && v == cv) return {cu, cv};

  // centroid off-mask: nearest mask pixel
  double best = 1e18;
  std::pair<int, int> pick = (*pixels)[0];
  for (const auto& [u, v] : *pixels) {
    double d = double(u - cu) * (u - cu) + double(v - cv) * (v - cv);
    if (d < best || (d == best && (v < pick.second ||
                                   (v == pick.second && u < pick.first)))) {
      best = d;
      pick = {u, v};
    }
  }
  return pick;
}

}  // namespace delib::nav
