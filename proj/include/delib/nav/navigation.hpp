#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "delib/core/action.hpp"
#include "delib/core/geometry.hpp"
#include "delib/util/rng.hpp"
#include "delib/world/world_model.hpp"

namespace delib::nav {

struct Unreachable : std::runtime_error {
  Unreachable() : std::runtime_error("no path to any goal cell") {}
};
struct NoFrontier : std::runtime_error {
  NoFrontier() : std::runtime_error("map fully explored and no instances known") {}
};
struct NotVisible : std::runtime_error {
  explicit NotVisible(const std::string& id)
      : std::runtime_error("instance not visible in frame: " + id) {}
};

enum class CellState : uint8_t { Free, Blocked, Unknown };

struct OccupancyGrid {
  int X = 0, Y = 0;
  std::vector<CellState> cells;

  CellState at(const Cell& c) const { return cells[c.y * X + c.x]; }
  void set(const Cell& c, CellState s) { cells[c.y * X + c.x] = s; }
  bool in_bounds(const Cell& c) const {
    return c.x >= 0 && c.y >= 0 && c.x < X && c.y < Y;
  }
};

// A cell is blocked when any believed-occupied voxel in the body height band
// belongs to a non-target instance (or to no instance: walls). Cells never
// observed stay unknown. The agent's own cell is always free.
OccupancyGrid derive_occupancy(const world::WorldModel& world, const Pose& agent,
                               const std::string& target_id = "");

struct NavGoal {
  Cell cell;
  int heading = 0;
  int pitch = 0;
};

// Free cells within interaction distance of the target centroid, each with
// the heading/pitch that aims at the target (snapped to the action grid).
std::vector<NavGoal> goal_region(const OccupancyGrid& grid,
                                 const Vec3& target_centroid);

// Shortest 4-connected path by uniform-cost search to any goal cell;
// deterministic tie-breaking by (x, then y). Includes start and goal.
// unknown_traversable: optimistic during Search, conservative during GoTo.
// Throws Unreachable when no goal connects.
std::vector<Cell> plan_path(const OccupancyGrid& grid, const Cell& start,
                            const std::vector<Cell>& goals,
                            bool unknown_traversable = false);

// Primitive expansion: Forward moves one cell, turns are +-90, pitch steps
// +-30; never three same-direction turns at a corner.
std::vector<ActionType> path_to_primitives(const std::vector<Cell>& path,
                                           const Pose& start, int final_heading,
                                           int final_pitch);

struct SearchTarget {
  bool is_instance = false;
  std::string instance_id;  // when is_instance
  Cell cell;                // frontier cell otherwise
};

// Uniformly samples one of the 5 farthest instances (the previous target is
// excluded when alternatives exist); with fewer than 2 instances known,
// samples a frontier cell instead. Throws NoFrontier when neither exists.
SearchTarget select_search_target(const world::WorldModel& world, const Pose& pose,
                                  Rng& rng, const std::string& previous = "");

// Pixel to ground a manipulation: the centroid pixel of the instance's mask
// in the current frame, or the nearest mask pixel when the centroid falls
// off-mask. Throws NotVisible when the instance has no pixels in frame.
std::pair<int, int> interaction_point(const world::WorldModel& world,
                                      const std::string& instance_id);

}  // namespace delib::nav
