#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "delib/core/action.hpp"
#include "delib/core/geometry.hpp"
#include "delib/core/observation.hpp"
#include "delib/planner/belief.hpp"
#include "delib/sim/affordance.hpp"

namespace delib::world {

enum class VoxelState : uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

// Dense belief grid: occupancy and last-seen step. Instance ownership lives
// in the records (masks are kept pairwise disjoint by the matcher).
class VoxelMap {
 public:
  VoxelMap(int x, int y, int z) : X(x), Y(y), Z(z),
      state_(static_cast<size_t>(x) * y * z, VoxelState::Unknown),
      last_seen_(static_cast<size_t>(x) * y * z, -1) {}

  int X, Y, Z;
  int32_t index(int x, int y, int z) const { return x + X * (y + Y * z); }
  int32_t index(const VoxelIdx& v) const { return index(v.x, v.y, v.z); }
  bool in_bounds(const VoxelIdx& v) const {
    return v.x >= 0 && v.y >= 0 && v.z >= 0 && v.x < X && v.y < Y && v.z < Z;
  }
  VoxelIdx unindex(int32_t id) const {
    return {id % X, (id / X) % Y, id / (X * Y)};
  }

  VoxelState state(int32_t id) const { return state_[id]; }
  void set_state(int32_t id, VoxelState s, int step) {
    state_[id] = s;
    last_seen_[id] = step;
  }
  int last_seen(int32_t id) const { return last_seen_[id]; }

 private:
  std::vector<VoxelState> state_;
  std::vector<int> last_seen_;
};

struct BeliefEntry {
  bool value = false;
  bool authoritative = false;
};

struct InstanceRecord {
  std::string id;        // category + ordinal, e.g. Mug_0
  std::string category;
  int ordinal = 0;
  std::vector<int32_t> voxels;  // sorted linear indices, never empty
  Vec3 centroid;                // mean of voxel centers
  Vec3 bbox_size;
  std::map<std::string, BeliefEntry> states;
  std::string parent;  // containing/supporting instance id, empty if none
  bool parent_is_container = false;
  bool visible_now = false;
  bool held = false;
  int last_seen = 0;
};

// One frame detection after projection into the map.
struct FrameDetection {
  int32_t key = -1;  // frame-local instance key
  std::string category;
  std::vector<int32_t> voxels;  // sorted
  Vec3 centroid;                // mean of voxel centers
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // pixel bbox (x2/y2 exclusive)
  std::vector<std::pair<int, int>> pixels;
  std::map<std::string, bool> labels;
};

struct Projection {
  std::vector<FrameDetection> detections;  // sorted by frame key
  std::vector<int32_t> visibility;         // sorted unique voxel indices
  std::vector<int32_t> seen_free;          // traversed voxels short of the hit
};

// Pinhole back-projection of one frame: pixels to world points to voxels,
// detection voxel sets grouped by frame instance key, plus the visibility
// mask of ray-traversed voxels.
Projection project_observation(const Observation& obs, const Camera& camera,
                               const VoxelMap& map);

// The bounding-box spatial rule: A rests on B iff the pair is allowed and
// A's x-center lies within B's x-range, A's bottom reaches below B's top,
// and A's y-center sits above B's bottom (image origin top-left).
bool predict_on_relation(int ax1, int ay1, int ax2, int ay2, int bx1, int by1,
                         int bx2, int by2, const std::string& cat_a,
                         const std::string& cat_b,
                         const sim::AffordanceTable& receptibility);

class WorldModel {
 public:
  WorldModel(int x, int y, int z, Camera camera = {});

  // Full belief update from one egocentric frame.
  void update(const Observation& obs);

  // Authoritative state changes from a successful action. The target/dest
  // are belief instance ids. Throws std::invalid_argument for an action
  // type with no modeled effect.
  void apply_action_effect(ActionType type, const std::string& target_id,
                           bool success, const std::string& dest_id = "");

  planner::BeliefSnapshot snapshot(const Pose& agent) const;

  const VoxelMap& map() const { return map_; }
  VoxelMap& map() { return map_; }
  const std::vector<InstanceRecord>& records() const { return records_; }
  const InstanceRecord* find(const std::string& id) const;
  InstanceRecord* find_mutable(const std::string& id);
  const Camera& camera() const { return camera_; }
  int step() const { return step_; }

  // k instances with greatest centroid distance from the pose, descending,
  // ties by lower ordinal (then category for cross-category ties).
  std::vector<const InstanceRecord*> farthest_instances(const Pose& pose,
                                                        int k = 5) const;

  // last-frame pixels of a belief instance (for manipulation grounding)
  const std::vector<std::pair<int, int>>* frame_pixels(const std::string& id) const;
  const std::vector<int32_t>& last_visibility() const { return last_visibility_; }

  // direct table surgery (used by matching, slicing, and ground-truth preseed)
  InstanceRecord& register_instance(const std::string& category,
                                    std::vector<int32_t> voxels);
  void delete_instance(const std::string& id);
  void recompute_geometry(InstanceRecord& r);

  // Matching: equal counts merge by min total centroid distance, extra
  // detections register, extra visible instances are removed. Removal is
  // evidence-gated when seen_free is supplied: voxels observed empty are
  // trimmed from the record first, and only records whose remaining mask
  // was actually hit (or emptied entirely) are deleted.
  // Returns frame key -> belief instance id.
  std::map<int32_t, std::string> match_instances(
      const std::vector<FrameDetection>& detections,
      const std::vector<int32_t>& visibility,
      const std::vector<int32_t>& seen_free = {});

 private:
  bool instance_visible(const InstanceRecord& r,
                        const std::vector<int32_t>& visibility) const;
  void update_relations(const std::vector<FrameDetection>& detections,
                        const std::map<int32_t, std::string>& frame_map);
  void update_states(const std::vector<FrameDetection>& detections,
                     const std::map<int32_t, std::string>& frame_map);

  VoxelMap map_;
  Camera camera_;
  std::vector<InstanceRecord> records_;
  std::map<std::string, int> next_ordinal_;
  std::map<std::string, std::vector<std::pair<int, int>>> frame_pixels_;
  std::vector<int32_t> last_visibility_;
  int step_ = 0;
};

}  // namespace delib::world
