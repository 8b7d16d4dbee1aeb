#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "delib/core/action.hpp"
#include "delib/core/observation.hpp"
#include "delib/sim/affordance.hpp"
#include "delib/sim/scene.hpp"
#include "delib/util/rng.hpp"

namespace delib::sim {

struct NoiseConfig {
  double p_action_fail = 0;     // silent manipulation no-op (reports success)
  double p_detection_drop = 0;  // whole detection missing from a frame
  double p_state_flip = 0;      // per state label per frame
  double depth_sigma = 0;       // gaussian depth noise, clamped positive
};

// One oracle world-state diff, for trajectory files.
struct TrajectoryStep {
  std::string action;
  std::vector<std::string> added, removed;
  std::vector<bool> satisfied;  // per goal condition, after the step
};

class Env {
 public:
  Env(SceneSpec scene, TaskSpec task, NoiseConfig noise = {},
      uint64_t noise_seed = 0, Camera camera = {});

  // Applies one primitive action, fires appliance rules, renders the next
  // observation, and records the oracle diff.
  ActionResult step(const PrimitiveAction& a);

  const Observation& observation() const { return last_obs_; }
  const SceneSpec& scene() const { return scene_; }
  const TaskSpec& task() const { return task_; }
  const Camera& camera() const { return camera_; }

  int steps() const { return steps_; }
  int failed_actions() const { return failed_; }
  bool stopped() const { return stopped_; }

  // goal-condition accounting over oracle state
  std::pair<int, int> goal_satisfaction() const;  // (satisfied, required)
  double goal_condition_rate() const;
  bool task_success() const;
  int condition_satisfied_count(const GoalCondition& c) const;

  const std::vector<TrajectoryStep>& trajectory() const { return trajectory_; }
  const std::vector<std::string>& initial_atoms() const { return initial_atoms_; }
  const std::vector<bool>& initial_satisfied() const { return initial_satisfied_; }

  struct OracleInstance {
    std::string id, category, parent;
    bool held = false;
    std::map<std::string, bool> states;
    Vec3 centroid;
    std::vector<VoxelIdx> voxels;
    bool open = false;
  };
  std::vector<OracleInstance> oracle_instances() const;

  // cell blocked for walking (walls or solid voxels in the body band)
  bool cell_blocked(const Cell& c) const;

 private:
  struct Rt {
    std::string id, category;
    VoxelIdx base;   // min corner voxel
    VoxelIdx dims;   // extent in voxels
    bool toggled = false, open = false, clean = true, cooked = false;
    bool sliced = false, filled = false, coffee = false;
    std::string parent;
    bool held = false;
    bool alive = true;
    int capacity = 3;
  };

  void rebuild_grid();
  void render();
  ActionResult apply(const PrimitiveAction& a);
  ActionResult manipulation(const PrimitiveAction& a);
  void fire_appliances();
  void record(const PrimitiveAction& a);

  Rt* find(const std::string& id);
  const Rt* find(const std::string& id) const;
  int rt_index(const std::string& id) const;
  bool hidden_in_closed(const Rt& r) const;
  std::vector<VoxelIdx> solid_voxels(const Rt& r) const;
  std::vector<VoxelIdx> slot_voxels(const Rt& r) const;
  std::optional<VoxelIdx> next_free_slot(const Rt& receptacle) const;
  int direct_children(const std::string& id) const;
  std::string linked_sink(const Rt& faucet) const;
  Vec3 rt_centroid(const Rt& r) const;
  std::set<std::string> oracle_atoms() const;
  int32_t cell_key(const VoxelIdx& v) const;

  SceneSpec scene_;
  TaskSpec task_;
  NoiseConfig noise_;
  Rng rng_;
  Camera camera_;
  std::vector<int32_t> true_seg_;  // noise-free segmentation for grounding

  std::vector<Rt> rt_;
  std::map<std::string, int> id_index_;
  std::vector<int32_t> grid_;  // voxel -> rt index, -1 empty, -2 wall
  Pose pose_;
  Observation last_obs_;
  std::set<std::string> prev_atoms_;
  std::vector<std::string> initial_atoms_;
  std::vector<bool> initial_satisfied_;
  std::vector<TrajectoryStep> trajectory_;
  int steps_ = 0;
  int failed_ = 0;
  bool stopped_ = false;
  int next_fresh_ = 0;
};

}  // namespace delib::sim
