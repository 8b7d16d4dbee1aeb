#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delib/core/geometry.hpp"
#include "delib/monitor/subgoal.hpp"

namespace delib::sim {

struct InstanceSpec {
  std::string id;        // oracle id, unique within the scene
  std::string category;
  Vec3 position;         // min corner, meters (voxel aligned)
  Vec3 size;             // meters (multiples of the voxel edge)
  std::map<std::string, bool> states;  // initial oracle states
  std::string contained_in;   // container instance id, if any
  std::string supported_on;   // supporting instance id, if any
  int capacity = -1;          // -1: category default
  bool open = false;          // openables only
};

struct SceneSpec {
  int X = 16, Y = 16, Z = 8;
  std::vector<Cell> blocked;  // static full-height blocked cells (walls)
  Pose agent;
  std::vector<InstanceSpec> instances;
};

struct GoalCondition {
  std::string category;
  monitor::SubgoalPredicate predicate = monitor::SubgoalPredicate::isPickedUp;
  std::optional<std::string> destination;
  int count = 1;
};

struct TaskSpec {
  std::string name;
  std::vector<GoalCondition> conditions;
};

// One benchmark episode bundle.
struct EpisodeSpec {
  SceneSpec scene;
  TaskSpec task;
  std::vector<monitor::Subgoal> subgoals;  // canonical order, may repeat
  long reference_length = -1;              // oracle solver step count
};

std::string to_json(const EpisodeSpec& e);
EpisodeSpec episode_from_json(const std::string& text);
EpisodeSpec load_episode(const std::string& path);
void save_episode(const EpisodeSpec& e, const std::string& path);

std::string subgoals_to_json(const std::vector<monitor::Subgoal>& sgs);
std::vector<monitor::Subgoal> subgoals_from_json(const std::string& text);

}  // namespace delib::sim
