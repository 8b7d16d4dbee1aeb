#pragma once

#include <map>
#include <string>
#include <vector>

#include "delib/core/geometry.hpp"

namespace delib::planner {

// Read-only projection of the instance table handed to the planner.
struct BeliefInstance {
  std::string id;        // e.g. Mug_0
  std::string category;  // e.g. Mug
  int ordinal = 0;
  Vec3 centroid;
  std::map<std::string, bool> states;  // known values only; absent = unknown
  std::string parent;                  // containing/supporting instance id
  bool parent_is_container = false;
  bool visible_now = false;
  bool held = false;

  bool state_true(const std::string& pred) const {
    auto it = states.find(pred);
    return it != states.end() && it->second;
  }
  bool state_known_false(const std::string& pred) const {
    auto it = states.find(pred);
    return it != states.end() && !it->second;
  }
};

struct BeliefSnapshot {
  Pose agent;
  std::vector<BeliefInstance> instances;  // registration order

  const BeliefInstance* find(const std::string& id) const {
    for (const auto& i : instances)
      if (i.id == id) return &i;
    return nullptr;
  }
  const BeliefInstance* held() const {
    for (const auto& i : instances)
      if (i.held) return &i;
    return nullptr;
  }
};

}  // namespace delib::planner
