#pragma once

#include <string>
#include <vector>

#include "delib/sim/scene.hpp"

namespace delib::sim {

struct Difficulty {
  int distractors = 8;
  double p_hidden = 0;  // chance a task item starts inside a closed container
};

struct GenerationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& task_templates();  // the 12 task names

// Seeded deterministic scene+task construction. Every category the task
// needs is instantiated and reachable; reference_length is left at -1 and
// filled in by the oracle run.
EpisodeSpec generate_scene(const std::string& template_name, uint64_t seed,
                           const Difficulty& difficulty = {});

}  // namespace delib::sim
