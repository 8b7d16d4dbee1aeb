#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "delib/monitor/subgoal.hpp"
#include "delib/planner/belief.hpp"
#include "delib/sim/env.hpp"
#include "delib/sim/scene.hpp"

namespace delib::monitor {

struct InconsistentTrajectory : std::runtime_error {
  explicit InconsistentTrajectory(const std::string& why)
      : std::runtime_error("inconsistent trajectory: " + why) {}
};

struct EmptyResult : std::runtime_error {
  EmptyResult() : std::runtime_error("no subgoal pattern matched any turn") {}
};

// Replayable oracle trajectory: initial atoms, per-step diffs, and the
// goal-condition satisfaction vector after each step.
struct TrajectoryRecord {
  std::vector<sim::GoalCondition> conditions;
  std::vector<std::string> initial_atoms;
  std::vector<bool> initial_satisfied;
  std::vector<sim::TrajectoryStep> steps;
};

std::string trajectory_to_json(const TrajectoryRecord& t);
TrajectoryRecord trajectory_from_json(const std::string& text);

// One labeled subgoal at the first step each goal condition becomes
// satisfied (step 0 = already satisfied before acting), in step order.
// Throws InconsistentTrajectory when diffs do not replay or a satisfaction
// vector regresses.
std::vector<std::pair<int, Subgoal>> annotate_subgoals(const TrajectoryRecord& t);

// Phrase-pattern lexicon for the rule-based dialog reader. Patterns match
// case-insensitively on whitespace-normalized text; a builtin placement rule
// maps "put/place <X> on/in <Y>" through the alias table.
struct Lexicon {
  struct Entry {
    std::string pattern;
    std::vector<Subgoal> subgoals;
  };
  std::vector<Entry> entries;
  std::vector<std::pair<std::string, std::string>> aliases;  // phrase -> category

  static Lexicon builtin();
  static Lexicon from_json_file(const std::string& path);
};

// First-match-wins over turns in order; within a turn matches are ordered by
// position (ties by lexicon order); duplicates are dropped keeping the first
// occurrence. Throws EmptyResult when nothing matches at all.
std::vector<Subgoal> parse_subgoals(const std::vector<std::string>& turns,
                                    const Lexicon& lexicon);

// True when some instance binding satisfies the subgoal in the belief.
bool check_completed(const Subgoal& subgoal, const planner::BeliefSnapshot& belief,
                     int required_count = 1);

}  // namespace delib::monitor
