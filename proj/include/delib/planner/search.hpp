#pragma once

#include <optional>
#include <string>
#include <vector>

#include "delib/pddl/ground.hpp"

namespace delib::planner {

struct PlanStep {
  std::string action;              // schema name, e.g. "PickUp"
  std::vector<std::string> args;   // instance ids
  int cost = 1;
  std::string str() const;
  bool operator==(const PlanStep&) const = default;
};

struct MidLevelPlan {
  std::vector<PlanStep> steps;
  int total_cost = 0;
  bool operator==(const MidLevelPlan&) const = default;
};

enum class OutcomeKind { Solved, GoalAlreadySatisfied, NoSolution, Timeout };

struct PlanOutcome {
  OutcomeKind kind = OutcomeKind::NoSolution;
  MidLevelPlan plan;            // meaningful for Solved
  size_t expanded = 0;
  size_t generated = 0;
};

struct SearchOptions {
  double timeout_seconds = 120.0;
  bool uniform_cost = false;  // debugging fallback: h = 0
};

// Greedy best-first search guided by the additive delete-relaxation
// heuristic (evaluated lazily at pop). Deterministic tie-breaking:
// lower accumulated cost, then lower grounded-action index, then FIFO.
PlanOutcome search_plan(const pddl::GroundedTask& task,
                        const SearchOptions& opts = {});

struct ValidationResult {
  bool ok = false;
  int failing_step = -1;  // -1 when ok; steps are 0-indexed
  std::string detail;
};

// Replays the plan with apply() from init and checks the goal at the end.
ValidationResult validate_plan(const MidLevelPlan& plan,
                               const pddl::GroundedTask& task);

}  // namespace delib::planner
