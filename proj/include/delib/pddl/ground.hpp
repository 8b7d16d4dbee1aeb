#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "delib/pddl/ast.hpp"

namespace delib::pddl {

using AtomId = uint32_t;

// Interned ground atoms for one grounded task.
class AtomTable {
 public:
  AtomId intern(const Atom& a);
  const Atom& atom(AtomId id) const { return atoms_[id]; }
  size_t size() const { return atoms_.size(); }
  // -1 if never interned
  int64_t lookup(const Atom& a) const;

 private:
  std::vector<Atom> atoms_;
  std::unordered_map<std::string, AtomId> index_;
};

// Sorted unique vector of true atom ids; closed world.
using SymState = std::vector<AtomId>;

bool state_contains(const SymState& s, AtomId a);
SymState make_state(std::vector<AtomId> atoms);
uint64_t state_hash(const SymState& s);

struct CondEffect {
  std::vector<AtomId> cond_pos, cond_neg;
  std::vector<AtomId> add, del;
};

struct GroundedAction {
  std::string name;
  std::vector<std::string> args;
  std::vector<AtomId> pre_pos, pre_neg;
  std::vector<AtomId> add, del;       // unconditional
  std::vector<CondEffect> cond_effects;
  int cost = 1;
  uint32_t index = 0;  // stable enumeration order, used for tie-breaking

  std::string str() const;
};

struct GroundedTask {
  std::vector<std::pair<std::string, std::string>> objects;
  AtomTable atoms;
  SymState init;
  std::vector<AtomId> goal_pos, goal_neg;
  std::vector<GroundedAction> actions;

  bool goal_satisfied(const SymState& s) const;
};

struct GroundOptions {
  size_t max_actions = 1'000'000;
  bool prune_unreachable = false;
  std::map<std::string, int> cost_overrides;  // schema name -> cost
};

// Enumerates every type-consistent binding of every schema. Forall effects
// expand over problem objects; When compiles to conditional-effect triples.
// Statically-false Equal guards drop the binding; condition literals over
// static predicates (never in any effect) are resolved against init.
GroundedTask ground(const DomainModel& domain, const ProblemModel& problem,
                    const GroundOptions& opts = {});

// Whether the action's preconditions hold; failed literals appended if not.
bool preconditions_hold(const GroundedAction& a, const SymState& s,
                        const GroundedTask* task = nullptr,
                        std::vector<std::string>* failed = nullptr);

// Applies one action. Conditional effects are evaluated against the
// pre-state; per action all deletes apply before all adds.
// Throws PreconditionViolated if preconditions do not hold.
SymState apply(const GroundedAction& a, const SymState& s,
               const GroundedTask& task);

}  // namespace delib::pddl
