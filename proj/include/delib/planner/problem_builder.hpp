#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delib/monitor/subgoal.hpp"
#include "delib/pddl/parser.hpp"
#include "delib/planner/belief.hpp"
#include "delib/planner/search.hpp"
#include "delib/sim/affordance.hpp"

namespace delib::planner {

// Predicate -> relevant object categories, beyond the subgoal's own
// patient/destination (e.g. everything that can cook for isCooked).
class RelevanceTable {
 public:
  static RelevanceTable builtin();
  static RelevanceTable from_json_file(const std::string& path);

  const std::vector<std::string>& categories(monitor::SubgoalPredicate p) const;
  void set(monitor::SubgoalPredicate p, std::vector<std::string> cats);

  // every subgoal predicate has an entry; listed categories exist in the domain
  void validate(const pddl::DomainModel& domain) const;

 private:
  std::map<monitor::SubgoalPredicate, std::vector<std::string>> table_;
};

struct PlanRequest {
  monitor::Subgoal subgoal;
  BeliefSnapshot belief;
  const pddl::DomainModel* domain = nullptr;
  const RelevanceTable* relevance = nullptr;  // builtin when null
  double timeout = 120.0;
  bool allow_unobserved = true;
  bool prune = true;
  int required_count = 1;  // complete when this many instances satisfy
  std::string pinned_patient;  // bind this exact instance (recovery goals)

  const RelevanceTable& relevance_or_builtin() const;
};

// Instance ids surviving scene pruning: the subgoal's categories, the
// predicate's relevant categories, everything tied to kept instances by
// containment/support (and faucet pairing), plus the held object.
std::vector<std::string> prune_scene(const BeliefSnapshot& belief,
                                     const monitor::Subgoal& subgoal,
                                     const RelevanceTable& relevance);

// PDDL problem over the kept instances: typed objects, known-true init
// atoms (with isVisible/isNear derived from spatial belief), and the subgoal
// translated to a literal conjunction over a bound patient instance.
pddl::ProblemModel build_problem(const PlanRequest& request,
                                 const std::vector<std::string>& kept);

// Adds one `<Category>_u0` dummy with an unobserved marker per required
// category that has no instance; rebinds the goal when the patient or
// destination had to be dummied.
pddl::ProblemModel inject_unobserved(const pddl::ProblemModel& problem,
                                     const PlanRequest& request);

struct SubgoalPlan {
  PlanOutcome outcome;
  pddl::ProblemModel problem;         // as handed to the planner
  std::vector<std::string> kept;      // pruned instance set
  double plan_seconds = 0;            // grounding + search wall time
};

// prune -> build -> inject -> ground -> search
SubgoalPlan plan_subgoal(const PlanRequest& request);

// True when some instance binding satisfies the subgoal in the belief.
// Count-aware: at least `required_count` distinct bindings.
bool subgoal_completed(const monitor::Subgoal& subgoal,
                       const BeliefSnapshot& belief, int required_count = 1);

}  // namespace delib::planner
