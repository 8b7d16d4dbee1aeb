#include "delib/planner/problem_builder.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

#include <json.hpp>

#include "delib/pddl/ground.hpp"
#include "delib/util/log.hpp"

namespace delib::planner {

using monitor::Subgoal;
using monitor::SubgoalPredicate;
using pddl::Atom;
using pddl::Formula;
using pddl::ProblemModel;

namespace {

Atom atom1(const std::string& pred, const std::string& a) {
  return Atom{pred, {pddl::obj(a)}};
}
Atom atom2(const std::string& pred, const std::string& a, const std::string& b) {
  return Atom{pred, {pddl::obj(a), pddl::obj(b)}};
}

const sim::AffordanceTable& aff() { return sim::AffordanceTable::builtin(); }

std::string dummy_id(const std::string& category) { return category + "_u0"; }

bool is_dummy(const std::string& id) {
  return id.size() > 3 && id.compare(id.size() - 3, 3, "_u0") == 0;
}

// faucet id -> nearest sink id among the given instances
std::map<std::string, std::string> faucet_pairs(
    const std::vector<const BeliefInstance*>& insts) {
  std::map<std::string, std::string> pairs;
  for (const auto* f : insts) {
    const sim::CategoryInfo* fc = aff().find(f->category);
    if (!fc || !fc->is_faucet) continue;
    double best = 1e18;
    const BeliefInstance* sink = nullptr;
    for (const auto* s : insts) {
      const sim::CategoryInfo* scat = aff().find(s->category);
      if (!scat || !scat->is_sink) continue;
      double d = (f->centroid - s->centroid).norm();
      if (d < best) {
        best = d;
        sink = s;
      }
    }
    if (sink) pairs[f->id] = sink->id;
  }
  return pairs;
}

Vec3 agent_pos(const Pose& agent) {
  return {(agent.cell.x + 0.5) * kVoxelSize, (agent.cell.y + 0.5) * kVoxelSize, 0};
}

bool is_near_agent(const BeliefInstance& inst, const Pose& agent) {
  return dist2d(agent_pos(agent), inst.centroid) <= kInteractDist;
}

bool instance_satisfies(const BeliefInstance& inst, const Subgoal& sg,
                        const BeliefSnapshot& belief) {
  switch (sg.predicate) {
    case SubgoalPredicate::isPlacedTo: {
      if (inst.parent.empty()) return false;
      const BeliefInstance* p = belief.find(inst.parent);
      return p && sg.destination && p->category == *sg.destination;
    }
    case SubgoalPredicate::isEmptied: {
      for (const auto& other : belief.instances)
        if (other.parent == inst.id) return false;
      return true;
    }
    case SubgoalPredicate::isPickedUp:
      return inst.held || inst.state_true("isPickedUp");
    default:
      return inst.state_true(to_string(sg.predicate));
  }
}

// Patient candidates; an isSliced subgoal over a slice-yield category falls
// back to its sliceable source while no slice exists yet.
std::vector<const BeliefInstance*> patient_candidates(const Subgoal& sg,
                                                      const BeliefSnapshot& belief) {
  std::vector<const BeliefInstance*> out;
  for (const auto& i : belief.instances)
    if (i.category == sg.patient) out.push_back(&i);
  if (!out.empty() || sg.predicate != SubgoalPredicate::isSliced) return out;

  std::string source = aff().slice_source_of(sg.patient);
  if (source.empty()) return out;
  for (const auto& i : belief.instances)
    if (i.category == source) out.push_back(&i);
  return out;
}

// Prefer instances with the most prerequisites already satisfied (near,
// visible, already at a predicate-relevant receptacle); tie-break by nearest
// centroid to the agent, then lowest ordinal.
const BeliefInstance* pick_instance(std::vector<const BeliefInstance*> cands,
                                    const BeliefSnapshot& belief,
                                    const RelevanceTable& relevance,
                                    const Subgoal& sg) {
  if (cands.empty()) return nullptr;
  Vec3 agent = agent_pos(belief.agent);
  const auto& rel_cats = relevance.categories(sg.predicate);
  auto score = [&](const BeliefInstance* i) {
    int s = 0;
    if (is_near_agent(*i, belief.agent)) ++s;
    if (i->visible_now) ++s;
    if (!i->parent.empty()) {
      const BeliefInstance* p = belief.find(i->parent);
      if (p && std::find(rel_cats.begin(), rel_cats.end(), p->category) !=
                   rel_cats.end())
        ++s;
    }
    return s;
  };
  std::stable_sort(cands.begin(), cands.end(),
                   [&](const BeliefInstance* a, const BeliefInstance* b) {
                     int sa = score(a), sb = score(b);
                     if (sa != sb) return sa > sb;
                     double da = dist2d(agent, a->centroid);
                     double db = dist2d(agent, b->centroid);
                     if (da != db) return da < db;
                     return a->ordinal < b->ordinal;
                   });
  return cands[0];
}

// Belief extended with the dummy instances present in a problem's objects,
// so goal binding can refer to them.
BeliefSnapshot with_dummies(const BeliefSnapshot& belief,
                            const ProblemModel& problem) {
  BeliefSnapshot ext = belief;
  int next = 100000;
  for (const auto& [id, cat] : problem.objects) {
    if (!is_dummy(id)) continue;
    BeliefInstance d;
    d.id = id;
    d.category = cat;
    d.ordinal = next++;
    d.centroid = agent_pos(belief.agent);
    ext.instances.push_back(std::move(d));
  }
  return ext;
}

struct GoalBinding {
  std::string patient_id;
  std::string destination_id;
  bool needs_destination = false;
  bool bound() const {
    return !patient_id.empty() && (!needs_destination || !destination_id.empty());
  }
};

GoalBinding bind_goal(const Subgoal& sg, const BeliefSnapshot& belief,
                      const RelevanceTable& relevance,
                      const std::string& pinned = "") {
  GoalBinding b;
  b.needs_destination = sg.predicate == SubgoalPredicate::isPlacedTo;

  auto cands = patient_candidates(sg, belief);
  if (!pinned.empty()) {
    const BeliefInstance* p = belief.find(pinned);
    if (p) {
      cands.clear();
      cands.push_back(p);
    }
  }
  std::vector<const BeliefInstance*> unsat;
  for (const auto* c : cands)
    if (!instance_satisfies(*c, sg, belief)) unsat.push_back(c);
  const BeliefInstance* pick =
      pick_instance(unsat.empty() ? cands : unsat, belief, relevance, sg);
  if (pick) b.patient_id = pick->id;

  if (b.needs_destination && sg.destination) {
    std::vector<const BeliefInstance*> dests;
    for (const auto& i : belief.instances)
      if (i.category == *sg.destination) dests.push_back(&i);
    const BeliefInstance* d = pick_instance(dests, belief, relevance, sg);
    if (d) b.destination_id = d->id;
  }
  return b;
}

Formula goal_formula(const Subgoal& sg, const GoalBinding& bind,
                     const ProblemModel& problem) {
  switch (sg.predicate) {
    case SubgoalPredicate::isPlacedTo:
      return Formula::mk_atom(
          atom2("isPlacedTo", bind.patient_id, bind.destination_id));
    case SubgoalPredicate::isEmptied: {
      std::vector<Formula> lits;
      for (const auto& [id, cat] : problem.objects) {
        if (id == bind.patient_id || is_dummy(id)) continue;
        const sim::CategoryInfo* info = aff().find(cat);
        if (info && !info->pickupable) continue;
        lits.push_back(Formula::mk_not(
            Formula::mk_atom(atom2("parentReceptacles", id, bind.patient_id))));
      }
      if (lits.empty()) return Formula::truth();
      return Formula::mk_and(std::move(lits));
    }
    default:
      return Formula::mk_atom(atom1(to_string(sg.predicate), bind.patient_id));
  }
}

void set_goal(ProblemModel& problem, const PlanRequest& request) {
  BeliefSnapshot ext = with_dummies(request.belief, problem);
  GoalBinding bind = bind_goal(request.subgoal, ext,
                               request.relevance_or_builtin(),
                               request.pinned_patient);
  problem.goal = bind.bound() ? goal_formula(request.subgoal, bind, problem)
                              : Formula::truth();
}

bool goal_bindable(const ProblemModel& problem, const PlanRequest& request) {
  BeliefSnapshot ext = with_dummies(request.belief, problem);
  return bind_goal(request.subgoal, ext, request.relevance_or_builtin(),
                   request.pinned_patient)
      .bound();
}

}  // namespace

const RelevanceTable& PlanRequest::relevance_or_builtin() const {
  static const RelevanceTable b = RelevanceTable::builtin();
  return relevance ? *relevance : b;
}

RelevanceTable RelevanceTable::builtin() {
  RelevanceTable t;
  t.set(SubgoalPredicate::isCooked,
        {"Toaster", "Microwave", "StoveBurner", "Pan", "Pot", "Bowl"});
  t.set(SubgoalPredicate::isClean, {"Sink", "Faucet"});
  t.set(SubgoalPredicate::isPickedUp, {});
  t.set(SubgoalPredicate::isFilledWithLiquid, {"Sink", "Faucet"});
  t.set(SubgoalPredicate::isEmptied, {"CounterTop", "DiningTable"});
  t.set(SubgoalPredicate::isSliced, {"Knife"});
  t.set(SubgoalPredicate::simbotIsFilledWithCoffee, {"CoffeeMachine"});
  t.set(SubgoalPredicate::isPlacedTo, {});
  t.set(SubgoalPredicate::isToggled, {});
  return t;
}

RelevanceTable RelevanceTable::from_json_file(const std::string& path) {
  RelevanceTable t = builtin();
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot read relevance table: " + path);
  nlohmann::json j;
  in >> j;
  for (auto& [key, val] : j.items()) {
    auto p = monitor::subgoal_predicate_from(key);
    if (!p) throw pddl::UnknownPredicate(key);
    t.set(*p, val.get<std::vector<std::string>>());
  }
  return t;
}

const std::vector<std::string>& RelevanceTable::categories(
    SubgoalPredicate p) const {
  auto it = table_.find(p);
  if (it == table_.end()) throw pddl::UnknownPredicate(to_string(p));
  return it->second;
}

void RelevanceTable::set(SubgoalPredicate p, std::vector<std::string> cats) {
  table_[p] = std::move(cats);
}

void RelevanceTable::validate(const pddl::DomainModel& domain) const {
  for (SubgoalPredicate p : monitor::all_subgoal_predicates()) {
    auto it = table_.find(p);
    if (it == table_.end()) throw pddl::UnknownPredicate(to_string(p));
    for (const auto& c : it->second)
      if (!domain.types.known(c)) throw pddl::UnknownCategory(c);
  }
}

std::vector<std::string> prune_scene(const BeliefSnapshot& belief,
                                     const Subgoal& subgoal,
                                     const RelevanceTable& relevance) {
  std::set<std::string> kept_cats;
  kept_cats.insert(subgoal.patient);
  if (subgoal.destination) kept_cats.insert(*subgoal.destination);
  if (subgoal.predicate == SubgoalPredicate::isSliced) {
    std::string src = aff().slice_source_of(subgoal.patient);
    if (!src.empty()) kept_cats.insert(src);
  }
  for (const auto& c : relevance.categories(subgoal.predicate)) kept_cats.insert(c);

  std::set<std::string> kept;
  for (const auto& i : belief.instances) {
    if (kept_cats.count(i.category)) kept.insert(i.id);
    if (i.held) kept.insert(i.id);
  }

  std::vector<const BeliefInstance*> all;
  for (const auto& i : belief.instances) all.push_back(&i);
  auto pairs = faucet_pairs(all);

  // transitive closure over containment/support ties and faucet pairing
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& i : belief.instances) {
      if (kept.count(i.id)) {
        if (!i.parent.empty() && !kept.count(i.parent) && belief.find(i.parent)) {
          kept.insert(i.parent);
          grew = true;
        }
      } else if (!i.parent.empty() && kept.count(i.parent)) {
        kept.insert(i.id);
        grew = true;
      }
    }
    for (const auto& [f, s] : pairs) {
      if (kept.count(f) && !kept.count(s)) { kept.insert(s); grew = true; }
      if (kept.count(s) && !kept.count(f)) { kept.insert(f); grew = true; }
    }
  }

  std::vector<std::string> out;
  for (const auto& i : belief.instances)
    if (kept.count(i.id)) out.push_back(i.id);
  return out;
}

ProblemModel build_problem(const PlanRequest& request,
                           const std::vector<std::string>& kept) {
  const pddl::DomainModel& domain = *request.domain;
  const BeliefSnapshot& belief = request.belief;
  ProblemModel p;
  p.name = "subgoal_problem";
  p.domain_name = domain.name;

  auto add_atom = [&](Atom a) {
    if (domain.find_predicate(a.pred)) p.init.push_back(std::move(a));
  };

  std::vector<const BeliefInstance*> insts;
  for (const auto& id : kept) {
    const BeliefInstance* i = belief.find(id);
    if (i && domain.types.known(i->category)) insts.push_back(i);
  }
  auto pairs = faucet_pairs(insts);
  std::set<std::string> kept_set;
  for (const auto* i : insts) kept_set.insert(i->id);

  for (const auto* i : insts) {
    p.objects.emplace_back(i->id, i->category);
    const sim::CategoryInfo* info = aff().find(i->category);

    if (i->held) {
      add_atom(atom1("isPickedUp", i->id));
    } else {
      if (i->visible_now) add_atom(atom1("isVisible", i->id));
      if (is_near_agent(*i, belief.agent)) add_atom(atom1("isNear", i->id));
    }

    for (const char* pred :
         {"isToggled", "isCooked", "isClean", "isSliced", "isFilledWithLiquid",
          "simbotIsFilledWithCoffee"})
      if (i->state_true(pred)) add_atom(atom1(pred, i->id));

    if (i->state_true("isOpen")) add_atom(atom1("isOpen", i->id));
    if (i->state_known_false("isOpen")) add_atom(atom1("isClosed", i->id));

    if (!i->parent.empty() && kept_set.count(i->parent)) {
      add_atom(atom2("parentReceptacles", i->id, i->parent));
      add_atom(atom2("isPlacedTo", i->id, i->parent));
      const BeliefInstance* parent = belief.find(i->parent);
      if (parent && i->parent_is_container && parent->state_known_false("isOpen"))
        add_atom(atom1("inClosed", i->id));
    }

    if (info) {
      // receptacles believed full stop being placement targets until
      // something is removed from them
      if (info->receptacle && !i->state_true("receptacleFull"))
        add_atom(atom1("receptacle", i->id));
      if (info->fillable) add_atom(atom1("fillable", i->id));
      if (info->sliceable) add_atom(atom1("sliceable", i->id));
      if (info->toggleable) add_atom(atom1("toggleable", i->id));
      if (info->is_food) add_atom(atom1("food", i->id));
      if (info->cooks_contained) add_atom(atom1("cooksContained", i->id));
      if (info->cooks_contained_closed)
        add_atom(atom1("cooksContainedClosed", i->id));
      if (info->stove_top) add_atom(atom1("stoveTop", i->id));
      if (info->brews_coffee) add_atom(atom1("brewsCoffee", i->id));
    }
  }
  for (const auto& [f, s] : pairs) add_atom(atom2("faucetOf", f, s));

  set_goal(p, request);
  return p;
}

ProblemModel inject_unobserved(const ProblemModel& problem,
                               const PlanRequest& request) {
  const pddl::DomainModel& domain = *request.domain;
  if (!domain.find_predicate("unobserved")) return problem;

  std::set<std::string> present_cats;
  for (const auto& [id, cat] : problem.objects) present_cats.insert(cat);

  std::vector<std::string> required;
  const Subgoal& sg = request.subgoal;
  // patient (via its slice source when applicable)
  {
    bool have_patient = present_cats.count(sg.patient) > 0;
    if (!have_patient && sg.predicate == SubgoalPredicate::isSliced) {
      std::string src = aff().slice_source_of(sg.patient);
      have_patient = !src.empty() && present_cats.count(src) > 0;
    }
    if (!have_patient) required.push_back(sg.patient);
  }
  if (sg.destination && !present_cats.count(*sg.destination))
    required.push_back(*sg.destination);
  // the predicate's enabler group: dummies only when the whole group is absent
  {
    const auto& rel = request.relevance_or_builtin().categories(sg.predicate);
    bool any = false;
    for (const auto& c : rel)
      if (present_cats.count(c)) any = true;
    if (!any)
      for (const auto& c : rel)
        if (!present_cats.count(c)) required.push_back(c);
  }

  if (required.empty()) return problem;

  ProblemModel out = problem;
  for (const auto& cat : required) {
    if (!domain.types.known(cat)) continue;
    std::string id = dummy_id(cat);
    out.objects.emplace_back(id, cat);
    out.init.push_back(atom1("unobserved", id));
    const sim::CategoryInfo* info = aff().find(cat);
    if (info) {
      auto add_atom = [&](Atom a) {
        if (domain.find_predicate(a.pred)) out.init.push_back(std::move(a));
      };
      if (info->receptacle) add_atom(atom1("receptacle", id));
      if (info->fillable) add_atom(atom1("fillable", id));
      if (info->sliceable) add_atom(atom1("sliceable", id));
      if (info->toggleable) add_atom(atom1("toggleable", id));
      if (info->is_food) add_atom(atom1("food", id));
      if (info->cooks_contained) add_atom(atom1("cooksContained", id));
      if (info->cooks_contained_closed) add_atom(atom1("cooksContainedClosed", id));
      if (info->stove_top) add_atom(atom1("stoveTop", id));
      if (info->brews_coffee) add_atom(atom1("brewsCoffee", id));
    }
  }
  set_goal(out, request);
  return out;
}

SubgoalPlan plan_subgoal(const PlanRequest& request) {
  auto t0 = std::chrono::steady_clock::now();
  SubgoalPlan result;

  if (request.prune) {
    result.kept = prune_scene(request.belief, request.subgoal,
                              request.relevance_or_builtin());
  } else {
    for (const auto& i : request.belief.instances) result.kept.push_back(i.id);
  }

  result.problem = build_problem(request, result.kept);
  if (request.allow_unobserved)
    result.problem = inject_unobserved(result.problem, request);

  if (!goal_bindable(result.problem, request)) {
    result.outcome.kind = OutcomeKind::NoSolution;
    result.plan_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  pddl::GroundedTask task = pddl::ground(*request.domain, result.problem);
  SearchOptions opts;
  opts.timeout_seconds = request.timeout;
  result.outcome = search_plan(task, opts);
  result.plan_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

bool subgoal_completed(const Subgoal& subgoal, const BeliefSnapshot& belief,
                       int required_count) {
  int satisfied = 0;
  std::string yield;
  if (subgoal.predicate == SubgoalPredicate::isSliced) {
    const sim::CategoryInfo* info = aff().find(subgoal.patient);
    if (info && !info->slice_yield.empty()) yield = info->slice_yield;
  }
  for (const auto& i : belief.instances) {
    if (i.category != subgoal.patient && (yield.empty() || i.category != yield))
      continue;
    if (instance_satisfies(i, subgoal, belief)) ++satisfied;
  }
  return satisfied >= required_count;
}

}  // namespace delib::planner
