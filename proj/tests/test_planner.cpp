#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "delib/planner/problem_builder.hpp"
#include "delib/planner/search.hpp"
#include "delib/sim/affordance.hpp"
#include "delib/util/rng.hpp"

using namespace delib;
using namespace delib::planner;
using delib::monitor::Subgoal;
using delib::monitor::SubgoalPredicate;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string data(const std::string& name) {
  return std::string(DELIB_TEST_DATA_DIR) + "/" + name;
}

const pddl::DomainModel& household() {
  static const pddl::DomainModel d = pddl::parse_domain(sim::household_domain_text());
  return d;
}

BeliefInstance inst(const std::string& id, const std::string& category,
                    Vec3 centroid, bool visible = true) {
  BeliefInstance i;
  i.id = id;
  i.category = category;
  size_t us = id.rfind('_');
  i.ordinal = us == std::string::npos ? 0 : std::stoi(id.substr(us + 1));
  i.centroid = centroid;
  i.visible_now = visible;
  return i;
}

}  // namespace

TEST_CASE("household domain parses and round-trips") {
  const pddl::DomainModel& d = household();
  CHECK(d.find_action("GoTo"));
  CHECK(d.find_action("Search"));
  CHECK(d.find_action("PickUp"));
  CHECK(d.find_action("Place"));
  CHECK(d.find_action("Pour"));
  CHECK(d.find_action("Search")->cost == 10);
  pddl::DomainModel d2 = pddl::parse_domain(pddl::serialize(d));
  CHECK(d == d2);
  RelevanceTable::builtin().validate(d);
}

TEST_CASE("appendix knife task solves to exactly PickUp(Knife_0)") {
  pddl::DomainModel d = pddl::parse_domain(read_file(data("knife_domain.pddl")));
  pddl::ProblemModel p =
      pddl::parse_problem(read_file(data("knife_problem.pddl")), d);
  pddl::GroundedTask task = pddl::ground(d, p);
  PlanOutcome out = search_plan(task);
  REQUIRE(out.kind == OutcomeKind::Solved);
  REQUIRE(out.plan.steps.size() == 1);
  CHECK(out.plan.steps[0].action == "Pickup");
  CHECK(out.plan.steps[0].args == std::vector<std::string>{"Knife_0"});
  CHECK(validate_plan(out.plan, task).ok);
}

TEST_CASE("goal already satisfied short-circuits") {
  pddl::DomainModel d = pddl::parse_domain(read_file(data("knife_domain.pddl")));
  pddl::ProblemModel p =
      pddl::parse_problem(read_file(data("knife_problem.pddl")), d);
  p.init.push_back(pddl::Atom{"isPickedUp", {pddl::obj("Knife_0")}});
  pddl::GroundedTask task = pddl::ground(d, p);
  CHECK(search_plan(task).kind == OutcomeKind::GoalAlreadySatisfied);
}

TEST_CASE("no solution when nothing can add the goal atom") {
  // two actions, neither adds q
  const char* dom =
      "(define (domain d) (:types A - Object) (:predicates (p ?x - A) (q ?x - A))"
      " (:action a1 :parameters (?x - A) :effect (p ?x))"
      " (:action a2 :parameters (?x - A) :precondition (p ?x) :effect (not (p ?x))))";
  pddl::DomainModel d = pddl::parse_domain(dom);
  pddl::ProblemModel p = pddl::parse_problem(
      "(define (problem q) (:domain d) (:objects a - A) (:init) (:goal (q a)))", d);
  CHECK(search_plan(pddl::ground(d, p)).kind == OutcomeKind::NoSolution);
}

TEST_CASE("validate_plan flags reordered plans with the failing step") {
  pddl::DomainModel d = pddl::parse_domain(
      "(define (domain d) (:types A - Object) (:predicates (p ?x - A) (q ?x - A))"
      " (:action first :parameters (?x - A) :effect (p ?x))"
      " (:action second :parameters (?x - A) :precondition (p ?x) :effect (q ?x)))");
  pddl::ProblemModel p = pddl::parse_problem(
      "(define (problem q) (:domain d) (:objects a - A) (:init) (:goal (q a)))", d);
  pddl::GroundedTask task = pddl::ground(d, p);

  PlanOutcome out = search_plan(task);
  REQUIRE(out.kind == OutcomeKind::Solved);
  REQUIRE(out.plan.steps.size() == 2);
  CHECK(validate_plan(out.plan, task).ok);

  MidLevelPlan reordered;
  reordered.steps = {out.plan.steps[1], out.plan.steps[0]};
  ValidationResult v = validate_plan(reordered, task);
  CHECK_FALSE(v.ok);
  CHECK(v.failing_step == 0);

  // empty plan on a satisfied goal validates
  pddl::ProblemModel p2 = p;
  p2.init.push_back(pddl::Atom{"q", {pddl::obj("a")}});
  pddl::GroundedTask task2 = pddl::ground(d, p2);
  CHECK(validate_plan(MidLevelPlan{}, task2).ok);
}

TEST_CASE("prune_scene keeps relevant categories and drops distractors") {
  BeliefSnapshot belief;
  belief.agent.cell = {8, 1};
  belief.instances.push_back(inst("Potato_0", "Potato", {1.0, 1.0, 0.9}));
  belief.instances.push_back(inst("Microwave_0", "Microwave", {2.0, 1.0, 1.0}));
  belief.instances.push_back(inst("Toaster_0", "Toaster", {3.0, 1.0, 1.0}));
  belief.instances.push_back(inst("Bed_0", "Bed", {3.5, 3.5, 0.3}));

  Subgoal sg{"Potato", SubgoalPredicate::isCooked, std::nullopt};
  auto kept = prune_scene(belief, sg, RelevanceTable::builtin());
  std::set<std::string> k(kept.begin(), kept.end());
  CHECK(k == std::set<std::string>{"Potato_0", "Microwave_0", "Toaster_0"});
}

TEST_CASE("prune_scene pulls in the containing receptacle") {
  BeliefSnapshot belief;
  belief.agent.cell = {8, 1};
  auto potato = inst("Potato_0", "Potato", {1.0, 1.0, 0.9});
  potato.parent = "Fridge_0";
  potato.parent_is_container = true;
  belief.instances.push_back(potato);
  belief.instances.push_back(inst("Fridge_0", "Fridge", {1.0, 1.0, 0.75}));
  belief.instances.push_back(inst("Toaster_0", "Toaster", {3.0, 1.0, 1.0}));

  Subgoal sg{"Potato", SubgoalPredicate::isCooked, std::nullopt};
  auto kept = prune_scene(belief, sg, RelevanceTable::builtin());
  std::set<std::string> k(kept.begin(), kept.end());
  CHECK(k.count("Fridge_0") == 1);

  BeliefSnapshot empty;
  empty.agent.cell = {1, 1};
  CHECK(prune_scene(empty, sg, RelevanceTable::builtin()).empty());
}

TEST_CASE("build_problem reproduces the appendix knife problem") {
  pddl::DomainModel knife_dom =
      pddl::parse_domain(read_file(data("knife_domain.pddl")));
  pddl::ProblemModel reference =
      pddl::parse_problem(read_file(data("knife_problem.pddl")), knife_dom);

  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(
      inst("Knife_0", "Knife", {1.125 + 0.25, 1.125, 0.9}));
  belief.instances.push_back(
      inst("DiningTable_0", "DiningTable", {1.125, 1.125 + 0.5, 0.4}));

  // isPickedUp has no relevance entry by default; this configuration keeps
  // the table as a known rest surface for the patient
  RelevanceTable rel = RelevanceTable::builtin();
  rel.set(SubgoalPredicate::isPickedUp, {"DiningTable"});

  PlanRequest req;
  req.subgoal = Subgoal{"Knife", SubgoalPredicate::isPickedUp, std::nullopt};
  req.belief = belief;
  req.domain = &knife_dom;
  req.relevance = &rel;

  auto kept = prune_scene(belief, req.subgoal, rel);
  pddl::ProblemModel built = build_problem(req, kept);

  auto as_sets = [](const pddl::ProblemModel& m) {
    return std::tuple{std::set(m.objects.begin(), m.objects.end()),
                      std::set(m.init.begin(), m.init.end())};
  };
  CHECK(as_sets(built) == as_sets(reference));
  CHECK(built.goal == reference.goal);
}

TEST_CASE("isPlacedTo goal binds a patient/destination pair") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(inst("BreadSlice_0", "BreadSlice", {1.0, 1.0, 0.9}));
  belief.instances.push_back(inst("Plate_0", "Plate", {2.0, 2.0, 0.8}));

  PlanRequest req;
  req.subgoal = Subgoal{"BreadSlice", SubgoalPredicate::isPlacedTo, "Plate"};
  req.belief = belief;
  req.domain = &household();

  auto kept = prune_scene(belief, req.subgoal, RelevanceTable::builtin());
  pddl::ProblemModel p = build_problem(req, kept);
  REQUIRE(p.goal.kind == pddl::FormulaKind::Atom);
  CHECK(p.goal.atom.pred == "isPlacedTo");
  CHECK(p.goal.atom.args[0].name == "BreadSlice_0");
  CHECK(p.goal.atom.args[1].name == "Plate_0");
}

TEST_CASE("satisfied subgoal builds a problem whose goal holds in init") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  auto knife = inst("Knife_0", "Knife", {1.0, 1.0, 0.9});
  knife.held = true;
  knife.states["isPickedUp"] = true;
  belief.instances.push_back(knife);

  PlanRequest req;
  req.subgoal = Subgoal{"Knife", SubgoalPredicate::isPickedUp, std::nullopt};
  req.belief = belief;
  req.domain = &household();

  SubgoalPlan sp = plan_subgoal(req);
  CHECK(sp.outcome.kind == OutcomeKind::GoalAlreadySatisfied);
  CHECK(subgoal_completed(req.subgoal, belief));
}

TEST_CASE("inject_unobserved: missing mug plans Search, GoTo, PickUp") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(inst("CounterTop_0", "CounterTop", {1.0, 1.0, 0.4}));

  PlanRequest req;
  req.subgoal = Subgoal{"Mug", SubgoalPredicate::isPickedUp, std::nullopt};
  req.belief = belief;
  req.domain = &household();

  SubgoalPlan sp = plan_subgoal(req);
  REQUIRE(sp.outcome.kind == OutcomeKind::Solved);
  std::vector<std::string> names;
  for (const auto& s : sp.outcome.plan.steps) names.push_back(s.action);
  CHECK(names == std::vector<std::string>{"Search", "GoTo", "PickUp"});
  for (const auto& s : sp.outcome.plan.steps)
    CHECK(s.args[0] == "Mug_u0");
}

TEST_CASE("inject_unobserved: observed mug means no dummy, no Search") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(inst("Mug_0", "Mug", {2.0, 2.0, 0.9}));

  PlanRequest req;
  req.subgoal = Subgoal{"Mug", SubgoalPredicate::isPickedUp, std::nullopt};
  req.belief = belief;
  req.domain = &household();

  SubgoalPlan sp = plan_subgoal(req);
  REQUIRE(sp.outcome.kind == OutcomeKind::Solved);
  for (const auto& s : sp.outcome.plan.steps) {
    CHECK(s.action != "Search");
    CHECK(s.args[0] != "Mug_u0");
  }
}

TEST_CASE("inject_unobserved: dummy only for the missing enabler category") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(inst("Mug_0", "Mug", {3.0, 3.0, 0.9}));  // far

  PlanRequest req;
  req.subgoal =
      Subgoal{"Mug", SubgoalPredicate::simbotIsFilledWithCoffee, std::nullopt};
  req.belief = belief;
  req.domain = &household();

  auto kept = prune_scene(belief, req.subgoal, RelevanceTable::builtin());
  pddl::ProblemModel p = build_problem(req, kept);
  pddl::ProblemModel injected = inject_unobserved(p, req);

  std::set<std::string> dummies;
  for (const auto& [id, cat] : injected.objects)
    if (id.ends_with("_u0")) dummies.insert(id);
  CHECK(dummies == std::set<std::string>{"CoffeeMachine_u0"});
}

TEST_CASE("coffee subgoal plans through place and toggle") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(inst("Mug_0", "Mug", {1.0, 1.0, 0.9}));
  belief.instances.push_back(
      inst("CoffeeMachine_0", "CoffeeMachine", {3.0, 1.0, 1.0}));

  PlanRequest req;
  req.subgoal =
      Subgoal{"Mug", SubgoalPredicate::simbotIsFilledWithCoffee, std::nullopt};
  req.belief = belief;
  req.domain = &household();

  SubgoalPlan sp = plan_subgoal(req);
  REQUIRE(sp.outcome.kind == OutcomeKind::Solved);
  pddl::GroundedTask task = pddl::ground(household(), sp.problem);
  CHECK(validate_plan(sp.outcome.plan, task).ok);
  bool has_toggle = false;
  for (const auto& s : sp.outcome.plan.steps)
    if (s.action == "ToggleOn") has_toggle = true;
  CHECK(has_toggle);
}

TEST_CASE("plan determinism: identical requests yield identical plans") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(inst("Mug_0", "Mug", {1.0, 2.0, 0.9}));
  belief.instances.push_back(inst("Mug_1", "Mug", {2.0, 1.0, 0.9}));
  belief.instances.push_back(inst("Sink_0", "Sink", {3.0, 1.0, 0.5}));
  belief.instances.push_back(inst("Faucet_0", "Faucet", {3.0, 0.75, 1.2}));

  PlanRequest req;
  req.subgoal = Subgoal{"Mug", SubgoalPredicate::isClean, std::nullopt};
  req.belief = belief;
  req.domain = &household();

  SubgoalPlan a = plan_subgoal(req);
  SubgoalPlan b = plan_subgoal(req);
  REQUIRE(a.outcome.kind == OutcomeKind::Solved);
  CHECK(a.outcome.plan == b.outcome.plan);
  CHECK(a.problem == b.problem);
}

TEST_CASE("search preference: no Search when an observed instance suffices") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(inst("Potato_0", "Potato", {1.0, 1.0, 0.9}));
  belief.instances.push_back(inst("Toaster_0", "Toaster", {3.0, 1.0, 1.0}));
  // pan/pot/microwave absent, but the enabler group has an instance

  PlanRequest req;
  req.subgoal = Subgoal{"Potato", SubgoalPredicate::isCooked, std::nullopt};
  req.belief = belief;
  req.domain = &household();

  SubgoalPlan sp = plan_subgoal(req);
  REQUIRE(sp.outcome.kind == OutcomeKind::Solved);
  for (const auto& s : sp.outcome.plan.steps) CHECK(s.action != "Search");
}

TEST_CASE("isEmptied goal translates to not-parentReceptacles conjunction") {
  BeliefSnapshot belief;
  belief.agent.cell = {4, 4};
  belief.instances.push_back(inst("Sink_0", "Sink", {1.0, 1.0, 0.5}));
  auto fork = inst("Fork_0", "Fork", {1.0, 1.0, 0.6});
  fork.parent = "Sink_0";
  fork.parent_is_container = true;
  belief.instances.push_back(fork);
  belief.instances.push_back(inst("CounterTop_0", "CounterTop", {2.0, 1.0, 0.4}));

  PlanRequest req;
  req.subgoal = Subgoal{"Sink", SubgoalPredicate::isEmptied, std::nullopt};
  req.belief = belief;
  req.domain = &household();

  SubgoalPlan sp = plan_subgoal(req);
  REQUIRE(sp.outcome.kind == OutcomeKind::Solved);
  pddl::GroundedTask task = pddl::ground(household(), sp.problem);
  CHECK(validate_plan(sp.outcome.plan, task).ok);
  CHECK_FALSE(subgoal_completed(req.subgoal, belief));
}

TEST_CASE("soundness fuzz: random scenes, solved plans validate") {
  Rng rng(777);
  const std::vector<std::string> cats = {"Mug",  "Cup",    "Potato", "Bread",
                                         "Knife", "Plate", "Fork"};
  const std::vector<std::string> fixtures = {
      "Sink", "Faucet", "Toaster", "CoffeeMachine", "CounterTop", "StoveBurner",
      "Microwave", "Pot"};
  const std::vector<SubgoalPredicate> preds = {
      SubgoalPredicate::isPickedUp, SubgoalPredicate::isCooked,
      SubgoalPredicate::isClean,    SubgoalPredicate::isFilledWithLiquid,
      SubgoalPredicate::isSliced,   SubgoalPredicate::simbotIsFilledWithCoffee,
      SubgoalPredicate::isToggled,  SubgoalPredicate::isPlacedTo};

  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    BeliefSnapshot belief;
    belief.agent.cell = {6, 6};
    int n = 3 + static_cast<int>(rng.below(6));
    std::map<std::string, int> ordinals;
    for (int i = 0; i < n; ++i) {
      const auto& pool = rng.chance(0.5) ? cats : fixtures;
      std::string cat = pool[rng.below(pool.size())];
      int ord = ordinals[cat]++;
      auto bi = inst(cat + "_" + std::to_string(ord), cat,
                     {0.5 + rng.uniform() * 3.0, 0.5 + rng.uniform() * 3.0, 0.9});
      belief.instances.push_back(bi);
    }
    SubgoalPredicate pred = preds[rng.below(preds.size())];
    std::string patient = cats[rng.below(cats.size())];
    Subgoal sg;
    sg.patient = patient;
    sg.predicate = pred;
    if (pred == SubgoalPredicate::isPlacedTo) sg.destination = "CounterTop";
    if (pred == SubgoalPredicate::isToggled) {
      sg.patient = "Faucet";
    }

    PlanRequest req;
    req.subgoal = sg;
    req.belief = belief;
    req.domain = &household();
    req.timeout = 30;

    SubgoalPlan sp = plan_subgoal(req);
    if (sp.outcome.kind == OutcomeKind::Solved) {
      ++solved;
      pddl::GroundedTask task = pddl::ground(household(), sp.problem);
      ValidationResult v = validate_plan(sp.outcome.plan, task);
      if (!v.ok) {
        CAPTURE(trial);
        CAPTURE(sg.str());
        CAPTURE(v.detail);
      }
      REQUIRE(v.ok);
    }
  }
  CHECK(solved >= 60);  // plenty of the random pairs must actually solve
}

TEST_CASE("pruning equivalence on distractor scenes") {
  Rng rng(4242);
  const std::vector<std::string> distractor_cats = {
      "Fork", "Spoon", "Book", "Vase", "Pen", "Watch", "CellPhone"};
  for (int trial = 0; trial < 20; ++trial) {
    BeliefSnapshot belief;
    belief.agent.cell = {6, 6};
    belief.instances.push_back(inst("Potato_0", "Potato", {1.0, 1.0, 0.9}));
    belief.instances.push_back(inst("Toaster_0", "Toaster", {3.0, 1.0, 1.0}));
    std::map<std::string, int> ordinals;
    for (int i = 0; i < 40; ++i) {
      std::string cat = distractor_cats[rng.below(distractor_cats.size())];
      int ord = ordinals[cat]++;
      belief.instances.push_back(
          inst(cat + "_" + std::to_string(ord), cat,
               {0.5 + rng.uniform() * 3.0, 0.5 + rng.uniform() * 3.0, 0.9}));
    }

    PlanRequest req;
    req.subgoal = Subgoal{"Potato", SubgoalPredicate::isCooked, std::nullopt};
    req.belief = belief;
    req.domain = &household();

    SubgoalPlan pruned = plan_subgoal(req);
    req.prune = false;
    SubgoalPlan unpruned = plan_subgoal(req);
    CHECK(pruned.outcome.kind == unpruned.outcome.kind);
  }
}
