#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "delib/pddl/ground.hpp"
#include "delib/pddl/parser.hpp"
#include "delib/util/rng.hpp"

using namespace delib;
using namespace delib::pddl;

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

Atom ga(const std::string& pred, std::vector<std::string> args) {
  Atom a;
  a.pred = pred;
  for (auto& s : args) a.args.push_back(obj(s));
  return a;
}

}  // namespace

TEST_CASE("knife domain parses with conditional effect") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  CHECK(d.name == "knife_domain");
  CHECK(d.requirements.size() == 4);
  CHECK(d.types.is_subtype("Knife", "Pickupable"));
  CHECK(d.types.is_subtype("Knife", "Object"));
  CHECK(d.types.is_subtype("DiningTable", "Receptacle"));
  CHECK_FALSE(d.types.is_subtype("Knife", "Receptacle"));

  const ActionSchema* pickup = d.find_action("Pickup");
  REQUIRE(pickup != nullptr);
  CHECK(pickup->params.size() == 1);
  CHECK(pickup->params[0].second == "Pickupable");

  // the effect carries a Forall containing a When
  bool found_forall_when = false;
  REQUIRE(pickup->effect.kind == FormulaKind::And);
  for (const auto& c : pickup->effect.children) {
    if (c.kind == FormulaKind::Forall &&
        c.children[0].kind == FormulaKind::When)
      found_forall_when = true;
  }
  CHECK(found_forall_when);
}

TEST_CASE("empty domain accepted, unsupported requirement rejected") {
  DomainModel d = parse_domain("(define (domain d) (:requirements :strips))");
  CHECK(d.actions.empty());
  CHECK(d.name == "d");

  CHECK_THROWS_AS(
      parse_domain("(define (domain d) (:requirements :numeric-fluents))"),
      UnsupportedRequirement);
}

TEST_CASE("syntax and semantic errors carry location/context") {
  try {
    parse_domain("(define (domain d) (:types A - ");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line >= 1);
    CHECK(!e.expected.empty());
  }

  CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x - Ghost)))"),
                  UnknownCategory);
}

TEST_CASE("unknown predicate in action body") {
  CHECK_THROWS_AS(
      parse_domain(
          "(define (domain d) (:types A - Object) (:predicates (p ?x - A))"
          " (:action go :parameters (?x - A) :precondition (q ?x) :effect (p ?x)))"),
      UnknownPredicate);
}

TEST_CASE("knife problem parses and validates") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  ProblemModel p = parse_problem(read_file(data("knife_problem.pddl")), d);
  CHECK(p.name == "knife_problem");
  REQUIRE(p.objects.size() == 2);
  CHECK(p.objects[0] == std::pair<std::string, std::string>{"Knife_0", "Knife"});
  CHECK(p.objects[1] ==
        std::pair<std::string, std::string>{"DiningTable_0", "DiningTable"});
  CHECK(p.init.size() == 4);
  REQUIRE(p.goal.kind == FormulaKind::Atom);
  CHECK(p.goal.atom == ga("isPickedUp", {"Knife_0"}));
}

TEST_CASE("problem errors") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  CHECK_THROWS_AS(
      parse_problem("(define (problem p) (:domain knife_domain)"
                    " (:objects Ghost_0 - Ghost) (:init) (:goal (and)))",
                    d),
      TypeMismatch);

  ProblemModel empty_init = parse_problem(
      "(define (problem p) (:domain knife_domain)"
      " (:objects Knife_0 - Knife) (:init) (:goal (isPickedUp Knife_0)))",
      d);
  CHECK(empty_init.init.empty());
}

TEST_CASE("round trip reparses to structurally equal models") {
  DomainModel d1 = parse_domain(read_file(data("knife_domain.pddl")));
  DomainModel d2 = parse_domain(serialize(d1));
  CHECK(d1 == d2);
  CHECK(serialize(d1) == serialize(d2));

  ProblemModel p1 = parse_problem(read_file(data("knife_problem.pddl")), d1);
  ProblemModel p2 = parse_problem(serialize(p1, d1), d2);
  CHECK(p1 == p2);
}

TEST_CASE("action keyword spelling accepted both ways") {
  const char* with_colon =
      "(define (domain d) (:types A - Object) (:predicates (p ?x - A))"
      " (:action go :parameters (?x - A) :effect (p ?x)))";
  const char* without_colon =
      "(define (domain d) (:types A - Object) (:predicates (p ?x - A))"
      " (action go :parameters (?x - A) :effect (p ?x)))";
  CHECK(parse_domain(with_colon) == parse_domain(without_colon));
}

TEST_CASE("action costs parsed and serialized") {
  const char* text =
      "(define (domain d) (:requirements :action-costs)"
      " (:types A - Object) (:predicates (p ?x - A)) (:functions (total-cost))"
      " (:action go :parameters (?x - A) :effect (and (p ?x)"
      "   (increase (total-cost) 10))))";
  DomainModel d = parse_domain(text);
  CHECK(d.actions[0].cost == 10);
  DomainModel d2 = parse_domain(serialize(d));
  CHECK(d == d2);
}

TEST_CASE("holds: closed world, forall, and") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  ProblemModel p = parse_problem(read_file(data("knife_problem.pddl")), d);

  AtomSet s;
  s.insert(ga("isNear", {"Knife_0"}));

  CHECK_FALSE(holds(Formula::mk_atom(ga("isVisible", {"Knife_0"})), s, {}, d, p));
  CHECK(holds(Formula::mk_not(Formula::mk_atom(ga("isVisible", {"Knife_0"}))), s,
              {}, d, p));

  // (forall (?z - Pickupable) (not (isPickedUp ?z))) with no isPickedUp atoms
  Formula f = Formula::mk_forall(
      "?z", "Pickupable",
      Formula::mk_not(Formula::mk_atom(Atom{"isPickedUp", {var("?z")}})));
  CHECK(holds(f, s, {}, d, p));
  s.insert(ga("isPickedUp", {"Knife_0"}));
  CHECK_FALSE(holds(f, s, {}, d, p));

  Formula conj = Formula::mk_and(
      {Formula::mk_atom(ga("isNear", {"Knife_0"})),
       Formula::mk_atom(ga("isVisible", {"Knife_0"}))});
  CHECK_FALSE(holds(conj, s, {}, d, p));

  CHECK_THROWS_AS(
      holds(Formula::mk_atom(Atom{"isNear", {var("?v")}}), s, {}, d, p),
      UnboundVariable);
}

TEST_CASE("closed world: holds(not a) == !holds(a) for all ground atoms") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  ProblemModel p = parse_problem(read_file(data("knife_problem.pddl")), d);
  AtomSet s;
  s.insert(ga("isNear", {"Knife_0"}));
  s.insert(ga("parentReceptacles", {"Knife_0", "DiningTable_0"}));

  for (const auto& pd : d.predicates) {
    if (pd.param_types.size() == 1) {
      for (const auto& [o, cat] : p.objects) {
        Atom a = ga(pd.name, {o});
        Formula fa = Formula::mk_atom(a);
        CHECK(holds(Formula::mk_not(fa), s, {}, d, p) == !holds(fa, s, {}, d, p));
      }
    }
  }
}

TEST_CASE("grounding: knife task has exactly one Pickup") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  ProblemModel p = parse_problem(read_file(data("knife_problem.pddl")), d);
  GroundedTask t = ground(d, p);
  REQUIRE(t.actions.size() == 1);
  CHECK(t.actions[0].name == "Pickup");
  CHECK(t.actions[0].args == std::vector<std::string>{"Knife_0"});
}

TEST_CASE("grounding: 3x3 bindings for a binary same-category action") {
  const char* text =
      "(define (domain d) (:types A - Object) (:predicates (p ?x - A ?y - A))"
      " (:action rel :parameters (?x - A ?y - A) :effect (p ?x ?y)))";
  DomainModel d = parse_domain(text);
  ProblemModel p = parse_problem(
      "(define (problem q) (:domain d)"
      " (:objects a1 a2 a3 - A) (:init) (:goal (and)))",
      d);
  GroundedTask t = ground(d, p);
  CHECK(t.actions.size() == 9);  // self-bindings allowed

  // with an equality guard, self-bindings are excluded
  const char* guarded =
      "(define (domain d) (:types A - Object) (:predicates (p ?x - A ?y - A))"
      " (:action rel :parameters (?x - A ?y - A)"
      "  :precondition (not (= ?x ?y)) :effect (p ?x ?y)))";
  GroundedTask t2 = ground(parse_domain(guarded), p);
  CHECK(t2.actions.size() == 6);
}

TEST_CASE("grounding: zero objects of the parameter type") {
  const char* text =
      "(define (domain d) (:types A B - Object) (:predicates (p ?x - A))"
      " (:action go :parameters (?x - A) :effect (p ?x)))";
  DomainModel d = parse_domain(text);
  ProblemModel p = parse_problem(
      "(define (problem q) (:domain d) (:objects b1 - B) (:init) (:goal (and)))", d);
  CHECK(ground(d, p).actions.empty());
}

TEST_CASE("grounding explosion cap") {
  const char* text =
      "(define (domain d) (:types A - Object) (:predicates (p ?x - A ?y - A))"
      " (:action rel :parameters (?x - A ?y - A ?z - A ?w - A) :effect (p ?x ?y)))";
  DomainModel d = parse_domain(text);
  std::string prob = "(define (problem q) (:domain d) (:objects";
  for (int i = 0; i < 40; ++i) prob += " a" + std::to_string(i);
  prob += " - A) (:init) (:goal (and)))";
  ProblemModel p = parse_problem(prob, d);
  GroundOptions opts;
  opts.max_actions = 100000;
  CHECK_THROWS_AS(ground(d, p, opts), GroundingExplosion);  // 40^4 = 2.56M
}

TEST_CASE("grounding completeness on random small domains") {
  // oracle: product over parameters of objects whose category fits,
  // computed by independent enumeration over the problem object list
  Rng rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    int n_cats = 1 + static_cast<int>(rng.below(3));
    int n_schemas = 1 + static_cast<int>(rng.below(3));
    int n_objs = 1 + static_cast<int>(rng.below(5));

    std::string dom = "(define (domain rd) (:types";
    for (int c = 0; c < n_cats; ++c) dom += " C" + std::to_string(c);
    dom += " - Object) (:predicates (p ?x - Object))";
    std::vector<int> arities;
    std::vector<std::vector<int>> schema_cats;
    for (int a = 0; a < n_schemas; ++a) {
      int arity = 1 + static_cast<int>(rng.below(2));
      arities.push_back(arity);
      dom += " (:action act" + std::to_string(a) + " :parameters (";
      std::vector<int> cats;
      for (int k = 0; k < arity; ++k) {
        int c = static_cast<int>(rng.below(n_cats));
        cats.push_back(c);
        dom += "?v" + std::to_string(k) + " - C" + std::to_string(c) + " ";
      }
      schema_cats.push_back(cats);
      dom += ") :effect (p ?v0))";
    }
    dom += ")";

    std::string prob = "(define (problem rp) (:domain rd) (:objects";
    std::vector<int> obj_cat;
    for (int o = 0; o < n_objs; ++o) {
      int c = static_cast<int>(rng.below(n_cats));
      obj_cat.push_back(c);
      prob += " o" + std::to_string(o) + " - C" + std::to_string(c);
    }
    prob += ") (:init) (:goal (and)))";

    DomainModel d = parse_domain(dom);
    ProblemModel p = parse_problem(prob, d);
    GroundedTask t = ground(d, p);

    size_t expected = 0;
    for (int a = 0; a < n_schemas; ++a) {
      size_t combos = 1;
      for (int c : schema_cats[a]) {
        size_t n = 0;
        for (int oc : obj_cat)
          if (oc == c) ++n;
        combos *= n;
      }
      expected += combos;
    }
    CHECK(t.actions.size() == expected);
  }
}

TEST_CASE("apply: pickup removes parent atoms, conditional children picked") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  ProblemModel p = parse_problem(read_file(data("knife_problem.pddl")), d);
  // add a containment fact so the parent-clearing forall has work to do
  p.init.push_back(ga("parentReceptacles", {"Knife_0", "DiningTable_0"}));

  GroundedTask t = ground(d, p);
  REQUIRE(t.actions.size() == 1);
  SymState next = apply(t.actions[0], t.init, t);

  auto has = [&](const Atom& a) {
    int64_t id = t.atoms.lookup(a);
    return id >= 0 && state_contains(next, static_cast<AtomId>(id));
  };
  CHECK(has(ga("isPickedUp", {"Knife_0"})));
  CHECK_FALSE(has(ga("parentReceptacles", {"Knife_0", "DiningTable_0"})));
}

TEST_CASE("apply: precondition violated when hand is full") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  std::string prob = read_file(data("knife_problem.pddl"));
  ProblemModel p = parse_problem(prob, d);
  p.objects.emplace_back("Knife_1", "Knife");
  p.init.push_back(ga("isNear", {"Knife_1"}));
  p.init.push_back(ga("isPickedUp", {"Knife_1"}));

  GroundedTask t = ground(d, p);
  const pddl::GroundedAction* pick0 = nullptr;
  for (const auto& a : t.actions)
    if (a.args == std::vector<std::string>{"Knife_0"}) pick0 = &a;
  REQUIRE(pick0 != nullptr);
  CHECK_THROWS_AS(apply(*pick0, t.init, t), PreconditionViolated);
}

TEST_CASE("apply is deterministic") {
  DomainModel d = parse_domain(read_file(data("knife_domain.pddl")));
  ProblemModel p = parse_problem(read_file(data("knife_problem.pddl")), d);
  GroundedTask t = ground(d, p);
  SymState a = apply(t.actions[0], t.init, t);
  SymState b = apply(t.actions[0], t.init, t);
  CHECK(a == b);
}

// Conditional-effect semantics against hand-executed expectations: every
// When condition is evaluated on the pre-state, deletes before adds.
TEST_CASE("conditional effects: hand-executed oracle cases") {
  const char* text =
      "(define (domain cd) (:types A - Object)"
      " (:predicates (p ?x - A) (q ?x - A) (r ?x - A))"
      " (:action flip :parameters (?x - A)"
      "  :effect (and (when (p ?x) (q ?x)) (when (q ?x) (not (p ?x)))))"
      " (:action swap :parameters (?x - A)"
      "  :effect (and (when (p ?x) (and (not (p ?x)) (q ?x)))"
      "               (when (q ?x) (and (not (q ?x)) (p ?x)))))"
      " (:action addel :parameters (?x - A)"
      "  :effect (and (p ?x) (not (p ?x)) (r ?x)))"
      " (:action chain :parameters (?x - A)"
      "  :effect (and (p ?x) (when (p ?x) (q ?x)))))";
  DomainModel d = parse_domain(text);
  ProblemModel p = parse_problem(
      "(define (problem cp) (:domain cd) (:objects a - A) (:init) (:goal (and)))",
      d);
  GroundedTask t = ground(d, p);

  auto id = [&](const char* pred) {
    return static_cast<AtomId>(t.atoms.lookup(ga(pred, {"a"})));
  };
  auto st = [&](std::vector<AtomId> v) { return make_state(std::move(v)); };
  const AtomId P = id("p"), Q = id("q"), R = id("r");

  const pddl::GroundedAction *flip = nullptr, *swap = nullptr, *addel = nullptr,
                             *chain = nullptr;
  for (const auto& a : t.actions) {
    if (a.name == "flip") flip = &a;
    if (a.name == "swap") swap = &a;
    if (a.name == "addel") addel = &a;
    if (a.name == "chain") chain = &a;
  }
  REQUIRE((flip && swap && addel && chain));

  // 1. flip on {p}: p true -> add q; q false in pre -> keep p
  CHECK(apply(*flip, st({P}), t) == st({P, Q}));
  // 2. flip on {p,q}: add q, delete p
  CHECK(apply(*flip, st({P, Q}), t) == st({Q}));
  // 3. flip on {q}: no add (p false), delete p (noop)
  CHECK(apply(*flip, st({Q}), t) == st({Q}));
  // 4. flip on {}: nothing fires
  CHECK(apply(*flip, st({}), t) == st({}));
  // 5. swap on {p}: -> {q}
  CHECK(apply(*swap, st({P}), t) == st({Q}));
  // 6. swap on {q}: -> {p}
  CHECK(apply(*swap, st({Q}), t) == st({P}));
  // 7. swap on {p,q}: both fire on pre-state -> {p,q}
  CHECK(apply(*swap, st({P, Q}), t) == st({P, Q}));
  // 8. addel on {}: add wins over delete within one action -> {p,r}
  CHECK(apply(*addel, st({}), t) == st({P, R}));
  // 9. chain on {}: unconditional add p, but (when (p)) is false in pre -> {p}
  CHECK(apply(*chain, st({}), t) == st({P}));
  // 10. chain on {p}: when fires -> {p,q}
  CHECK(apply(*chain, st({P}), t) == st({P, Q}));
}

TEST_CASE("unknown constructs are hard errors") {
  CHECK_THROWS_AS(
      parse_domain("(define (domain d) (:types A - Object) (:predicates (p ?x - A))"
                   " (:action go :parameters (?x - A)"
                   "  :precondition (or (p ?x) (p ?x)) :effect (p ?x)))"),
      SyntaxError);
  CHECK_THROWS_AS(parse_domain("(define (domain d) (:derived-predicates))"),
                  SyntaxError);
}
