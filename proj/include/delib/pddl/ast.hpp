#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "delib/pddl/errors.hpp"

namespace delib::pddl {

inline constexpr const char* kRootCategory = "Object";

// Category taxonomy: every non-root category has exactly one parent,
// rooted at "Object". Subtype test is reflexive and transitive.
class CategoryHierarchy {
 public:
  void declare(const std::string& cat, const std::string& parent);
  bool known(const std::string& cat) const;
  bool is_subtype(const std::string& cat, const std::string& ancestor) const;
  const std::string& parent_of(const std::string& cat) const;
  const std::map<std::string, std::string>& entries() const { return parent_; }

  bool operator==(const CategoryHierarchy&) const = default;

 private:
  std::map<std::string, std::string> parent_;  // category -> parent
};

struct Term {
  bool is_var = false;
  std::string name;  // variables keep the leading '?'
  auto operator<=>(const Term&) const = default;
};

inline Term var(std::string n) { return {true, std::move(n)}; }
inline Term obj(std::string n) { return {false, std::move(n)}; }

struct Atom {
  std::string pred;
  std::vector<Term> args;
  auto operator<=>(const Atom&) const = default;
  std::string str() const;
};

enum class FormulaKind { True, Atom, Not, And, Forall, When, Equal };

// Formula covers both preconditions/goals and effects. After parsing:
// Not appears only over Atom/Equal outside effects; When only inside effects.
struct Formula {
  FormulaKind kind = FormulaKind::True;
  Atom atom;                       // Atom
  std::vector<Formula> children;   // Not:1, And:n, Forall:1, When:2 (cond, eff)
  std::string var, var_type;       // Forall binder
  Term lhs, rhs;                   // Equal

  bool operator==(const Formula&) const = default;

  static Formula truth() { return {}; }
  static Formula mk_atom(Atom a) {
    Formula f; f.kind = FormulaKind::Atom; f.atom = std::move(a); return f;
  }
  static Formula mk_not(Formula f) {
    Formula n; n.kind = FormulaKind::Not; n.children.push_back(std::move(f)); return n;
  }
  static Formula mk_and(std::vector<Formula> fs) {
    Formula n; n.kind = FormulaKind::And; n.children = std::move(fs); return n;
  }
  static Formula mk_forall(std::string v, std::string t, Formula body) {
    Formula n; n.kind = FormulaKind::Forall; n.var = std::move(v);
    n.var_type = std::move(t); n.children.push_back(std::move(body)); return n;
  }
  static Formula mk_when(Formula cond, Formula eff) {
    Formula n; n.kind = FormulaKind::When;
    n.children.push_back(std::move(cond)); n.children.push_back(std::move(eff));
    return n;
  }
  static Formula mk_equal(Term a, Term b) {
    Formula n; n.kind = FormulaKind::Equal; n.lhs = std::move(a); n.rhs = std::move(b);
    return n;
  }
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> param_types;  // category per position
  bool operator==(const PredicateDecl&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;  // (?var, category)
  Formula precondition;  // True if omitted
  Formula effect;
  int cost = 1;
  bool operator==(const ActionSchema&) const = default;
};

struct DomainModel {
  std::string name;
  std::vector<std::string> requirements;  // canonical order, validated subset
  CategoryHierarchy types;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;
  bool has_total_cost = false;  // (:functions (total-cost)) present

  const PredicateDecl* find_predicate(const std::string& name) const;
  const ActionSchema* find_action(const std::string& name) const;
  bool operator==(const DomainModel&) const = default;
};

struct ProblemModel {
  std::string name;
  std::string domain_name;
  std::vector<std::pair<std::string, std::string>> objects;  // (name, category)
  std::vector<Atom> init;  // ground atoms
  Formula goal;

  std::optional<std::string> category_of(const std::string& object) const;
  bool operator==(const ProblemModel&) const = default;
};

// Model-level symbolic state: set of ground atoms, closed world.
using AtomSet = std::set<Atom>;

// Closed-world evaluation of a precondition/goal-style formula under a
// variable binding. Forall ranges over problem objects of the binder type.
bool holds(const Formula& f, const AtomSet& state,
           const std::map<std::string, std::string>& binding,
           const DomainModel& domain, const ProblemModel& problem);

}  // namespace delib::pddl
