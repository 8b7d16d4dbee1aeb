#include "delib/pddl/ast.hpp"

namespace delib::pddl {

void CategoryHierarchy::declare(const std::string& cat, const std::string& parent) {
  if (cat == kRootCategory) return;
  auto it = parent_.find(cat);
  if (it != parent_.end()) {
    // Re-declaration is fine when consistent or when the earlier entry was an
    // auto-declared placeholder under the root.
    if (it->second == parent) return;
    if (it->second == kRootCategory) { it->second = parent; }
    else if (parent == kRootCategory) { return; }
    else throw TypeMismatch(cat, parent);
  } else {
    parent_[cat] = parent;
  }
  if (parent != kRootCategory && !parent_.count(parent)) {
    parent_[parent] = kRootCategory;
  }
  // acyclicity
  std::string cur = cat;
  int steps = 0;
  while (cur != kRootCategory) {
    auto p = parent_.find(cur);
    if (p == parent_.end()) break;
    cur = p->second;
    if (++steps > static_cast<int>(parent_.size()) + 1) throw TypeMismatch(cat, parent);
  }
}

bool CategoryHierarchy::known(const std::string& cat) const {
  return cat == kRootCategory || parent_.count(cat) > 0;
}

bool CategoryHierarchy::is_subtype(const std::string& cat,
                                   const std::string& ancestor) const {
  if (ancestor == kRootCategory) return known(cat);
  std::string cur = cat;
  while (true) {
    if (cur == ancestor) return true;
    if (cur == kRootCategory) return false;
    auto it = parent_.find(cur);
    if (it == parent_.end()) return false;
    cur = it->second;
  }
}

const std::string& CategoryHierarchy::parent_of(const std::string& cat) const {
  static const std::string root = kRootCategory;
  auto it = parent_.find(cat);
  return it == parent_.end() ? root : it->second;
}

std::string Atom::str() const {
  std::string s = "(" + pred;
  for (const auto& t : args) s += " " + t.name;
  return s + ")";
}

const PredicateDecl* DomainModel::find_predicate(const std::string& n) const {
  for (const auto& p : predicates)
    if (p.name == n) return &p;
  return nullptr;
}

const ActionSchema* DomainModel::find_action(const std::string& n) const {
  for (const auto& a : actions)
    if (a.name == n) return &a;
  return nullptr;
}

std::optional<std::string> ProblemModel::category_of(const std::string& object) const {
  for (const auto& [name, cat] : objects)
    if (name == object) return cat;
  return std::nullopt;
}

namespace {

std::string resolve(const Term& t, const std::map<std::string, std::string>& binding) {
  if (!t.is_var) return t.name;
  auto it = binding.find(t.name);
  if (it == binding.end()) throw UnboundVariable(t.name);
  return it->second;
}

}  // namespace

bool holds(const Formula& f, const AtomSet& state,
           const std::map<std::string, std::string>& binding,
           const DomainModel& domain, const ProblemModel& problem) {
  switch (f.kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::Atom: {
      Atom g;
      g.pred = f.atom.pred;
      for (const auto& t : f.atom.args) g.args.push_back(obj(resolve(t, binding)));
      return state.count(g) > 0;
    }
    case FormulaKind::Not:
      return !holds(f.children[0], state, binding, domain, problem);
    case FormulaKind::And:
      for (const auto& c : f.children)
        if (!holds(c, state, binding, domain, problem)) return false;
      return true;
    case FormulaKind::Forall: {
      for (const auto& [name, cat] : problem.objects) {
        if (!domain.types.is_subtype(cat, f.var_type)) continue;
        auto b = binding;
        b[f.var] = name;
        if (!holds(f.children[0], state, b, domain, problem)) return false;
      }
      return true;
    }
    case FormulaKind::Equal:
      return resolve(f.lhs, binding) == resolve(f.rhs, binding);
    case FormulaKind::When:
      throw std::runtime_error("when is not a condition formula");
  }
  return false;
}

}  // namespace delib::pddl
