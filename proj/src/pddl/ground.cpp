#include "delib/pddl/ground.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "delib/util/rng.hpp"

namespace delib::pddl {

AtomId AtomTable::intern(const Atom& a) {
  std::string key = a.pred;
  for (const auto& t : a.args) {
    key += '\x1f';
    key += t.name;
  }
  auto [it, inserted] = index_.try_emplace(std::move(key),
                                           static_cast<AtomId>(atoms_.size()));
  if (inserted) atoms_.push_back(a);
  return it->second;
}

int64_t AtomTable::lookup(const Atom& a) const {
  std::string key = a.pred;
  for (const auto& t : a.args) {
    key += '\x1f';
    key += t.name;
  }
  auto it = index_.find(key);
  return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

bool state_contains(const SymState& s, AtomId a) {
  return std::binary_search(s.begin(), s.end(), a);
}

SymState make_state(std::vector<AtomId> atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  return atoms;
}

uint64_t state_hash(const SymState& s) {
  return fnv1a(s.data(), s.size() * sizeof(AtomId));
}

std::string GroundedAction::str() const {
  std::string s = name + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i];
  }
  return s + ")";
}

bool GroundedTask::goal_satisfied(const SymState& s) const {
  for (AtomId a : goal_pos)
    if (!state_contains(s, a)) return false;
  for (AtomId a : goal_neg)
    if (state_contains(s, a)) return false;
  return true;
}

namespace {

struct Binding {
  std::map<std::string, std::string> map;
};

void sort_unique(std::vector<AtomId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

class Grounder {
 public:
  Grounder(const DomainModel& d, const ProblemModel& p, const GroundOptions& opts)
      : d_(d), p_(p), opts_(opts) {
    for (const auto& a : p_.init) init_.insert(a);
    compute_static_preds();
  }

  GroundedTask run() {
    GroundedTask task;
    task.objects = p_.objects;

    for (const auto& a : p_.init) task.init.push_back(task.atoms.intern(a));
    task.init = make_state(std::move(task.init));

    for (const auto& schema : d_.actions) {
      enumerate(schema, task);
    }

    compile_goal(task);
    if (opts_.prune_unreachable) prune_unreachable(task);
    return task;
  }

 private:
  void compute_static_preds() {
    std::set<std::string> dynamic;
    std::function<void(const Formula&)> scan = [&](const Formula& f) {
      switch (f.kind) {
        case FormulaKind::Atom:
          dynamic.insert(f.atom.pred);
          break;
        case FormulaKind::Not:
          scan(f.children[0]);
          break;
        case FormulaKind::And:
        case FormulaKind::Forall:
          for (const auto& c : f.children) scan(c);
          break;
        case FormulaKind::When:
          scan(f.children[1]);  // only the effect side mutates
          break;
        default:
          break;
      }
    };
    for (const auto& a : d_.actions) scan(a.effect);
    for (const auto& pd : d_.predicates)
      if (!dynamic.count(pd.name)) static_preds_.insert(pd.name);
  }

  const std::vector<std::string>& objects_of(const std::string& cat) {
    auto it = by_cat_.find(cat);
    if (it != by_cat_.end()) return it->second;
    std::vector<std::string> v;
    for (const auto& [name, c] : p_.objects)
      if (d_.types.is_subtype(c, cat)) v.push_back(name);
    return by_cat_.emplace(cat, std::move(v)).first->second;
  }

  Atom ground_atom(const Atom& a, const Binding& b) const {
    Atom g;
    g.pred = a.pred;
    g.args.reserve(a.args.size());
    for (const auto& t : a.args) {
      if (t.is_var) {
        auto it = b.map.find(t.name);
        if (it == b.map.end()) throw UnboundVariable(t.name);
        g.args.push_back(obj(it->second));
      } else {
        g.args.push_back(t);
      }
    }
    return g;
  }

  // Whether every argument's category fits the predicate declaration.
  // Wide quantifiers can instantiate literals that no well-typed state can
  // contain; those are never true, and must not be added by effects.
  bool well_typed(const Atom& g) const {
    const PredicateDecl* decl = d_.find_predicate(g.pred);
    if (!decl) return false;
    for (size_t i = 0; i < g.args.size(); ++i) {
      auto cat = p_.category_of(g.args[i].name);
      if (!cat || !d_.types.is_subtype(*cat, decl->param_types[i])) return false;
    }
    return true;
  }

  std::string resolve(const Term& t, const Binding& b) const {
    if (!t.is_var) return t.name;
    auto it = b.map.find(t.name);
    if (it == b.map.end()) throw UnboundVariable(t.name);
    return it->second;
  }

  // Collects precondition literals; returns false when a static Equal
  // constraint rules the binding out entirely.
  bool collect_pre(const Formula& f, Binding& b, std::vector<AtomId>& pos,
                   std::vector<AtomId>& neg, AtomTable& atoms) {
    switch (f.kind) {
      case FormulaKind::True:
        return true;
      case FormulaKind::Atom:
        pos.push_back(atoms.intern(ground_atom(f.atom, b)));
        return true;
      case FormulaKind::Not: {
        const Formula& inner = f.children[0];
        if (inner.kind == FormulaKind::Equal)
          return resolve(inner.lhs, b) != resolve(inner.rhs, b);
        neg.push_back(atoms.intern(ground_atom(inner.atom, b)));
        return true;
      }
      case FormulaKind::Equal:
        return resolve(f.lhs, b) == resolve(f.rhs, b);
      case FormulaKind::And:
        for (const auto& c : f.children)
          if (!collect_pre(c, b, pos, neg, atoms)) return false;
        return true;
      case FormulaKind::Forall: {
        for (const auto& o : objects_of(f.var_type)) {
          b.map[f.var] = o;
          bool ok = collect_pre(f.children[0], b, pos, neg, atoms);
          b.map.erase(f.var);
          if (!ok) return false;
        }
        return true;
      }
      case FormulaKind::When:
        throw std::runtime_error("when in precondition");
    }
    return true;
  }

  // Condition literal list for a When. Returns:
  //  1 keep (literals appended), 0 statically false (drop subtree).
  int collect_cond(const Formula& f, Binding& b, std::vector<AtomId>& pos,
                   std::vector<AtomId>& neg, AtomTable& atoms) {
    switch (f.kind) {
      case FormulaKind::True:
        return 1;
      case FormulaKind::Atom: {
        Atom g = ground_atom(f.atom, b);
        if (static_preds_.count(g.pred)) return init_.count(g) ? 1 : 0;
        pos.push_back(atoms.intern(g));
        return 1;
      }
      case FormulaKind::Not: {
        const Formula& inner = f.children[0];
        if (inner.kind == FormulaKind::Equal)
          return resolve(inner.lhs, b) != resolve(inner.rhs, b) ? 1 : 0;
        Atom g = ground_atom(inner.atom, b);
        if (static_preds_.count(g.pred)) return init_.count(g) ? 0 : 1;
        neg.push_back(atoms.intern(g));
        return 1;
      }
      case FormulaKind::Equal:
        return resolve(f.lhs, b) == resolve(f.rhs, b) ? 1 : 0;
      case FormulaKind::And:
        for (const auto& c : f.children) {
          int r = collect_cond(c, b, pos, neg, atoms);
          if (r == 0) return 0;
        }
        return 1;
      default:
        throw std::runtime_error("unsupported when-condition");
    }
  }

  struct TripleKey {
    std::vector<AtomId> pos, neg;
    bool operator<(const TripleKey& o) const {
      if (pos != o.pos) return pos < o.pos;
      return neg < o.neg;
    }
  };
  using Triples = std::map<TripleKey, std::pair<std::vector<AtomId>, std::vector<AtomId>>>;

  void walk_effect(const Formula& f, Binding& b, std::vector<AtomId> cond_pos,
                   std::vector<AtomId> cond_neg, Triples& triples, AtomTable& atoms) {
    switch (f.kind) {
      case FormulaKind::True:
        return;
      case FormulaKind::Atom: {
        Atom g = ground_atom(f.atom, b);
        if (!well_typed(g)) return;
        TripleKey key{cond_pos, cond_neg};
        triples[key].first.push_back(atoms.intern(g));
        return;
      }
      case FormulaKind::Not: {
        Atom g = ground_atom(f.children[0].atom, b);
        if (!well_typed(g)) return;
        TripleKey key{cond_pos, cond_neg};
        triples[key].second.push_back(atoms.intern(g));
        return;
      }
      case FormulaKind::And:
        for (const auto& c : f.children)
          walk_effect(c, b, cond_pos, cond_neg, triples, atoms);
        return;
      case FormulaKind::Forall:
        for (const auto& o : objects_of(f.var_type)) {
          b.map[f.var] = o;
          walk_effect(f.children[0], b, cond_pos, cond_neg, triples, atoms);
          b.map.erase(f.var);
        }
        return;
      case FormulaKind::When: {
        auto pos = cond_pos;
        auto neg = cond_neg;
        int r = collect_cond(f.children[0], b, pos, neg, atoms);
        if (r == 0) return;
        walk_effect(f.children[1], b, std::move(pos), std::move(neg), triples, atoms);
        return;
      }
      case FormulaKind::Equal:
        throw std::runtime_error("bare = in effect");
    }
  }

  void enumerate(const ActionSchema& schema, GroundedTask& task) {
    std::vector<const std::vector<std::string>*> domains;
    size_t combos = 1;
    for (const auto& [v, t] : schema.params) {
      domains.push_back(&objects_of(t));
      combos *= domains.back()->size();
      if (combos == 0) return;
      if (combos > opts_.max_actions)
        throw GroundingExplosion(combos, opts_.max_actions);
    }

    std::vector<size_t> idx(schema.params.size(), 0);
    Binding b;
    while (true) {
      for (size_t i = 0; i < idx.size(); ++i)
        b.map[schema.params[i].first] = (*domains[i])[idx[i]];

      emit(schema, b, task);
      if (task.actions.size() > opts_.max_actions)
        throw GroundingExplosion(task.actions.size(), opts_.max_actions);

      // odometer, rightmost fastest
      size_t k = idx.size();
      while (k > 0) {
        if (++idx[k - 1] < domains[k - 1]->size()) break;
        idx[k - 1] = 0;
        --k;
      }
      if (k == 0) break;
    }
  }

  void emit(const ActionSchema& schema, Binding& b, GroundedTask& task) {
    GroundedAction ga;
    ga.name = schema.name;
    for (const auto& [v, t] : schema.params) ga.args.push_back(b.map.at(v));
    ga.cost = schema.cost;
    auto ov = opts_.cost_overrides.find(schema.name);
    if (ov != opts_.cost_overrides.end()) ga.cost = ov->second;

    if (!collect_pre(schema.precondition, b, ga.pre_pos, ga.pre_neg, task.atoms))
      return;  // Equal guard excluded this binding
    sort_unique(ga.pre_pos);
    sort_unique(ga.pre_neg);

    Triples triples;
    walk_effect(schema.effect, b, {}, {}, triples, task.atoms);
    for (auto& [key, addel] : triples) {
      auto add = addel.first;
      auto del = addel.second;
      sort_unique(add);
      sort_unique(del);
      // add wins within a triple
      std::vector<AtomId> del2;
      for (AtomId a : del)
        if (!std::binary_search(add.begin(), add.end(), a)) del2.push_back(a);
      if (key.pos.empty() && key.neg.empty()) {
        ga.add = std::move(add);
        ga.del = std::move(del2);
      } else {
        CondEffect ce;
        ce.cond_pos = key.pos;
        ce.cond_neg = key.neg;
        sort_unique(ce.cond_pos);
        sort_unique(ce.cond_neg);
        ce.add = std::move(add);
        ce.del = std::move(del2);
        ga.cond_effects.push_back(std::move(ce));
      }
    }
    ga.index = static_cast<uint32_t>(task.actions.size());
    task.actions.push_back(std::move(ga));
  }

  void compile_goal(GroundedTask& task) {
    Binding b;
    std::function<void(const Formula&)> walk = [&](const Formula& f) {
      switch (f.kind) {
        case FormulaKind::True:
          return;
        case FormulaKind::Atom:
          task.goal_pos.push_back(task.atoms.intern(ground_atom(f.atom, b)));
          return;
        case FormulaKind::Not: {
          const Formula& inner = f.children[0];
          if (inner.kind == FormulaKind::Equal) {
            if (resolve(inner.lhs, b) == resolve(inner.rhs, b))
              task.goal_pos.push_back(task.atoms.intern(Atom{"=unsat", {}}));
            return;
          }
          task.goal_neg.push_back(task.atoms.intern(ground_atom(inner.atom, b)));
          return;
        }
        case FormulaKind::Equal:
          if (resolve(f.lhs, b) != resolve(f.rhs, b))
            task.goal_pos.push_back(task.atoms.intern(Atom{"=unsat", {}}));
          return;
        case FormulaKind::And:
          for (const auto& c : f.children) walk(c);
          return;
        case FormulaKind::Forall:
          for (const auto& o : objects_of(f.var_type)) {
            b.map[f.var] = o;
            walk(f.children[0]);
            b.map.erase(f.var);
          }
          return;
        case FormulaKind::When:
          throw std::runtime_error("when in goal");
      }
    };
    walk(p_.goal);
    sort_unique(task.goal_pos);
    sort_unique(task.goal_neg);
  }

  // Relaxed fixpoint reachability; drops actions whose positive
  // preconditions can never all hold.
  void prune_unreachable(GroundedTask& task) {
    std::vector<char> reachable(task.atoms.size(), 0);
    for (AtomId a : task.init) reachable[a] = 1;
    bool changed = true;
    std::vector<char> applied(task.actions.size(), 0);
    while (changed) {
      changed = false;
      for (size_t i = 0; i < task.actions.size(); ++i) {
        if (applied[i]) continue;
        const auto& ga = task.actions[i];
        bool ok = true;
        for (AtomId a : ga.pre_pos)
          if (!reachable[a]) { ok = false; break; }
        if (!ok) continue;
        applied[i] = 1;
        changed = true;
        auto mark = [&](const std::vector<AtomId>& ids) {
          for (AtomId a : ids)
            if (!reachable[a]) reachable[a] = 1;
        };
        mark(ga.add);
        for (const auto& ce : ga.cond_effects) mark(ce.add);
      }
    }
    std::vector<GroundedAction> kept;
    for (size_t i = 0; i < task.actions.size(); ++i)
      if (applied[i]) kept.push_back(std::move(task.actions[i]));
    for (size_t i = 0; i < kept.size(); ++i) kept[i].index = static_cast<uint32_t>(i);
    task.actions = std::move(kept);
  }

  const DomainModel& d_;
  const ProblemModel& p_;
  GroundOptions opts_;
  AtomSet init_;
  std::set<std::string> static_preds_;
  std::map<std::string, std::vector<std::string>> by_cat_;
};

}  // namespace

GroundedTask ground(const DomainModel& domain, const ProblemModel& problem,
                    const GroundOptions& opts) {
  return Grounder(domain, problem, opts).run();
}

bool preconditions_hold(const GroundedAction& a, const SymState& s,
                        const GroundedTask* task,
                        std::vector<std::string>* failed) {
  bool ok = true;
  for (AtomId id : a.pre_pos) {
    if (!state_contains(s, id)) {
      ok = false;
      if (failed && task) failed->push_back(task->atoms.atom(id).str());
      else if (!failed) return false;
    }
  }
  for (AtomId id : a.pre_neg) {
    if (state_contains(s, id)) {
      ok = false;
      if (failed && task) failed->push_back("(not " + task->atoms.atom(id).str() + ")");
      else if (!failed) return false;
    }
  }
  return ok;
}

SymState apply(const GroundedAction& a, const SymState& s, const GroundedTask& task) {
  std::vector<std::string> failed;
  if (!preconditions_hold(a, s, &task, &failed)) throw PreconditionViolated(failed);

  auto cond_holds = [&](const CondEffect& ce) {
    for (AtomId id : ce.cond_pos)
      if (!state_contains(s, id)) return false;
    for (AtomId id : ce.cond_neg)
      if (state_contains(s, id)) return false;
    return true;
  };

  std::vector<AtomId> dels(a.del), adds(a.add);
  for (const auto& ce : a.cond_effects) {
    if (!cond_holds(ce)) continue;
    dels.insert(dels.end(), ce.del.begin(), ce.del.end());
    adds.insert(adds.end(), ce.add.begin(), ce.add.end());
  }
  std::sort(dels.begin(), dels.end());
  std::sort(adds.begin(), adds.end());

  SymState out;
  out.reserve(s.size() + adds.size());
  for (AtomId id : s)
    if (!std::binary_search(dels.begin(), dels.end(), id)) out.push_back(id);
  out.insert(out.end(), adds.begin(), adds.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace delib::pddl
