#include "delib/pddl/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <set>
#include <sstream>

namespace delib::pddl {

namespace {

bool ieq(const std::string& a, const char* b) {
  size_t n = std::strlen(b);
  if (a.size() != n) return false;
  for (size_t i = 0; i < n; ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

struct Sexp {
  bool is_list = false;
  std::string sym;
  std::vector<Sexp> items;
  int line = 0, col = 0;

  bool is(const char* kw) const { return !is_list && ieq(sym, kw); }
  const Sexp& head() const {
    if (!is_list || items.empty()) throw SyntaxError(line, col, "non-empty list");
    return items[0];
  }
};

class Reader {
 public:
  explicit Reader(const std::string& text) : s_(text) {}

  std::vector<Sexp> read_all() {
    std::vector<Sexp> out;
    skip_ws();
    while (pos_ < s_.size()) {
      out.push_back(read());
      skip_ws();
    }
    return out;
  }

 private:
  Sexp read() {
    skip_ws();
    if (pos_ >= s_.size()) throw SyntaxError(line_, col_, "expression");
    if (s_[pos_] == '(') {
      Sexp list;
      list.is_list = true;
      list.line = line_;
      list.col = col_;
      advance();
      skip_ws();
      while (pos_ < s_.size() && s_[pos_] != ')') {
        list.items.push_back(read());
        skip_ws();
      }
      if (pos_ >= s_.size()) throw SyntaxError(line_, col_, "')'");
      advance();
      return list;
    }
    if (s_[pos_] == ')') throw SyntaxError(line_, col_, "expression before ')'");
    Sexp a;
    a.line = line_;
    a.col = col_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != ')' && s_[pos_] != ';') {
      a.sym += s_[pos_];
      advance();
    }
    return a;
  }

  void skip_ws() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

const std::set<std::string> kAcceptedRequirements = {
    ":adl", ":strips", ":typing", ":conditional-effects", ":action-costs"};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// typed list "a b - T c - U d" -> [(a,T),(b,T),(c,U),(d,Object)]
std::vector<std::pair<std::string, std::string>> read_typed_list(const Sexp& list,
                                                                 size_t from = 0) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> pending;
  for (size_t i = from; i < list.items.size(); ++i) {
    const Sexp& it = list.items[i];
    if (it.is_list) throw SyntaxError(it.line, it.col, "name or '-'");
    if (it.sym == "-") {
      if (i + 1 >= list.items.size() || list.items[i + 1].is_list)
        throw SyntaxError(it.line, it.col, "type name after '-'");
      const std::string& ty = list.items[i + 1].sym;
      for (auto& n : pending) out.emplace_back(n, ty);
      pending.clear();
      ++i;
    } else {
      pending.push_back(it.sym);
    }
  }
  for (auto& n : pending) out.emplace_back(n, kRootCategory);
  return out;
}

struct Scope {
  const DomainModel* domain = nullptr;
  const ProblemModel* problem = nullptr;  // null in domain context
  std::map<std::string, std::string> vars;  // ?v -> category

  std::string type_of_term(const Term& t, const Sexp& at) const {
    if (t.is_var) {
      auto it = vars.find(t.name);
      if (it == vars.end()) throw UnboundVariable(t.name);
      return it->second;
    }
    if (problem) {
      auto c = problem->category_of(t.name);
      if (!c) throw TypeMismatch(t.name, "a declared object");
      return *c;
    }
    throw SyntaxError(at.line, at.col, "variable (constants not allowed here)");
  }
};

Term read_term(const Sexp& s) {
  if (s.is_list) throw SyntaxError(s.line, s.col, "term");
  if (!s.sym.empty() && s.sym[0] == '?') return var(s.sym);
  return obj(s.sym);
}

Atom read_atom(const Sexp& s, Scope& sc) {
  if (!s.is_list || s.items.empty() || s.items[0].is_list)
    throw SyntaxError(s.line, s.col, "atom");
  Atom a;
  a.pred = s.items[0].sym;
  const PredicateDecl* decl = sc.domain->find_predicate(a.pred);
  if (!decl) throw UnknownPredicate(a.pred);
  if (s.items.size() - 1 != decl->param_types.size())
    throw SyntaxError(s.line, s.col,
                      "arity " + std::to_string(decl->param_types.size()) +
                          " for " + a.pred);
  for (size_t i = 1; i < s.items.size(); ++i) {
    Term t = read_term(s.items[i]);
    std::string cat = sc.type_of_term(t, s.items[i]);
    const std::string& want = decl->param_types[i - 1];
    // Ground terms must fit the declared type. Variables are not checked
    // here: quantifiers may range wider than a slot's type, and grounding
    // keeps the incompatible instantiations inert (never true, never added).
    if (!t.is_var && !sc.domain->types.is_subtype(cat, want))
      throw TypeMismatch(t.name, want);
    a.args.push_back(std::move(t));
  }
  return a;
}

// Preconditions and goals: and / not-literal / forall / = / atom.
Formula read_condition(const Sexp& s, Scope& sc) {
  if (!s.is_list) throw SyntaxError(s.line, s.col, "condition");
  if (s.items.empty()) return Formula::truth();
  const Sexp& h = s.head();
  if (h.is("and")) {
    std::vector<Formula> kids;
    for (size_t i = 1; i < s.items.size(); ++i)
      kids.push_back(read_condition(s.items[i], sc));
    if (kids.empty()) return Formula::truth();
    return Formula::mk_and(std::move(kids));
  }
  if (h.is("not")) {
    if (s.items.size() != 2) throw SyntaxError(s.line, s.col, "single formula in not");
    Formula inner = read_condition(s.items[1], sc);
    if (inner.kind != FormulaKind::Atom && inner.kind != FormulaKind::Equal)
      throw SyntaxError(s.line, s.col, "atom or = under not");
    return Formula::mk_not(std::move(inner));
  }
  if (h.is("forall")) {
    if (s.items.size() != 3 || !s.items[1].is_list)
      throw SyntaxError(s.line, s.col, "(forall (?v - T) F)");
    auto binders = read_typed_list(s.items[1]);
    if (binders.size() != 1 || binders[0].first.empty() || binders[0].first[0] != '?')
      throw SyntaxError(s.line, s.col, "single typed variable binder");
    if (!sc.domain->types.known(binders[0].second))
      throw UnknownCategory(binders[0].second);
    auto saved = sc.vars;
    sc.vars[binders[0].first] = binders[0].second;
    Formula body = read_condition(s.items[2], sc);
    sc.vars = saved;
    return Formula::mk_forall(binders[0].first, binders[0].second, std::move(body));
  }
  if (h.is("=")) {
    if (s.items.size() != 3) throw SyntaxError(s.line, s.col, "(= t1 t2)");
    Term a = read_term(s.items[1]), b = read_term(s.items[2]);
    sc.type_of_term(a, s.items[1]);
    sc.type_of_term(b, s.items[2]);
    return Formula::mk_equal(std::move(a), std::move(b));
  }
  if (h.is("or") || h.is("exists") || h.is("imply") || h.is("when"))
    throw SyntaxError(s.line, s.col, "supported construct (no " + lower(h.sym) + ")");
  return Formula::mk_atom(read_atom(s, sc));
}

// Effects: and / atom / not-atom / forall / when / increase.
// The single (increase (total-cost) n) is extracted into *cost.
Formula read_effect(const Sexp& s, Scope& sc, int* cost, bool allow_increase) {
  if (!s.is_list) throw SyntaxError(s.line, s.col, "effect");
  if (s.items.empty()) return Formula::truth();
  const Sexp& h = s.head();
  if (h.is("and")) {
    std::vector<Formula> kids;
    for (size_t i = 1; i < s.items.size(); ++i) {
      Formula f = read_effect(s.items[i], sc, cost, allow_increase);
      if (f.kind != FormulaKind::True) kids.push_back(std::move(f));
    }
    if (kids.empty()) return Formula::truth();
    return Formula::mk_and(std::move(kids));
  }
  if (h.is("not")) {
    if (s.items.size() != 2) throw SyntaxError(s.line, s.col, "single atom in not");
    return Formula::mk_not(Formula::mk_atom(read_atom(s.items[1], sc)));
  }
  if (h.is("forall")) {
    if (s.items.size() != 3 || !s.items[1].is_list)
      throw SyntaxError(s.line, s.col, "(forall (?v - T) E)");
    auto binders = read_typed_list(s.items[1]);
    if (binders.size() != 1 || binders[0].first.empty() || binders[0].first[0] != '?')
      throw SyntaxError(s.line, s.col, "single typed variable binder");
    if (!sc.domain->types.known(binders[0].second))
      throw UnknownCategory(binders[0].second);
    auto saved = sc.vars;
    sc.vars[binders[0].first] = binders[0].second;
    Formula body = read_effect(s.items[2], sc, cost, false);
    sc.vars = saved;
    return Formula::mk_forall(binders[0].first, binders[0].second, std::move(body));
  }
  if (h.is("when")) {
    if (s.items.size() != 3) throw SyntaxError(s.line, s.col, "(when C E)");
    Formula cond = read_condition(s.items[1], sc);
    Formula eff = read_effect(s.items[2], sc, cost, false);
    return Formula::mk_when(std::move(cond), std::move(eff));
  }
  if (h.is("increase")) {
    if (!allow_increase || !cost)
      throw SyntaxError(s.line, s.col, "increase only at effect top level");
    if (s.items.size() != 3 || !s.items[1].is_list || s.items[1].items.size() != 1 ||
        !s.items[1].items[0].is("total-cost"))
      throw SyntaxError(s.line, s.col, "(increase (total-cost) n)");
    const Sexp& num = s.items[2];
    if (num.is_list) throw SyntaxError(num.line, num.col, "integer");
    try {
      int v = std::stoi(num.sym);
      if (v < 0) throw SyntaxError(num.line, num.col, "nonnegative integer");
      *cost = v;
    } catch (const SyntaxError&) {
      throw;
    } catch (...) {
      throw SyntaxError(num.line, num.col, "integer");
    }
    return Formula::truth();
  }
  return Formula::mk_atom(read_atom(s, sc));
}

ActionSchema read_action(const Sexp& s, DomainModel& d, size_t name_idx) {
  ActionSchema a;
  if (s.items.size() <= name_idx || s.items[name_idx].is_list)
    throw SyntaxError(s.line, s.col, "action name");
  a.name = s.items[name_idx].sym;

  Scope sc;
  sc.domain = &d;
  size_t i = name_idx + 1;
  bool saw_params = false;
  while (i < s.items.size()) {
    const Sexp& key = s.items[i];
    if (key.is_list) throw SyntaxError(key.line, key.col, "keyword");
    if (key.is(":parameters")) {
      if (i + 1 >= s.items.size() || !s.items[i + 1].is_list)
        throw SyntaxError(key.line, key.col, "parameter list");
      for (auto& [v, t] : read_typed_list(s.items[i + 1])) {
        if (v.empty() || v[0] != '?') throw SyntaxError(key.line, key.col, "?variable");
        if (!d.types.known(t)) throw UnknownCategory(t);
        a.params.emplace_back(v, t);
        sc.vars[v] = t;
      }
      saw_params = true;
      i += 2;
    } else if (key.is(":precondition")) {
      if (i + 1 >= s.items.size()) throw SyntaxError(key.line, key.col, "formula");
      a.precondition = read_condition(s.items[i + 1], sc);
      i += 2;
    } else if (key.is(":effect")) {
      if (i + 1 >= s.items.size()) throw SyntaxError(key.line, key.col, "formula");
      a.effect = read_effect(s.items[i + 1], sc, &a.cost, true);
      i += 2;
    } else {
      throw SyntaxError(key.line, key.col,
                        ":parameters/:precondition/:effect");
    }
  }
  if (!saw_params) a.params.clear();
  return a;
}

}  // namespace

DomainModel parse_domain(const std::string& text) {
  Reader reader(text);
  auto top = reader.read_all();
  if (top.size() != 1 || !top[0].is_list)
    throw SyntaxError(1, 1, "single (define ...)");
  const Sexp& def = top[0];
  if (def.items.size() < 2 || !def.items[0].is("define") ||
      !def.items[1].is_list || def.items[1].items.size() != 2 ||
      !def.items[1].items[0].is("domain"))
    throw SyntaxError(def.line, def.col, "(define (domain NAME) ...)");

  DomainModel d;
  d.name = def.items[1].items[1].sym;

  for (size_t i = 2; i < def.items.size(); ++i) {
    const Sexp& sec = def.items[i];
    if (!sec.is_list || sec.items.empty())
      throw SyntaxError(sec.line, sec.col, "domain section");
    const Sexp& h = sec.head();
    if (h.is(":requirements")) {
      for (size_t j = 1; j < sec.items.size(); ++j) {
        std::string flag = lower(sec.items[j].sym);
        if (!kAcceptedRequirements.count(flag)) throw UnsupportedRequirement(flag);
        if (std::find(d.requirements.begin(), d.requirements.end(), flag) ==
            d.requirements.end())
          d.requirements.push_back(flag);
      }
    } else if (h.is(":types")) {
      for (auto& [name, parent] : read_typed_list(sec, 1)) {
        d.types.declare(name, parent);
      }
    } else if (h.is(":predicates")) {
      for (size_t j = 1; j < sec.items.size(); ++j) {
        const Sexp& ps = sec.items[j];
        if (!ps.is_list || ps.items.empty() || ps.items[0].is_list)
          throw SyntaxError(ps.line, ps.col, "(name ?v - T ...)");
        PredicateDecl decl;
        decl.name = ps.items[0].sym;
        if (d.find_predicate(decl.name))
          throw SyntaxError(ps.line, ps.col, "unique predicate name");
        for (auto& [v, t] : read_typed_list(ps, 1)) {
          if (v.empty() || v[0] != '?') throw SyntaxError(ps.line, ps.col, "?variable");
          if (!d.types.known(t)) throw UnknownCategory(t);
          decl.param_types.push_back(t);
        }
        d.predicates.push_back(std::move(decl));
      }
    } else if (h.is(":functions")) {
      if (sec.items.size() != 2 || !sec.items[1].is_list ||
          sec.items[1].items.size() != 1 || !sec.items[1].items[0].is("total-cost"))
        throw SyntaxError(sec.line, sec.col, "(:functions (total-cost))");
      d.has_total_cost = true;
    } else if (h.is(":action") || h.is("action")) {
      d.actions.push_back(read_action(sec, d, 1));
      if (d.actions.back().cost != 1) d.has_total_cost = true;
    } else {
      throw SyntaxError(h.line, h.col, "supported domain section");
    }
  }
  return d;
}

ProblemModel parse_problem(const std::string& text, const DomainModel& domain) {
  Reader reader(text);
  auto top = reader.read_all();
  if (top.size() != 1 || !top[0].is_list)
    throw SyntaxError(1, 1, "single (define ...)");
  const Sexp& def = top[0];
  if (def.items.size() < 2 || !def.items[0].is("define") ||
      !def.items[1].is_list || def.items[1].items.size() != 2 ||
      !def.items[1].items[0].is("problem"))
    throw SyntaxError(def.line, def.col, "(define (problem NAME) ...)");

  ProblemModel p;
  p.name = def.items[1].items[1].sym;

  Scope sc;
  sc.domain = &domain;
  sc.problem = &p;

  for (size_t i = 2; i < def.items.size(); ++i) {
    const Sexp& sec = def.items[i];
    if (!sec.is_list || sec.items.empty())
      throw SyntaxError(sec.line, sec.col, "problem section");
    const Sexp& h = sec.head();
    if (h.is(":domain")) {
      if (sec.items.size() != 2) throw SyntaxError(sec.line, sec.col, "domain name");
      p.domain_name = sec.items[1].sym;
    } else if (h.is(":requirements")) {
      for (size_t j = 1; j < sec.items.size(); ++j) {
        std::string flag = lower(sec.items[j].sym);
        if (!kAcceptedRequirements.count(flag)) throw UnsupportedRequirement(flag);
      }
    } else if (h.is(":objects")) {
      for (auto& [name, cat] : read_typed_list(sec, 1)) {
        if (!domain.types.known(cat)) throw TypeMismatch(name, cat);
        if (p.category_of(name)) throw SyntaxError(sec.line, sec.col, "unique object " + name);
        p.objects.emplace_back(name, cat);
      }
    } else if (h.is(":init")) {
      for (size_t j = 1; j < sec.items.size(); ++j) {
        Atom a = read_atom(sec.items[j], sc);
        for (const auto& t : a.args)
          if (t.is_var) throw SyntaxError(sec.items[j].line, sec.items[j].col, "ground atom");
        p.init.push_back(std::move(a));
      }
    } else if (h.is(":goal")) {
      if (sec.items.size() != 2) throw SyntaxError(sec.line, sec.col, "single goal formula");
      p.goal = read_condition(sec.items[1], sc);
    } else if (h.is(":metric")) {
      // accepted and ignored: (:metric minimize (total-cost))
    } else {
      throw SyntaxError(h.line, h.col, "supported problem section");
    }
  }
  return p;
}

namespace {

void print_formula(std::ostringstream& os, const Formula& f) {
  switch (f.kind) {
    case FormulaKind::True:
      os << "(and)";
      return;
    case FormulaKind::Atom:
      os << f.atom.str();
      return;
    case FormulaKind::Not:
      os << "(not ";
      print_formula(os, f.children[0]);
      os << ")";
      return;
    case FormulaKind::And:
      os << "(and";
      for (const auto& c : f.children) {
        os << " ";
        print_formula(os, c);
      }
      os << ")";
      return;
    case FormulaKind::Forall:
      os << "(forall (" << f.var << " - " << f.var_type << ") ";
      print_formula(os, f.children[0]);
      os << ")";
      return;
    case FormulaKind::When:
      os << "(when ";
      print_formula(os, f.children[0]);
      os << " ";
      print_formula(os, f.children[1]);
      os << ")";
      return;
    case FormulaKind::Equal:
      os << "(= " << f.lhs.name << " " << f.rhs.name << ")";
      return;
  }
}

std::string effect_with_cost(const Formula& eff, int cost) {
  std::ostringstream os;
  if (cost == 1) {
    print_formula(os, eff);
    return os.str();
  }
  os << "(and ";
  if (eff.kind == FormulaKind::And) {
    bool first = true;
    for (const auto& c : eff.children) {
      if (!first) os << " ";
      print_formula(os, c);
      first = false;
    }
    if (!eff.children.empty()) os << " ";
  } else if (eff.kind != FormulaKind::True) {
    print_formula(os, eff);
    os << " ";
  }
  os << "(increase (total-cost) " << cost << "))";
  return os.str();
}

}  // namespace

std::string serialize(const DomainModel& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  if (!d.requirements.empty()) {
    os << "    (:requirements";
    for (const auto& r : d.requirements) os << " " << r;
    os << ")\n";
  }
  if (!d.types.entries().empty()) {
    os << "    (:types\n";
    for (const auto& [cat, parent] : d.types.entries())
      os << "        " << cat << " - " << parent << "\n";
    os << "    )\n";
  }
  if (!d.predicates.empty()) {
    os << "    (:predicates\n";
    for (const auto& p : d.predicates) {
      os << "        (" << p.name;
      for (size_t i = 0; i < p.param_types.size(); ++i)
        os << " ?x" << i << " - " << p.param_types[i];
      os << ")\n";
    }
    os << "    )\n";
  }
  if (d.has_total_cost) os << "    (:functions (total-cost))\n";
  for (const auto& a : d.actions) {
    os << "    (:action " << a.name << "\n";
    os << "        :parameters (";
    for (size_t i = 0; i < a.params.size(); ++i) {
      if (i) os << " ";
      os << a.params[i].first << " - " << a.params[i].second;
    }
    os << ")\n";
    std::ostringstream pre;
    print_formula(pre, a.precondition);
    os << "        :precondition " << pre.str() << "\n";
    os << "        :effect " << effect_with_cost(a.effect, a.cost) << "\n";
    os << "    )\n";
  }
  os << ")\n";
  return os.str();
}

std::string serialize(const ProblemModel& p, const DomainModel&) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n";
  os << "    (:domain " << p.domain_name << ")\n";
  os << "    (:objects\n";
  for (const auto& [name, cat] : p.objects)
    os << "        " << name << " - " << cat << "\n";
  os << "    )\n";
  os << "    (:init\n";
  for (const auto& a : p.init) os << "        " << a.str() << "\n";
  os << "    )\n";
  std::ostringstream goal;
  print_formula(goal, p.goal);
  os << "    (:goal " << goal.str() << ")\n";
  os << ")\n";
  return os.str();
}

}  // namespace delib::pddl
