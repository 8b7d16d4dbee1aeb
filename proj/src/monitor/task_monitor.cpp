#include "delib/monitor/task_monitor.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "delib/planner/problem_builder.hpp"

namespace delib::monitor {

const std::vector<SubgoalPredicate>& all_subgoal_predicates() {
  static const std::vector<SubgoalPredicate> all = {
      SubgoalPredicate::isCooked,
      SubgoalPredicate::isClean,
      SubgoalPredicate::isPickedUp,
      SubgoalPredicate::isFilledWithLiquid,
      SubgoalPredicate::isEmptied,
      SubgoalPredicate::isSliced,
      SubgoalPredicate::simbotIsFilledWithCoffee,
      SubgoalPredicate::isPlacedTo,
      SubgoalPredicate::isToggled,
  };
  return all;
}

std::string to_string(SubgoalPredicate p) {
  switch (p) {
    case SubgoalPredicate::isCooked: return "isCooked";
    case SubgoalPredicate::isClean: return "isClean";
    case SubgoalPredicate::isPickedUp: return "isPickedUp";
    case SubgoalPredicate::isFilledWithLiquid: return "isFilledWithLiquid";
    case SubgoalPredicate::isEmptied: return "isEmptied";
    case SubgoalPredicate::isSliced: return "isSliced";
    case SubgoalPredicate::simbotIsFilledWithCoffee: return "simbotIsFilledWithCoffee";
    case SubgoalPredicate::isPlacedTo: return "isPlacedTo";
    case SubgoalPredicate::isToggled: return "isToggled";
  }
  return "?";
}

std::optional<SubgoalPredicate> subgoal_predicate_from(const std::string& name) {
  for (SubgoalPredicate p : all_subgoal_predicates())
    if (to_string(p) == name) return p;
  return std::nullopt;
}

std::string to_string(SubgoalStatus s) {
  switch (s) {
    case SubgoalStatus::Pending: return "Pending";
    case SubgoalStatus::InProgress: return "InProgress";
    case SubgoalStatus::Completed: return "Completed";
    case SubgoalStatus::Abandoned: return "Abandoned";
  }
  return "?";
}

using nlohmann::json;

std::string trajectory_to_json(const TrajectoryRecord& t) {
  json j;
  json conds = json::array();
  for (const auto& c : t.conditions) {
    json jc;
    jc["category"] = c.category;
    jc["predicate"] = to_string(c.predicate);
    if (c.destination) jc["destination"] = *c.destination;
    jc["count"] = c.count;
    conds.push_back(std::move(jc));
  }
  j["conditions"] = conds;
  j["initial_atoms"] = t.initial_atoms;
  j["initial_satisfied"] = t.initial_satisfied;
  json steps = json::array();
  for (const auto& s : t.steps) {
    json js;
    js["action"] = s.action;
    js["added"] = s.added;
    js["removed"] = s.removed;
    js["satisfied"] = s.satisfied;
    steps.push_back(std::move(js));
  }
  j["steps"] = steps;
  return j.dump(2) + "\n";
}

TrajectoryRecord trajectory_from_json(const std::string& text) {
  json j = json::parse(text);
  TrajectoryRecord t;
  for (const auto& jc : j.at("conditions")) {
    sim::GoalCondition c;
    c.category = jc.at("category");
    auto p = subgoal_predicate_from(jc.at("predicate").get<std::string>());
    if (!p) throw InconsistentTrajectory("unknown predicate in conditions");
    c.predicate = *p;
    if (jc.contains("destination")) c.destination = jc["destination"].get<std::string>();
    c.count = jc.value("count", 1);
    t.conditions.push_back(std::move(c));
  }
  t.initial_atoms = j.value("initial_atoms", std::vector<std::string>{});
  t.initial_satisfied = j.value("initial_satisfied", std::vector<bool>{});
  for (const auto& js : j.at("steps")) {
    sim::TrajectoryStep s;
    s.action = js.value("action", "");
    s.added = js.value("added", std::vector<std::string>{});
    s.removed = js.value("removed", std::vector<std::string>{});
    s.satisfied = js.at("satisfied").get<std::vector<bool>>();
    t.steps.push_back(std::move(s));
  }
  return t;
}

std::vector<std::pair<int, Subgoal>> annotate_subgoals(const TrajectoryRecord& t) {
  // replay the diffs for consistency
  std::set<std::string> atoms(t.initial_atoms.begin(), t.initial_atoms.end());
  for (size_t i = 0; i < t.steps.size(); ++i) {
    for (const auto& a : t.steps[i].added)
      if (!atoms.insert(a).second)
        throw InconsistentTrajectory("step " + std::to_string(i + 1) +
                                     " adds present atom " + a);
    for (const auto& r : t.steps[i].removed)
      if (atoms.erase(r) == 0)
        throw InconsistentTrajectory("step " + std::to_string(i + 1) +
                                     " removes absent atom " + r);
    if (t.steps[i].satisfied.size() != t.conditions.size())
      throw InconsistentTrajectory("satisfaction vector arity mismatch");
  }

  std::vector<std::pair<int, Subgoal>> out;
  for (size_t c = 0; c < t.conditions.size(); ++c) {
    bool prev = c < t.initial_satisfied.size() && t.initial_satisfied[c];
    int first = prev ? 0 : -1;
    for (size_t i = 0; i < t.steps.size(); ++i) {
      bool now = t.steps[i].satisfied[c];
      if (prev && !now)
        throw InconsistentTrajectory("condition " + std::to_string(c) +
                                     " regressed at step " + std::to_string(i + 1));
      if (now && first < 0) first = static_cast<int>(i) + 1;
      prev = now;
    }
    if (first >= 0) {
      Subgoal s;
      s.patient = t.conditions[c].category;
      s.predicate = t.conditions[c].predicate;
      s.destination = t.conditions[c].destination;
      out.emplace_back(first, s);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

namespace {

std::string normalize(const std::string& s) {
  std::string out;
  bool space = true;
  for (char ch : s) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
      space = false;
    } else {
      if (!space) out += ' ';
      space = true;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

Subgoal sg(const std::string& patient, SubgoalPredicate p,
           const std::string& dest = "") {
  Subgoal s;
  s.patient = patient;
  s.predicate = p;
  if (!dest.empty()) s.destination = dest;
  return s;
}

}  // namespace

Lexicon Lexicon::builtin() {
  using SP = SubgoalPredicate;
  Lexicon lx;
  auto add = [&](const std::string& pattern, std::vector<Subgoal> sgs) {
    lx.entries.push_back({pattern, std::move(sgs)});
  };

  add("toast", {sg("Bread", SP::isSliced), sg("BreadSlice", SP::isCooked)});
  add("make coffee", {sg("Mug", SP::simbotIsFilledWithCoffee)});
  add("make a coffee", {sg("Mug", SP::simbotIsFilledWithCoffee)});
  add("fill it with coffee", {sg("Mug", SP::simbotIsFilledWithCoffee)});
  add("with coffee", {sg("Mug", SP::simbotIsFilledWithCoffee)});
  add("cup of coffee", {sg("Mug", SP::simbotIsFilledWithCoffee)});
  add("slice the bread", {sg("Bread", SP::isSliced)});
  add("cut the bread", {sg("Bread", SP::isSliced)});
  add("slice the tomato", {sg("Tomato", SP::isSliced)});
  add("cut the tomato", {sg("Tomato", SP::isSliced)});
  add("slice the lettuce", {sg("Lettuce", SP::isSliced)});
  add("slice the potato", {sg("Potato", SP::isSliced)});
  add("boil the potato", {sg("Potato", SP::isCooked)});
  add("boil a potato", {sg("Potato", SP::isCooked)});
  add("cook the potato", {sg("Potato", SP::isCooked)});
  add("cook a slice of potato", {sg("PotatoSlice", SP::isCooked)});
  add("water the plant", {sg("Cup", SP::isFilledWithLiquid),
                          sg("Cup", SP::isPlacedTo, "HousePlant")});
  add("clean the mug", {sg("Mug", SP::isClean)});
  add("wash the mug", {sg("Mug", SP::isClean)});
  add("clean the plate", {sg("Plate", SP::isClean)});
  add("wash the plate", {sg("Plate", SP::isClean)});
  add("clean the bowl", {sg("Bowl", SP::isClean)});
  add("clean the cup", {sg("Cup", SP::isClean)});
  add("clean all the plates", {sg("Plate", SP::isClean)});
  add("fill the mug with water", {sg("Mug", SP::isFilledWithLiquid)});
  add("fill the cup with water", {sg("Cup", SP::isFilledWithLiquid)});
  add("empty the sink", {sg("Sink", SP::isEmptied)});
  add("turn on the faucet", {sg("Faucet", SP::isToggled)});
  add("pick up the knife", {sg("Knife", SP::isPickedUp)});
  add("grab the knife", {sg("Knife", SP::isPickedUp)});

  lx.aliases = {
      {"bread slice", "BreadSlice"}, {"slice of bread", "BreadSlice"},
      {"tomato slice", "TomatoSlice"}, {"potato slice", "PotatoSlice"},
      {"dining table", "DiningTable"}, {"house plant", "HousePlant"},
      {"coffee machine", "CoffeeMachine"}, {"counter top", "CounterTop"},
      {"countertop", "CounterTop"}, {"counter", "CounterTop"},
      {"table", "DiningTable"}, {"plant", "HousePlant"},
      {"mug", "Mug"}, {"cup", "Cup"}, {"bowl", "Bowl"}, {"plate", "Plate"},
      {"plates", "Plate"}, {"knife", "Knife"}, {"bread", "Bread"},
      {"tomato", "Tomato"}, {"lettuce", "Lettuce"}, {"potato", "Potato"},
      {"pan", "Pan"}, {"pot", "Pot"}, {"cabinet", "Cabinet"},
      {"fridge", "Fridge"}, {"sink", "Sink"}, {"toaster", "Toaster"},
      {"microwave", "Microwave"}, {"shelf", "Shelf"}, {"fork", "Fork"},
      {"spoon", "Spoon"},
  };
  return lx;
}

Lexicon Lexicon::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot read lexicon: " + path);
  json j;
  in >> j;
  Lexicon lx = builtin();
  if (j.contains("entries")) {
    lx.entries.clear();
    for (const auto& je : j["entries"]) {
      Lexicon::Entry e;
      e.pattern = je.at("pattern");
      for (const auto& js : je.at("subgoals")) {
        Subgoal s;
        s.patient = js.at("patient");
        auto p = subgoal_predicate_from(js.at("predicate").get<std::string>());
        if (!p) throw std::runtime_error("unknown predicate in lexicon");
        s.predicate = *p;
        if (js.contains("destination"))
          s.destination = js["destination"].get<std::string>();
        e.subgoals.push_back(std::move(s));
      }
      lx.entries.push_back(std::move(e));
    }
  }
  if (j.contains("aliases")) {
    lx.aliases.clear();
    for (auto& [k, v] : j["aliases"].items())
      lx.aliases.emplace_back(normalize(k), v.get<std::string>());
  }
  return lx;
}

std::vector<Subgoal> parse_subgoals(const std::vector<std::string>& turns,
                                    const Lexicon& lexicon) {
  std::vector<Subgoal> out;
  auto push_unique = [&](const Subgoal& s) {
    for (const auto& have : out)
      if (have == s) return;
    out.push_back(s);
  };

  // longest alias first so "dining table" beats "table"
  auto aliases = lexicon.aliases;
  std::stable_sort(aliases.begin(), aliases.end(),
                   [](const auto& a, const auto& b) {
                     return a.first.size() > b.first.size();
                   });
  auto find_alias = [&](const std::string& text) -> std::string {
    size_t best_pos = std::string::npos;
    std::string best;
    for (const auto& [phrase, cat] : aliases) {
      size_t p = text.find(" " + phrase + " ");
      if (p == std::string::npos) {
        if (text.rfind(phrase + " ", 0) == 0) p = 0;
        else if (text.size() > phrase.size() &&
                 text.compare(text.size() - phrase.size() - 1,
                              phrase.size() + 1, " " + phrase) == 0)
          p = text.size() - phrase.size();
        else if (text == phrase) p = 0;
      }
      if (p != std::string::npos && (best_pos == std::string::npos || p < best_pos)) {
        best_pos = p;
        best = cat;
      }
    }
    return best;
  };

  static const std::regex place_re(
      "\\b(?:put|place|move)\\b(.*?)\\b(?:onto|into|on|in)\\b(.*)");

  for (const auto& turn : turns) {
    std::string text = normalize(turn);
    if (text.empty()) continue;

    struct Match {
      size_t pos;
      size_t order;
      std::vector<Subgoal> subgoals;
    };
    std::vector<Match> matches;

    for (size_t e = 0; e < lexicon.entries.size(); ++e) {
      size_t p = text.find(lexicon.entries[e].pattern);
      if (p != std::string::npos)
        matches.push_back({p, e, lexicon.entries[e].subgoals});
    }

    std::smatch m;
    if (std::regex_search(text, m, place_re)) {
      std::string x = find_alias(" " + m[1].str() + " ");
      std::string y = find_alias(" " + m[2].str() + " ");
      if (!x.empty() && !y.empty())
        matches.push_back({static_cast<size_t>(m.position(0)),
                           lexicon.entries.size(),
                           {sg(x, SubgoalPredicate::isPlacedTo, y)}});
    }

    std::stable_sort(matches.begin(), matches.end(),
                     [](const Match& a, const Match& b) {
                       if (a.pos != b.pos) return a.pos < b.pos;
                       return a.order < b.order;
                     });
    for (const auto& match : matches)
      for (const auto& s : match.subgoals) push_unique(s);
  }

  if (out.empty()) throw EmptyResult();
  return out;
}

bool check_completed(const Subgoal& subgoal, const planner::BeliefSnapshot& belief,
                     int required_count) {
  return planner::subgoal_completed(subgoal, belief, required_count);
}

}  // namespace delib::monitor
