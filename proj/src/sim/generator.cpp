#include "delib/sim/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "delib/sim/affordance.hpp"
#include "delib/util/rng.hpp"

namespace delib::sim {

namespace {

using monitor::Subgoal;
using monitor::SubgoalPredicate;

struct FixturePlan {
  std::string category;
  int w, d, h;
};

// kitchen suite present in every scene, placed along the walls
const std::vector<FixturePlan>& fixture_catalogue() {
  static const std::vector<FixturePlan> fx = {
      {"CounterTop", 2, 2, 3}, {"Sink", 1, 1, 2},      {"StoveBurner", 1, 1, 2},
      {"Toaster", 1, 1, 2},    {"CoffeeMachine", 1, 1, 3},
      {"Microwave", 1, 1, 4},  {"Fridge", 1, 1, 6},    {"Cabinet", 1, 1, 5},
      {"CounterTop", 2, 2, 3}, {"DiningTable", 2, 2, 3},
      {"Shelf", 1, 1, 4},      {"SideTable", 1, 1, 2}, {"GarbageCan", 1, 1, 2},
      {"HousePlant", 1, 1, 2},
  };
  return fx;
}

const std::vector<std::string>& distractor_categories() {
  static const std::vector<std::string> cats = {
      "Fork", "Spoon", "SaltShaker", "PepperShaker", "Book", "Vase",
      "Statue", "TissueBox", "Pen", "Pencil", "KeyChain", "RemoteControl",
      "CellPhone", "Watch", "CreditCard", "SoapBar"};
  return cats;
}

struct TaskPlan {
  std::vector<GoalCondition> conditions;
  // items to spawn: (category, dirty, may_hide)
  struct Item {
    std::string category;
    bool dirty = false;
    bool may_hide = true;
  };
  std::vector<Item> items;
  bool pot_on_stove = false;
  bool pan_on_stove = false;
};

GoalCondition gc(const std::string& cat, SubgoalPredicate p, int count = 1,
                 const std::string& dest = "") {
  GoalCondition c;
  c.category = cat;
  c.predicate = p;
  c.count = count;
  if (!dest.empty()) c.destination = dest;
  return c;
}

TaskPlan task_plan(const std::string& name) {
  using SP = SubgoalPredicate;
  TaskPlan t;
  if (name == "WaterPlant") {
    t.conditions = {gc("Cup", SP::isFilledWithLiquid),
                    gc("Cup", SP::isPlacedTo, 1, "HousePlant")};
    t.items = {{"Cup"}};
  } else if (name == "Coffee") {
    t.conditions = {gc("Mug", SP::isClean), gc("Mug", SP::simbotIsFilledWithCoffee)};
    t.items = {{"Mug", true}};
  } else if (name == "Toast") {
    t.conditions = {gc("Bread", SP::isSliced), gc("BreadSlice", SP::isCooked, 2)};
    t.items = {{"Bread"}, {"Knife"}};
  } else if (name == "Boil") {
    t.conditions = {gc("Potato", SP::isCooked)};
    t.items = {{"Potato"}};
    t.pot_on_stove = true;
  } else if (name == "PutAll") {
    t.conditions = {gc("Plate", SP::isPlacedTo, 3, "DiningTable")};
    t.items = {{"Plate", false}, {"Plate", false}, {"Plate", false}};
  } else if (name == "PutInOne") {
    t.conditions = {gc("Cup", SP::isPlacedTo, 2, "Cabinet")};
    t.items = {{"Cup"}, {"Cup"}};
  } else if (name == "CleanAll") {
    t.conditions = {gc("Plate", SP::isClean, 2)};
    t.items = {{"Plate", true}, {"Plate", true}};
  } else if (name == "Slices") {
    t.conditions = {gc("Tomato", SP::isSliced), gc("Lettuce", SP::isSliced)};
    t.items = {{"Tomato"}, {"Lettuce"}, {"Knife"}};
  } else if (name == "CookSlices") {
    t.conditions = {gc("Potato", SP::isSliced), gc("PotatoSlice", SP::isCooked, 2)};
    t.items = {{"Potato"}, {"Knife"}};
    t.pan_on_stove = true;
  } else if (name == "Breakfast") {
    t.conditions = {gc("Mug", SP::isClean), gc("Mug", SP::simbotIsFilledWithCoffee),
                    gc("Bread", SP::isSliced), gc("BreadSlice", SP::isCooked),
                    gc("BreadSlice", SP::isPlacedTo, 1, "Plate")};
    t.items = {{"Mug", true}, {"Bread"}, {"Knife"}, {"Plate", false, false}};
  } else if (name == "Sandwich") {
    t.conditions = {gc("Bread", SP::isSliced), gc("BreadSlice", SP::isCooked, 2),
                    gc("Tomato", SP::isSliced),
                    gc("BreadSlice", SP::isPlacedTo, 2, "Plate"),
                    gc("TomatoSlice", SP::isPlacedTo, 1, "Plate")};
    t.items = {{"Bread"}, {"Tomato"}, {"Knife"}, {"Plate", false, false}};
  } else if (name == "Salad") {
    t.conditions = {gc("Lettuce", SP::isSliced), gc("Tomato", SP::isSliced),
                    gc("Potato", SP::isSliced), gc("PotatoSlice", SP::isCooked),
                    gc("LettuceSlice", SP::isPlacedTo, 1, "Bowl"),
                    gc("TomatoSlice", SP::isPlacedTo, 1, "Bowl"),
                    gc("PotatoSlice", SP::isPlacedTo, 1, "Bowl")};
    t.items = {{"Lettuce"}, {"Tomato"}, {"Potato"}, {"Knife"},
               {"Bowl", false, false}};
    t.pan_on_stove = true;
  } else {
    throw GenerationFailure("unknown task template: " + name);
  }
  return t;
}

std::vector<Subgoal> subgoals_from_conditions(const std::vector<GoalCondition>& cs) {
  std::vector<Subgoal> out;
  for (const auto& c : cs) {
    Subgoal s;
    s.patient = c.category;
    s.predicate = c.predicate;
    s.destination = c.destination;
    for (int i = 0; i < c.count; ++i) out.push_back(s);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& task_templates() {
  static const std::vector<std::string> names = {
      "WaterPlant", "PutInOne", "Boil",   "PutAll",     "Coffee",   "CleanAll",
      "Toast",      "Slices",   "CookSlices", "Breakfast", "Sandwich", "Salad"};
  return names;
}

EpisodeSpec generate_scene(const std::string& template_name, uint64_t seed,
                           const Difficulty& difficulty) {
  TaskPlan plan = task_plan(template_name);
  Rng rng(seed ^ fnv1a(template_name.data(), template_name.size()));

  EpisodeSpec ep;
  ep.task.name = template_name;
  ep.task.conditions = plan.conditions;
  ep.subgoals = subgoals_from_conditions(plan.conditions);

  // room size grows with the distractor load
  int side = 16;
  if (difficulty.distractors > 30)
    side = std::max(16, static_cast<int>(std::ceil(
                            std::sqrt(difficulty.distractors * 2.5))) + 10);
  ep.scene.X = ep.scene.Y = side;
  ep.scene.Z = 8;

  for (int x = 0; x < side; ++x) {
    ep.scene.blocked.push_back({x, 0});
    ep.scene.blocked.push_back({x, side - 1});
  }
  for (int y = 1; y < side - 1; ++y) {
    ep.scene.blocked.push_back({0, y});
    ep.scene.blocked.push_back({side - 1, y});
  }

  ep.scene.agent.cell = {side / 2, side / 2};
  ep.scene.agent.heading = 0;
  ep.scene.agent.pitch = 0;

  std::set<std::pair<int, int>> taken;  // cells claimed by fixture footprints
  auto claim = [&](int x, int y, int w, int d) {
    for (int dy = 0; dy < d; ++dy)
      for (int dx = 0; dx < w; ++dx)
        taken.insert({x + dx, y + dy});
  };
  auto free_rect = [&](int x, int y, int w, int d) {
    if (x < 1 || y < 1 || x + w > side - 1 || y + d > side - 1) return false;
    for (int dy = 0; dy < d; ++dy)
      for (int dx = 0; dx < w; ++dx)
        if (taken.count({x + dx, y + dy})) return false;
    // keep the agent start open
    for (int dy = 0; dy < d; ++dy)
      for (int dx = 0; dx < w; ++dx)
        if (Cell{x + dx, y + dy} == ep.scene.agent.cell) return false;
    return true;
  };

  std::map<std::string, int> ordinals;
  auto fresh_id = [&](const std::string& cat) {
    return cat + "_" + std::to_string(ordinals[cat]++);
  };

  auto add_fixture = [&](const FixturePlan& f, int x, int y) -> std::string {
    InstanceSpec spec;
    spec.id = fresh_id(f.category);
    spec.category = f.category;
    spec.position = {x * kVoxelSize, y * kVoxelSize, 0};
    spec.size = {f.w * kVoxelSize, f.d * kVoxelSize, f.h * kVoxelSize};
    ep.scene.instances.push_back(spec);
    claim(x, y, f.w, f.d);
    return spec.id;
  };

  // walk the four wall bands; seeded start offset varies layouts per seed
  struct WallCursor {
    int wall = 0;  // 0 south, 1 east, 2 north, 3 west
    int pos = 1;
  };
  WallCursor cur;
  cur.pos = 1 + static_cast<int>(rng.below(4));
  std::string sink_id;
  std::map<std::string, std::string> fixture_first;  // category -> first id

  auto place_on_walls = [&](const FixturePlan& f) -> std::string {
    for (int attempts = 0; attempts < 4 * side; ++attempts) {
      int x = 0, y = 0;
      bool fits = false;
      switch (cur.wall) {
        case 0: x = cur.pos; y = 1; break;
        case 1: x = side - 1 - f.w; y = cur.pos; break;
        case 2: x = cur.pos; y = side - 1 - f.d; break;
        default: x = 1; y = cur.pos; break;
      }
      fits = free_rect(x, y, f.w, f.d);
      int span = (cur.wall == 0 || cur.wall == 2) ? f.w : f.d;
      cur.pos += fits ? span + 1 : 1;
      int limit = side - 2;
      if (cur.pos + span > limit + 1) {
        cur.wall = (cur.wall + 1) % 4;
        cur.pos = 1;
      }
      if (fits) return add_fixture(f, x, y);
    }
    throw GenerationFailure("no wall space for " + f.category);
  };

  for (const auto& f : fixture_catalogue()) {
    std::string id = place_on_walls(f);
    if (!fixture_first.count(f.category)) fixture_first[f.category] = id;
    if (f.category == "Sink") sink_id = id;
  }

  // faucet shares the sink column, elevated above the basin slots
  {
    const InstanceSpec* sink = nullptr;
    for (const auto& i : ep.scene.instances)
      if (i.id == sink_id) sink = &i;
    InstanceSpec faucet;
    faucet.id = fresh_id("Faucet");
    faucet.category = "Faucet";
    faucet.position = {sink->position.x, sink->position.y, 5 * kVoxelSize};
    faucet.size = {kVoxelSize, kVoxelSize, kVoxelSize};
    ep.scene.instances.push_back(faucet);
  }

  if (plan.pot_on_stove || plan.pan_on_stove) {
    InstanceSpec vessel;
    vessel.id = fresh_id(plan.pot_on_stove ? "Pot" : "Pan");
    vessel.category = plan.pot_on_stove ? "Pot" : "Pan";
    vessel.supported_on = fixture_first["StoveBurner"];
    vessel.size = {kVoxelSize, kVoxelSize, kVoxelSize};
    ep.scene.instances.push_back(vessel);
  }

  // surfaces that receive loose items
  std::vector<std::string> surfaces;
  for (const auto& i : ep.scene.instances)
    if (i.category == "CounterTop" || i.category == "DiningTable" ||
        i.category == "SideTable" || i.category == "Shelf")
      surfaces.push_back(i.id);

  std::map<std::string, int> surface_load;
  auto place_item = [&](const std::string& cat, bool dirty, bool may_hide) {
    InstanceSpec item;
    item.id = fresh_id(cat);
    item.category = cat;
    item.size = {kVoxelSize, kVoxelSize, kVoxelSize};
    if (dirty) item.states["isClean"] = false;
    bool hide = may_hide && rng.chance(difficulty.p_hidden);
    if (hide) {
      const char* host = rng.chance(0.5) ? "Fridge" : "Cabinet";
      item.contained_in = fixture_first[host];
    } else {
      // spread across surfaces, respecting slot counts
      for (size_t k = 0; k < surfaces.size(); ++k) {
        const std::string& s = surfaces[rng.below(surfaces.size())];
        if (surface_load[s] < 4) {
          item.supported_on = s;
          ++surface_load[s];
          break;
        }
        (void)k;
      }
      if (item.supported_on.empty()) {
        item.supported_on = surfaces[0];
        ++surface_load[surfaces[0]];
      }
    }
    ep.scene.instances.push_back(item);
  };

  for (const auto& it : plan.items) place_item(it.category, it.dirty, it.may_hide);

  // distractors on free interior floor cells
  const auto& dcats = distractor_categories();
  int placed = 0, guard = 0;
  while (placed < difficulty.distractors && guard++ < difficulty.distractors * 50) {
    int x = 1 + static_cast<int>(rng.below(side - 2));
    int y = 1 + static_cast<int>(rng.below(side - 2));
    if (taken.count({x, y})) continue;
    if (Cell{x, y} == ep.scene.agent.cell) continue;
    taken.insert({x, y});
    InstanceSpec item;
    item.category = dcats[placed % dcats.size()];
    item.id = fresh_id(item.category);
    item.position = {x * kVoxelSize, y * kVoxelSize, 0};
    item.size = {kVoxelSize, kVoxelSize, kVoxelSize};
    ep.scene.instances.push_back(item);
    ++placed;
  }
  if (placed < difficulty.distractors)
    throw GenerationFailure("could not place all distractors");

  return ep;
}

}  // namespace delib::sim
