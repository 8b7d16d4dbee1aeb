#include "delib/sim/affordance.hpp"

#include <stdexcept>

namespace delib::sim {

void AffordanceTable::add(CategoryInfo info) {
  index_[info.name] = cats_.size();
  cats_.push_back(std::move(info));
}

const CategoryInfo* AffordanceTable::find(const std::string& category) const {
  auto it = index_.find(category);
  return it == index_.end() ? nullptr : &cats_[it->second];
}

const CategoryInfo& AffordanceTable::at(const std::string& category) const {
  const CategoryInfo* c = find(category);
  if (!c) throw std::out_of_range("unknown category: " + category);
  return *c;
}

std::string AffordanceTable::slice_source_of(const std::string& yield) const {
  for (const auto& c : cats_)
    if (c.slice_yield == yield) return c.name;
  return "";
}

bool AffordanceTable::can_rest_on(const std::string& top,
                                  const std::string& bottom) const {
  const CategoryInfo* t = find(top);
  const CategoryInfo* b = find(bottom);
  if (!t || !b) return false;
  return t->pickupable && b->receptacle;
}

namespace {

CategoryInfo pickup(const std::string& name) {
  CategoryInfo c;
  c.name = name;
  c.pickupable = true;
  return c;
}

CategoryInfo food(const std::string& name) {
  CategoryInfo c = pickup(name);
  c.is_food = true;
  return c;
}

CategoryInfo sliceable_food(const std::string& name, const std::string& yield,
                            int count) {
  CategoryInfo c = food(name);
  c.sliceable = true;
  c.slice_yield = yield;
  c.slice_count = count;
  return c;
}

CategoryInfo vessel(const std::string& name, bool fillable, int capacity) {
  CategoryInfo c = pickup(name);
  c.receptacle = true;
  c.fillable = fillable;
  c.dirtyable = true;
  c.capacity = capacity;
  return c;
}

CategoryInfo fixture(const std::string& name, int capacity, bool container) {
  CategoryInfo c;
  c.name = name;
  c.receptacle = true;
  c.container = container;
  c.capacity = capacity;
  return c;
}

AffordanceTable build() {
  AffordanceTable t;

  // pickupable small items (plain: common distractors)
  for (const char* n : {"Fork", "Spoon", "SaltShaker", "PepperShaker", "Book",
                        "Vase", "Statue", "TissueBox", "Pen", "Pencil",
                        "KeyChain", "RemoteControl", "CellPhone", "Watch",
                        "CreditCard", "SoapBar"})
    t.add(pickup(n));

  t.add(pickup("Knife"));

  // foods
  t.add(sliceable_food("Bread", "BreadSlice", 4));
  t.add(food("BreadSlice"));
  t.add(sliceable_food("Potato", "PotatoSlice", 3));
  t.add(food("PotatoSlice"));
  t.add(sliceable_food("Tomato", "TomatoSlice", 3));
  t.add(food("TomatoSlice"));
  t.add(sliceable_food("Lettuce", "LettuceSlice", 3));
  t.add(food("LettuceSlice"));
  t.add(food("Apple"));

  // pickupable vessels
  {
    CategoryInfo mug = pickup("Mug");
    mug.fillable = true;
    mug.dirtyable = true;
    t.add(mug);
    CategoryInfo cup = pickup("Cup");
    cup.fillable = true;
    cup.dirtyable = true;
    t.add(cup);
  }
  t.add(vessel("Bowl", true, 3));
  t.add(vessel("Plate", false, 4));
  t.add(vessel("Pan", false, 2));
  {
    CategoryInfo pot = vessel("Pot", true, 2);
    t.add(pot);
  }

  // fixtures
  t.add(fixture("CounterTop", 8, false));
  t.add(fixture("DiningTable", 6, false));
  t.add(fixture("SideTable", 4, false));
  t.add(fixture("Shelf", 4, false));
  t.add(fixture("Bed", 2, false));
  t.add(fixture("Sofa", 2, false));
  t.add(fixture("Chair", 1, false));
  t.add(fixture("HousePlant", 2, false));
  {
    CategoryInfo sink = fixture("Sink", 3, true);
    sink.is_sink = true;
    t.add(sink);

    CategoryInfo faucet;
    faucet.name = "Faucet";
    faucet.toggleable = true;
    faucet.is_faucet = true;
    t.add(faucet);

    CategoryInfo toaster = fixture("Toaster", 2, true);
    toaster.toggleable = true;
    toaster.cooks_contained = true;
    t.add(toaster);

    CategoryInfo microwave = fixture("Microwave", 2, true);
    microwave.toggleable = true;
    microwave.openable = true;
    microwave.cooks_contained_closed = true;
    t.add(microwave);

    CategoryInfo stove = fixture("StoveBurner", 1, false);
    stove.toggleable = true;
    stove.stove_top = true;
    t.add(stove);

    CategoryInfo coffee = fixture("CoffeeMachine", 1, true);
    coffee.toggleable = true;
    coffee.brews_coffee = true;
    t.add(coffee);

    CategoryInfo fridge = fixture("Fridge", 4, true);
    fridge.openable = true;
    t.add(fridge);

    CategoryInfo cabinet = fixture("Cabinet", 4, true);
    cabinet.openable = true;
    t.add(cabinet);

    CategoryInfo garbage = fixture("GarbageCan", 3, true);
    t.add(garbage);
  }

  return t;
}

}  // namespace

const AffordanceTable& AffordanceTable::builtin() {
  static const AffordanceTable t = build();
  return t;
}

}  // namespace delib::sim
