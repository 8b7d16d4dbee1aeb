#pragma once

#include <map>
#include <string>
#include <vector>

namespace delib::sim {

struct CategoryInfo {
  std::string name;
  bool pickupable = false;
  bool receptacle = false;
  bool container = false;   // contents count as contained-in (else supported-on)
  bool fillable = false;
  bool toggleable = false;
  bool openable = false;
  bool sliceable = false;
  bool is_food = false;
  bool dirtyable = false;   // may start dirty; cleaned under running water
  int capacity = 3;
  std::string slice_yield;  // category produced by slicing
  int slice_count = 0;

  // appliance roles
  bool cooks_contained = false;         // cooks food placed inside while toggled
  bool cooks_contained_closed = false;  // same, but only while closed
  bool stove_top = false;               // cooks food inside vessels placed on it
  bool brews_coffee = false;            // fills a contained fillable with coffee
  bool is_faucet = false;               // cleans/fills contents of the paired sink
  bool is_sink = false;
};

class AffordanceTable {
 public:
  static const AffordanceTable& builtin();

  const CategoryInfo* find(const std::string& category) const;
  const CategoryInfo& at(const std::string& category) const;
  const std::vector<CategoryInfo>& all() const { return cats_; }

  // category that slices into `yield`, empty if none
  std::string slice_source_of(const std::string& yield) const;

  // receptibility: whether an instance of `top` may rest on/in `bottom`
  bool can_rest_on(const std::string& top, const std::string& bottom) const;

  void add(CategoryInfo info);

 private:
  std::vector<CategoryInfo> cats_;
  std::map<std::string, size_t> index_;
};

// The planning domain matching the affordance table (parsed PDDL text).
std::string household_domain_text();

}  // namespace delib::sim
