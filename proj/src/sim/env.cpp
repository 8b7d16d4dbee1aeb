#include "delib/sim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "delib/core/dda.hpp"

namespace delib::sim {

namespace {

const AffordanceTable& aff() { return AffordanceTable::builtin(); }

constexpr int kBandLo = 1;  // 0.25 m
constexpr int kBandHi = 6;  // up to 1.75 m
constexpr double kMaxRange = 10.0;

}  // namespace

Env::Env(SceneSpec scene, TaskSpec task, NoiseConfig noise, uint64_t noise_seed,
         Camera camera)
    : scene_(std::move(scene)),
      task_(std::move(task)),
      noise_(noise),
      rng_(noise_seed),
      camera_(camera),
      pose_(scene_.agent) {
  for (const auto& spec : scene_.instances) {
    Rt r;
    r.id = spec.id;
    r.category = spec.category;
    r.base = voxel_of(spec.position + Vec3{1e-6, 1e-6, 1e-6});
    r.dims = {std::max(1, int(std::lround(spec.size.x / kVoxelSize))),
              std::max(1, int(std::lround(spec.size.y / kVoxelSize))),
              std::max(1, int(std::lround(spec.size.z / kVoxelSize)))};
    const CategoryInfo* info = aff().find(spec.category);
    r.capacity = spec.capacity >= 0 ? spec.capacity : (info ? info->capacity : 3);
    r.open = spec.open;
    if (info && info->dirtyable) r.clean = false;
    for (const auto& [k, v] : spec.states) {
      if (k == "isToggled") r.toggled = v;
      else if (k == "isClean") r.clean = v;
      else if (k == "isCooked") r.cooked = v;
      else if (k == "isSliced") r.sliced = v;
      else if (k == "isFilledWithLiquid") r.filled = v;
      else if (k == "simbotIsFilledWithCoffee") r.coffee = v;
      else if (k == "isOpen") r.open = v;
    }
    if (!spec.contained_in.empty()) r.parent = spec.contained_in;
    else if (!spec.supported_on.empty()) r.parent = spec.supported_on;
    id_index_[r.id] = static_cast<int>(rt_.size());
    rt_.push_back(r);
  }

  // occupants of a receptacle snap into its slot list in scene order
  std::map<std::string, int> used_slots;
  for (auto& r : rt_) {
    if (r.parent.empty()) continue;
    const Rt* parent = find(r.parent);
    if (!parent) throw std::runtime_error("unknown parent " + r.parent);
    auto slots = slot_voxels(*parent);
    int k = used_slots[r.parent]++;
    if (k < static_cast<int>(slots.size())) r.base = slots[k];
  }

  rebuild_grid();
  render();
  prev_atoms_ = oracle_atoms();
  initial_atoms_.assign(prev_atoms_.begin(), prev_atoms_.end());
  for (const auto& c : task_.conditions)
    initial_satisfied_.push_back(condition_satisfied_count(c) >= c.count);
}

Env::Rt* Env::find(const std::string& id) {
  auto it = id_index_.find(id);
  return it == id_index_.end() ? nullptr : &rt_[it->second];
}
const Env::Rt* Env::find(const std::string& id) const {
  auto it = id_index_.find(id);
  return it == id_index_.end() ? nullptr : &rt_[it->second];
}
int Env::rt_index(const std::string& id) const {
  auto it = id_index_.find(id);
  return it == id_index_.end() ? -1 : it->second;
}

Vec3 Env::rt_centroid(const Rt& r) const {
  return {(r.base.x + r.dims.x / 2.0) * kVoxelSize,
          (r.base.y + r.dims.y / 2.0) * kVoxelSize,
          (r.base.z + r.dims.z / 2.0) * kVoxelSize};
}

bool Env::hidden_in_closed(const Rt& r) const {
  const Rt* cur = &r;
  int guard = 0;
  while (!cur->parent.empty() && guard++ < 32) {
    const Rt* p = find(cur->parent);
    if (!p) break;
    const CategoryInfo* info = aff().find(p->category);
    if (info && info->container && p->dims.z >= 3 && !p->open) return true;
    cur = p;
  }
  return false;
}

std::vector<VoxelIdx> Env::slot_voxels(const Rt& r) const {
  std::vector<VoxelIdx> slots;
  std::vector<std::pair<int, int>> footprint;
  for (int dy = 0; dy < r.dims.y; ++dy)
    for (int dx = 0; dx < r.dims.x; ++dx)
      footprint.emplace_back(r.base.x + dx, r.base.y + dy);
  const CategoryInfo* info = aff().find(r.category);
  const bool interior = info && info->container && r.dims.z >= 3;
  const int n = static_cast<int>(footprint.size());
  const int max_slots = std::max(r.capacity, 1);
  for (int k = 0; k < max_slots; ++k) {
    int z;
    if (interior) {
      z = r.base.z + 1 + k / n;
      if (z > r.base.z + r.dims.z - 2) break;
    } else {
      z = r.base.z + r.dims.z + k / n;
      if (z >= scene_.Z) break;
    }
    slots.push_back({footprint[k % n].first, footprint[k % n].second, z});
  }
  return slots;
}

std::optional<VoxelIdx> Env::next_free_slot(const Rt& receptacle) const {
  for (const auto& s : slot_voxels(receptacle)) {
    bool used = false;
    for (const auto& r : rt_) {
      if (!r.alive || r.held) continue;
      if (r.base == s) { used = true; break; }
    }
    if (!used) return s;
  }
  return std::nullopt;
}

int Env::direct_children(const std::string& id) const {
  int n = 0;
  for (const auto& r : rt_)
    if (r.alive && !r.held && r.parent == id) ++n;
  return n;
}

std::string Env::linked_sink(const Rt& faucet) const {
  double best = 1e18;
  std::string out;
  for (const auto& r : rt_) {
    if (!r.alive) continue;
    const CategoryInfo* info = aff().find(r.category);
    if (!info || !info->is_sink) continue;
    double d = (rt_centroid(r) - rt_centroid(faucet)).norm();
    if (d < best) {
      best = d;
      out = r.id;
    }
  }
  return out;
}

std::vector<VoxelIdx> Env::solid_voxels(const Rt& r) const {
  std::vector<VoxelIdx> out;
  if (!r.alive || r.held) return out;
  // anything carried with a held ancestor has no physical footprint
  {
    const Rt* cur = &r;
    int guard = 0;
    while (!cur->parent.empty() && guard++ < 32) {
      const Rt* p = find(cur->parent);
      if (!p) break;
      if (p->held) return out;
      cur = p;
    }
  }
  const CategoryInfo* info = aff().find(r.category);
  const bool open_interior = info && info->container && r.dims.z >= 3 && r.open;
  for (int dz = 0; dz < r.dims.z; ++dz)
    for (int dy = 0; dy < r.dims.y; ++dy)
      for (int dx = 0; dx < r.dims.x; ++dx) {
        VoxelIdx v{r.base.x + dx, r.base.y + dy, r.base.z + dz};
        if (open_interior && dz >= 1 && dz <= r.dims.z - 2) continue;  // shell
        out.push_back(v);
      }
  return out;
}

int32_t Env::cell_key(const VoxelIdx& v) const {
  return v.x + scene_.X * (v.y + scene_.Y * v.z);
}

void Env::rebuild_grid() {
  grid_.assign(static_cast<size_t>(scene_.X) * scene_.Y * scene_.Z, -1);
  for (const auto& c : scene_.blocked)
    for (int z = 0; z < scene_.Z; ++z)
      grid_[cell_key({c.x, c.y, z})] = -2;
  for (size_t i = 0; i < rt_.size(); ++i) {
    const Rt& r = rt_[i];
    if (!r.alive || hidden_in_closed(r)) continue;
    for (const auto& v : solid_voxels(r)) {
      if (v.x < 0 || v.y < 0 || v.z < 0 || v.x >= scene_.X || v.y >= scene_.Y ||
          v.z >= scene_.Z)
        continue;
      grid_[cell_key(v)] = static_cast<int32_t>(i);
    }
  }
}

bool Env::cell_blocked(const Cell& c) const {
  if (c.x < 0 || c.y < 0 || c.x >= scene_.X || c.y >= scene_.Y) return true;
  for (int z = kBandLo; z <= std::min(kBandHi, scene_.Z - 1); ++z)
    if (grid_[cell_key({c.x, c.y, z})] != -1) return true;
  return false;
}

void Env::render() {
  const int W = camera_.width, H = camera_.height;
  last_obs_ = Observation{};
  last_obs_.pose = pose_;
  last_obs_.width = W;
  last_obs_.height = H;
  last_obs_.depth.assign(static_cast<size_t>(W) * H, 0.f);
  last_obs_.seg.assign(static_cast<size_t>(W) * H, -1);
  true_seg_.assign(static_cast<size_t>(W) * H, -1);

  const Vec3 eye = pose_.eye();
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const Vec3 dir = camera_.pixel_ray(pose_, u, v);
      float depth = 0.f;
      int32_t key = -1;
      walk_ray(eye, dir, kMaxRange, [&](const VoxelIdx& vox, double t) {
        if (vox.z < 0) {  // floor plane
          depth = static_cast<float>(t);
          key = -1;
          return false;
        }
        if (vox.x < 0 || vox.y < 0 || vox.x >= scene_.X || vox.y >= scene_.Y ||
            vox.z >= scene_.Z)
          return false;  // out the open top/side: no hit
        int32_t g = grid_[cell_key(vox)];
        if (g != -1) {
          depth = static_cast<float>(t);
          key = g >= 0 ? g : -1;
          return false;
        }
        return true;
      });
      const size_t px = static_cast<size_t>(v) * W + u;
      if (depth > 0 && noise_.depth_sigma > 0) {
        depth = static_cast<float>(
            std::max(0.05, depth + rng_.gaussian(0, noise_.depth_sigma)));
      }
      last_obs_.depth[px] = depth;
      true_seg_[px] = key;
      last_obs_.seg[px] = key;
    }
  }

  // visible keys, sorted for a deterministic noise stream
  std::set<int32_t> visible(true_seg_.begin(), true_seg_.end());
  visible.erase(-1);

  std::set<int32_t> dropped;
  if (noise_.p_detection_drop > 0)
    for (int32_t k : visible)
      if (rng_.chance(noise_.p_detection_drop)) dropped.insert(k);
  if (!dropped.empty())
    for (auto& s : last_obs_.seg)
      if (s != -1 && dropped.count(s)) s = -1;

  for (int32_t k : visible) {
    if (dropped.count(k)) continue;
    const Rt& r = rt_[k];
    const CategoryInfo* info = aff().find(r.category);
    DetectionLabel lbl;
    lbl.category = r.category;
    if (info) {
      if (info->toggleable) lbl.states["isToggled"] = r.toggled;
      if (info->openable) lbl.states["isOpen"] = r.open;
      if (info->is_food) lbl.states["isCooked"] = r.cooked;
      if (info->dirtyable) lbl.states["isClean"] = r.clean;
      if (info->fillable) {
        lbl.states["isFilledWithLiquid"] = r.filled;
        lbl.states["simbotIsFilledWithCoffee"] = r.coffee;
      }
      if (info->is_food) lbl.states["isSliced"] = r.sliced;
    }
    if (noise_.p_state_flip > 0)
      for (auto& [pred, value] : lbl.states)
        if (rng_.chance(noise_.p_state_flip)) value = !value;
    last_obs_.labels[k] = std::move(lbl);
  }
}

ActionResult Env::step(const PrimitiveAction& a) {
  if (stopped_) return {false, "stopped"};
  ++steps_;
  ActionResult res = apply(a);
  if (!res.success) ++failed_;
  fire_appliances();
  rebuild_grid();
  render();
  record(a);
  if (a.type == ActionType::Stop) stopped_ = true;
  return res;
}

ActionResult Env::apply(const PrimitiveAction& a) {
  switch (a.type) {
    case ActionType::Forward: {
      auto d = heading_step(pose_.heading);
      Cell next{pose_.cell.x + d[0], pose_.cell.y + d[1]};
      if (cell_blocked(next)) return {false, "blocked"};
      pose_.cell = next;
      return {true, ""};
    }
    case ActionType::TurnLeft:
      pose_.heading = wrap_heading(pose_.heading - 90);
      return {true, ""};
    case ActionType::TurnRight:
      pose_.heading = wrap_heading(pose_.heading + 90);
      return {true, ""};
    case ActionType::LookUp:
      if (pose_.pitch >= 60) return {false, "blocked"};
      pose_.pitch += 30;
      return {true, ""};
    case ActionType::LookDown:
      if (pose_.pitch <= -60) return {false, "blocked"};
      pose_.pitch -= 30;
      return {true, ""};
    case ActionType::Stop:
      return {true, ""};
    default:
      return manipulation(a);
  }
}

ActionResult Env::manipulation(const PrimitiveAction& a) {
  const int W = camera_.width, H = camera_.height;
  if (a.px < 0 || a.py < 0 || a.px >= W || a.py >= H) return {false, "not-visible"};
  int32_t key = true_seg_[static_cast<size_t>(a.py) * W + a.px];
  if (key < 0) return {false, "nothing-at-pixel"};
  Rt& target = rt_[key];

  Vec3 agent{(pose_.cell.x + 0.5) * kVoxelSize, (pose_.cell.y + 0.5) * kVoxelSize, 0};
  if (dist2d(agent, rt_centroid(target)) > kInteractDist)
    return {false, "not-near"};

  const CategoryInfo* info = aff().find(target.category);
  Rt* held = nullptr;
  for (auto& r : rt_)
    if (r.alive && r.held) held = &r;

  // a manipulation that would succeed may silently do nothing
  auto maybe_noop = [&]() {
    return noise_.p_action_fail > 0 && rng_.chance(noise_.p_action_fail);
  };

  switch (a.type) {
    case ActionType::PickUp: {
      if (held) return {false, "hand-occupied"};
      if (!info || !info->pickupable) return {false, "wrong-affordance"};
      if (maybe_noop()) return {true, ""};
      target.held = true;
      target.parent.clear();
      return {true, ""};
    }
    case ActionType::Place: {
      if (!held) return {false, "wrong-affordance"};
      if (!info || !info->receptacle) return {false, "wrong-affordance"};
      if (info->openable && !target.open) return {false, "wrong-affordance"};
      if (direct_children(target.id) >= target.capacity)
        return {false, "receptacle-full"};
      auto slot = next_free_slot(target);
      if (!slot) return {false, "receptacle-full"};
      if (maybe_noop()) return {true, ""};
      held->held = false;
      held->parent = target.id;
      held->base = *slot;
      int stack = 1;
      for (auto& r : rt_)
        if (r.alive && r.parent == held->id)
          r.base = {slot->x, slot->y, slot->z + stack++};
      return {true, ""};
    }
    case ActionType::Slice: {
      if (!held || held->category != "Knife") return {false, "wrong-affordance"};
      if (!info || !info->sliceable || target.sliced)
        return {false, "wrong-affordance"};
      if (maybe_noop()) return {true, ""};
      target.alive = false;
      std::string parent = target.parent;
      // candidate resting spots: the parent's slots, then the source voxel
      std::vector<VoxelIdx> spots;
      if (!parent.empty()) {
        const Rt* p = find(parent);
        if (p)
          for (const auto& s : slot_voxels(*p)) spots.push_back(s);
      }
      spots.push_back(target.base);
      for (int ring = 1; ring <= 2; ++ring)
        for (int dy = -ring; dy <= ring; ++dy)
          for (int dx = -ring; dx <= ring; ++dx)
            spots.push_back({target.base.x + dx, target.base.y + dy, target.base.z});

      auto occupied = [&](const VoxelIdx& v) {
        for (const auto& r : rt_)
          if (r.alive && !r.held && r.base == v && r.dims.x == 1 &&
              r.dims.y == 1 && r.dims.z == 1)
            return true;
        return false;
      };
      int made = 0;
      for (const auto& s : spots) {
        if (made >= info->slice_count) break;
        if (s.x < 1 || s.y < 1 || s.x >= scene_.X - 1 || s.y >= scene_.Y - 1 ||
            s.z < 0 || s.z >= scene_.Z)
          continue;
        if (occupied(s)) continue;
        Rt slice;
        slice.id = info->slice_yield + "_s" + std::to_string(next_fresh_++);
        slice.category = info->slice_yield;
        slice.base = s;
        slice.dims = {1, 1, 1};
        slice.sliced = true;
        slice.parent = parent;
        slice.capacity = 0;
        id_index_[slice.id] = static_cast<int>(rt_.size());
        rt_.push_back(slice);
        ++made;
      }
      return {true, ""};
    }
    case ActionType::ToggleOn: {
      if (!info || !info->toggleable || target.toggled)
        return {false, "wrong-affordance"};
      if (maybe_noop()) return {true, ""};
      target.toggled = true;
      return {true, ""};
    }
    case ActionType::ToggleOff: {
      if (!info || !info->toggleable || !target.toggled)
        return {false, "wrong-affordance"};
      if (maybe_noop()) return {true, ""};
      target.toggled = false;
      return {true, ""};
    }
    case ActionType::Open: {
      if (!info || !info->openable || target.open) return {false, "wrong-affordance"};
      if (maybe_noop()) return {true, ""};
      target.open = true;
      return {true, ""};
    }
    case ActionType::Close: {
      if (!info || !info->openable || !target.open)
        return {false, "wrong-affordance"};
      if (maybe_noop()) return {true, ""};
      target.open = false;
      return {true, ""};
    }
    case ActionType::Pour: {
      if (!held) return {false, "wrong-affordance"};
      const CategoryInfo* hinfo = aff().find(held->category);
      if (!hinfo || !hinfo->fillable || !held->filled)
        return {false, "wrong-affordance"};
      if (!info || !info->receptacle) return {false, "wrong-affordance"};
      if (maybe_noop()) return {true, ""};
      held->filled = false;
      held->coffee = false;
      return {true, ""};
    }
    default:
      return {false, "wrong-affordance"};
  }
}

void Env::fire_appliances() {
  for (auto& appliance : rt_) {
    if (!appliance.alive || !appliance.toggled) continue;
    const CategoryInfo* info = aff().find(appliance.category);
    if (!info) continue;

    auto for_children = [&](const std::string& id, auto&& fn) {
      for (auto& r : rt_)
        if (r.alive && !r.held && r.parent == id) fn(r);
    };

    if (info->cooks_contained ||
        (info->cooks_contained_closed && !appliance.open)) {
      for_children(appliance.id, [&](Rt& c) {
        const CategoryInfo* ci = aff().find(c.category);
        if (ci && ci->is_food) c.cooked = true;
        for_children(c.id, [&](Rt& cc) {
          const CategoryInfo* cci = aff().find(cc.category);
          if (cci && cci->is_food) cc.cooked = true;
        });
      });
    }
    if (info->stove_top) {
      for_children(appliance.id, [&](Rt& vessel) {
        for_children(vessel.id, [&](Rt& c) {
          const CategoryInfo* ci = aff().find(c.category);
          if (ci && ci->is_food) c.cooked = true;
        });
      });
    }
    if (info->brews_coffee) {
      for_children(appliance.id, [&](Rt& c) {
        const CategoryInfo* ci = aff().find(c.category);
        if (ci && ci->fillable) {
          c.coffee = true;
          c.filled = true;
        }
      });
    }
    if (info->is_faucet) {
      std::string sink = linked_sink(appliance);
      if (!sink.empty()) {
        for_children(sink, [&](Rt& c) {
          c.clean = true;
          const CategoryInfo* ci = aff().find(c.category);
          if (ci && ci->fillable) c.filled = true;
        });
      }
    }
  }
}

std::set<std::string> Env::oracle_atoms() const {
  std::set<std::string> atoms;
  for (const auto& r : rt_) {
    if (!r.alive) continue;
    const CategoryInfo* info = aff().find(r.category);
    auto add = [&](const std::string& pred) { atoms.insert(pred + "(" + r.id + ")"); };
    if (r.cooked) add("isCooked");
    if (r.clean && info && info->dirtyable) add("isClean");
    if (r.sliced) add("isSliced");
    if (r.filled) add("isFilledWithLiquid");
    if (r.coffee) add("simbotIsFilledWithCoffee");
    if (r.toggled) add("isToggled");
    if (r.open) add("isOpen");
    if (r.held) add("isPickedUp");
    if (!r.parent.empty() && !r.held)
      atoms.insert("parentReceptacles(" + r.id + "," + r.parent + ")");
  }
  return atoms;
}

void Env::record(const PrimitiveAction& a) {
  auto atoms = oracle_atoms();
  TrajectoryStep step;
  step.action = a.str();
  std::set_difference(atoms.begin(), atoms.end(), prev_atoms_.begin(),
                      prev_atoms_.end(), std::back_inserter(step.added));
  std::set_difference(prev_atoms_.begin(), prev_atoms_.end(), atoms.begin(),
                      atoms.end(), std::back_inserter(step.removed));
  for (const auto& c : task_.conditions)
    step.satisfied.push_back(condition_satisfied_count(c) >= c.count);
  trajectory_.push_back(std::move(step));
  prev_atoms_ = std::move(atoms);
}

int Env::condition_satisfied_count(const GoalCondition& c) const {
  using monitor::SubgoalPredicate;
  std::string yield;
  if (c.predicate == SubgoalPredicate::isSliced) {
    const CategoryInfo* info = aff().find(c.category);
    if (info && !info->slice_yield.empty()) yield = info->slice_yield;
  }
  int n = 0;
  for (const auto& r : rt_) {
    if (!r.alive) continue;
    if (r.category != c.category && (yield.empty() || r.category != yield))
      continue;
    bool ok = false;
    switch (c.predicate) {
      case SubgoalPredicate::isCooked: ok = r.cooked; break;
      case SubgoalPredicate::isClean: ok = r.clean; break;
      case SubgoalPredicate::isPickedUp: ok = r.held; break;
      case SubgoalPredicate::isFilledWithLiquid: ok = r.filled; break;
      case SubgoalPredicate::isSliced: ok = r.sliced; break;
      case SubgoalPredicate::simbotIsFilledWithCoffee: ok = r.coffee; break;
      case SubgoalPredicate::isToggled: ok = r.toggled; break;
      case SubgoalPredicate::isPlacedTo: {
        if (r.held || r.parent.empty()) break;
        const Rt* p = find(r.parent);
        ok = p && c.destination && p->category == *c.destination;
        break;
      }
      case SubgoalPredicate::isEmptied:
        ok = direct_children(r.id) == 0;
        break;
    }
    if (ok) ++n;
  }
  return n;
}

std::pair<int, int> Env::goal_satisfaction() const {
  int sat = 0, req = 0;
  for (const auto& c : task_.conditions) {
    req += c.count;
    sat += std::min(c.count, condition_satisfied_count(c));
  }
  return {sat, req};
}

double Env::goal_condition_rate() const {
  auto [sat, req] = goal_satisfaction();
  return req == 0 ? 1.0 : static_cast<double>(sat) / req;
}

bool Env::task_success() const {
  auto [sat, req] = goal_satisfaction();
  return sat == req;
}

std::vector<Env::OracleInstance> Env::oracle_instances() const {
  std::vector<OracleInstance> out;
  for (const auto& r : rt_) {
    if (!r.alive) continue;
    OracleInstance o;
    o.id = r.id;
    o.category = r.category;
    o.parent = r.parent;
    o.held = r.held;
    o.open = r.open;
    const CategoryInfo* info = aff().find(r.category);
    if (info) {
      if (info->toggleable) o.states["isToggled"] = r.toggled;
      if (info->openable) o.states["isOpen"] = r.open;
      if (info->is_food) {
        o.states["isCooked"] = r.cooked;
        o.states["isSliced"] = r.sliced;
      }
      if (info->dirtyable) o.states["isClean"] = r.clean;
      if (info->fillable) {
        o.states["isFilledWithLiquid"] = r.filled;
        o.states["simbotIsFilledWithCoffee"] = r.coffee;
      }
    }
    if (r.held) o.states["isPickedUp"] = true;
    o.centroid = rt_centroid(r);
    for (const auto& v : solid_voxels(r)) o.voxels.push_back(v);
    if (o.voxels.empty()) o.voxels.push_back(r.base);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace delib::sim
