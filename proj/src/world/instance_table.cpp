#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "delib/util/log.hpp"
#include "delib/world/world_model.hpp"

namespace delib::world {

namespace {

const sim::AffordanceTable& aff() { return sim::AffordanceTable::builtin(); }

double centroid_dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

void sort_unique(std::vector<int32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

WorldModel::WorldModel(int x, int y, int z, Camera camera)
    : map_(x, y, z), camera_(camera) {}

const InstanceRecord* WorldModel::find(const std::string& id) const {
  for (const auto& r : records_)
    if (r.id == id) return &r;
  return nullptr;
}

InstanceRecord* WorldModel::find_mutable(const std::string& id) {
  for (auto& r : records_)
    if (r.id == id) return &r;
  return nullptr;
}

void WorldModel::recompute_geometry(InstanceRecord& r) {
  Vec3 sum{0, 0, 0};
  Vec3 lo{1e18, 1e18, 1e18}, hi{-1e18, -1e18, -1e18};
  for (int32_t id : r.voxels) {
    Vec3 c = voxel_center(map_.unindex(id));
    sum = sum + c;
    lo = {std::min(lo.x, c.x - kVoxelSize / 2), std::min(lo.y, c.y - kVoxelSize / 2),
          std::min(lo.z, c.z - kVoxelSize / 2)};
    hi = {std::max(hi.x, c.x + kVoxelSize / 2), std::max(hi.y, c.y + kVoxelSize / 2),
          std::max(hi.z, c.z + kVoxelSize / 2)};
  }
  r.centroid = sum * (1.0 / static_cast<double>(r.voxels.size()));
  r.bbox_size = hi - lo;
}

InstanceRecord& WorldModel::register_instance(const std::string& category,
                                              std::vector<int32_t> voxels) {
  InstanceRecord r;
  r.ordinal = next_ordinal_[category]++;
  r.id = category + "_" + std::to_string(r.ordinal);
  r.category = category;
  sort_unique(voxels);
  r.voxels = std::move(voxels);
  r.last_seen = step_;
  // claim voxels from any previous owner
  for (auto& other : records_) {
    if (other.voxels.empty()) continue;
    std::vector<int32_t> remaining;
    std::set_difference(other.voxels.begin(), other.voxels.end(),
                        r.voxels.begin(), r.voxels.end(),
                        std::back_inserter(remaining));
    if (remaining.size() != other.voxels.size()) {
      if (remaining.empty()) remaining.push_back(other.voxels.front());
      other.voxels = std::move(remaining);
      recompute_geometry(other);
    }
  }
  recompute_geometry(r);
  log::debug("register %s (%zu voxels) at step %d", r.id.c_str(),
             r.voxels.size(), step_);
  records_.push_back(std::move(r));
  return records_.back();
}

void WorldModel::delete_instance(const std::string& id) {
  log::debug("delete %s at step %d", id.c_str(), step_);
  for (auto& r : records_)
    if (r.parent == id) r.parent.clear();
  records_.erase(std::remove_if(records_.begin(), records_.end(),
                                [&](const InstanceRecord& r) { return r.id == id; }),
                 records_.end());
}

bool WorldModel::instance_visible(const InstanceRecord& r,
                                  const std::vector<int32_t>& visibility) const {
  if (r.held) return false;
  // belief-side occlusion: contents of a believed-closed container cannot be
  // visible no matter what the stale voxel mask intersects
  if (!r.parent.empty() && r.parent_is_container) {
    const InstanceRecord* p = find(r.parent);
    if (p) {
      auto it = p->states.find("isOpen");
      if (it != p->states.end() && !it->second.value) return false;
    }
  }
  for (int32_t v : r.voxels)
    if (std::binary_search(visibility.begin(), visibility.end(), v)) return true;
  return false;
}

std::map<int32_t, std::string> WorldModel::match_instances(
    const std::vector<FrameDetection>& detections,
    const std::vector<int32_t>& visibility,
    const std::vector<int32_t>& seen_free) {
  std::map<int32_t, std::string> frame_map;

  // group detections per category (frame-key order keeps this deterministic)
  std::map<std::string, std::vector<const FrameDetection*>> by_cat;
  for (const auto& d : detections)
    if (!d.category.empty()) by_cat[d.category].push_back(&d);

  // visible table instances per category
  std::map<std::string, std::vector<std::string>> vis_by_cat;
  for (const auto& r : records_)
    if (instance_visible(r, visibility)) vis_by_cat[r.category].push_back(r.id);

  std::set<std::string> cats;
  for (const auto& [c, v] : by_cat) cats.insert(c);
  for (const auto& [c, v] : vis_by_cat) cats.insert(c);

  for (const auto& cat : cats) {
    auto dets = by_cat.count(cat) ? by_cat[cat] : std::vector<const FrameDetection*>{};
    auto inst_ids = vis_by_cat.count(cat) ? vis_by_cat[cat] : std::vector<std::string>{};
    const size_t n2d = dets.size(), n3d = inst_ids.size();
    if (n2d == 0 && n3d == 0) continue;

    // pairwise centroid distances
    auto dist = [&](size_t di, size_t ii) {
      return centroid_dist(dets[di]->centroid, find(inst_ids[ii])->centroid);
    };

    // assignment[i] = detection index matched to instance i (or -1)
    std::vector<int> assign(n3d, -1);
    std::vector<char> det_used(n2d, 0);
    const size_t m = std::min(n2d, n3d);

    if (m > 0) {
      if (std::max(n2d, n3d) <= 6) {
        // exact: enumerate injective maps of the smaller side
        double best = 1e18;
        std::vector<int> best_assign;
        std::vector<int> cur(n3d, -1);
        std::vector<char> used(n2d, 0);
        size_t matched_target = m;
        std::function<void(size_t, size_t, double)> rec = [&](size_t i,
                                                              size_t matched,
                                                              double acc) {
          if (acc >= best) return;
          if (i == n3d) {
            if (matched == matched_target && acc < best) {
              best = acc;
              best_assign = cur;
            }
            return;
          }
          // remaining instances must still be matchable when dets are scarce
          size_t remaining_slots = n3d - i - 1;
          if (matched + 1 + remaining_slots >= matched_target) {
            for (size_t d = 0; d < n2d; ++d) {
              if (used[d]) continue;
              used[d] = 1;
              cur[i] = static_cast<int>(d);
              rec(i + 1, matched + 1, acc + dist(d, i));
              cur[i] = -1;
              used[d] = 0;
            }
          }
          if (matched + remaining_slots >= matched_target) rec(i + 1, matched, acc);
        };
        rec(0, 0, 0.0);
        assign = best_assign.empty() ? assign : best_assign;
        for (int a : assign)
          if (a >= 0) det_used[a] = 1;
      } else {
        // greedy globally-nearest pairs
        for (size_t round = 0; round < m; ++round) {
          double best = 1e18;
          int bd = -1, bi = -1;
          for (size_t i = 0; i < n3d; ++i) {
            if (assign[i] >= 0) continue;
            for (size_t d = 0; d < n2d; ++d) {
              if (det_used[d]) continue;
              double c = dist(d, i);
              if (c < best) {
                best = c;
                bd = static_cast<int>(d);
                bi = static_cast<int>(i);
              }
            }
          }
          if (bd < 0) break;
          assign[bi] = bd;
          det_used[bd] = 1;
        }
      }
    }

    // merge matched detections (logical-or of voxel masks)
    for (size_t i = 0; i < n3d; ++i) {
      if (assign[i] < 0) continue;
      const FrameDetection* d = dets[assign[i]];
      InstanceRecord* r = find_mutable(inst_ids[i]);
      std::vector<int32_t> merged;
      std::set_union(r->voxels.begin(), r->voxels.end(), d->voxels.begin(),
                     d->voxels.end(), std::back_inserter(merged));
      // claim from other owners
      for (auto& other : records_) {
        if (other.id == r->id || other.voxels.empty()) continue;
        std::vector<int32_t> remaining;
        std::set_difference(other.voxels.begin(), other.voxels.end(),
                            d->voxels.begin(), d->voxels.end(),
                            std::back_inserter(remaining));
        if (remaining.size() != other.voxels.size()) {
          if (remaining.empty()) remaining.push_back(other.voxels.front());
          other.voxels = std::move(remaining);
          recompute_geometry(other);
        }
      }
      r = find_mutable(inst_ids[i]);
      r->voxels = std::move(merged);
      recompute_geometry(*r);
      r->visible_now = true;
      r->last_seen = step_;
      frame_map[d->key] = r->id;
    }

    if (n2d > n3d) {
      // register the surplus detections as new instances
      for (size_t d = 0; d < n2d; ++d) {
        if (det_used[d]) continue;
        InstanceRecord& r = register_instance(cat, dets[d]->voxels);
        r.visible_now = true;
        frame_map[dets[d]->key] = r.id;
      }
    } else if (n2d < n3d) {
      // visible instances that found no detection: trim away voxels the
      // frame proved empty (stale or grazing-phantom extent); a record is
      // gone only when surface hits remain with no detection to claim them
      for (size_t i = 0; i < n3d; ++i) {
        if (assign[i] >= 0) continue;
        InstanceRecord* r = find_mutable(inst_ids[i]);
        std::vector<int32_t> remaining;
        std::set_difference(r->voxels.begin(), r->voxels.end(),
                            seen_free.begin(), seen_free.end(),
                            std::back_inserter(remaining));
        bool hit_remains = false;
        for (int32_t v : remaining)
          if (std::binary_search(visibility.begin(), visibility.end(), v)) {
            hit_remains = true;
            break;
          }
        if (remaining.empty() || hit_remains) {
          log::debug("delete-unmatched %s n2d=%zu n3d=%zu", inst_ids[i].c_str(),
                     n2d, n3d);
          delete_instance(inst_ids[i]);
        } else if (remaining.size() != r->voxels.size()) {
          r->voxels = std::move(remaining);
          recompute_geometry(*r);
        }
      }
    }
  }
  return frame_map;
}

void WorldModel::update_relations(const std::vector<FrameDetection>& detections,
                                  const std::map<int32_t, std::string>& frame_map) {
  // containment from geometry, support from the 2D box rule; only relations
  // between instances detected in this frame are re-derived
  for (const auto& d : detections) {
    auto it = frame_map.find(d.key);
    if (it == frame_map.end()) continue;
    InstanceRecord* rec = find_mutable(it->second);
    if (!rec || rec->held) continue;
    const sim::CategoryInfo* info = aff().find(rec->category);
    if (!info || !info->pickupable) continue;

    std::string best_parent;
    bool best_container = false;
    double best_score = 1e18;

    for (const auto& other : detections) {
      if (other.key == d.key) continue;
      auto oit = frame_map.find(other.key);
      if (oit == frame_map.end()) continue;
      const InstanceRecord* orec = find(oit->second);
      if (!orec || orec->id == rec->id) continue;
      const sim::CategoryInfo* oinfo = aff().find(orec->category);
      if (!oinfo || !oinfo->receptacle) continue;

      if (oinfo->container) {
        // centroid within the container's bounds (slightly padded)
        Vec3 half = orec->bbox_size * 0.5 + Vec3{0.05, 0.05, 0.30};
        Vec3 delta = rec->centroid - orec->centroid;
        if (std::abs(delta.x) <= half.x && std::abs(delta.y) <= half.y &&
            std::abs(delta.z) <= half.z) {
          double vol = orec->bbox_size.x * orec->bbox_size.y * orec->bbox_size.z;
          if (vol < best_score) {
            best_score = vol;
            best_parent = orec->id;
            best_container = true;
          }
        }
      } else if (predict_on_relation(d.x1, d.y1, d.x2, d.y2, other.x1, other.y1,
                                     other.x2, other.y2, rec->category,
                                     orec->category, aff())) {
        double area = double(other.x2 - other.x1) * double(other.y2 - other.y1);
        if (!best_container && area < best_score) {
          best_score = area;
          best_parent = orec->id;
          best_container = false;
        }
      }
    }

    if (!best_parent.empty()) {
      rec->parent = best_parent;
      rec->parent_is_container = best_container;
    }
  }
}

void WorldModel::update_states(const std::vector<FrameDetection>& detections,
                               const std::map<int32_t, std::string>& frame_map) {
  for (const auto& d : detections) {
    auto it = frame_map.find(d.key);
    if (it == frame_map.end()) continue;
    InstanceRecord* rec = find_mutable(it->second);
    if (!rec) continue;
    for (const auto& [pred, value] : d.labels) {
      auto& entry = rec->states[pred];
      if (entry.authoritative) continue;  // action effects win over perception
      entry.value = value;
    }
  }
}

void WorldModel::update(const Observation& obs) {
  ++step_;
  Projection proj = project_observation(obs, camera_, map_);

  for (int32_t v : proj.seen_free) map_.set_state(v, VoxelState::Free, step_);
  for (const auto& d : proj.detections)
    for (int32_t v : d.voxels) map_.set_state(v, VoxelState::Occupied, step_);
  // surface hits without a detection (walls, fixtures out of label range)
  {
    std::vector<int32_t> hit;
    std::set_difference(proj.visibility.begin(), proj.visibility.end(),
                        proj.seen_free.begin(), proj.seen_free.end(),
                        std::back_inserter(hit));
    for (int32_t v : hit)
      if (map_.state(v) != VoxelState::Occupied)
        map_.set_state(v, VoxelState::Occupied, step_);
  }

  for (auto& r : records_) r.visible_now = false;
  auto frame_map = match_instances(proj.detections, proj.visibility);
  update_relations(proj.detections, frame_map);
  update_states(proj.detections, frame_map);

  frame_pixels_.clear();
  for (const auto& d : proj.detections) {
    auto it = frame_map.find(d.key);
    if (it != frame_map.end()) frame_pixels_[it->second] = d.pixels;
  }
  last_visibility_ = proj.visibility;
}

const std::vector<std::pair<int, int>>* WorldModel::frame_pixels(
    const std::string& id) const {
  auto it = frame_pixels_.find(id);
  return it == frame_pixels_.end() ? nullptr : &it->second;
}

std::vector<const InstanceRecord*> WorldModel::farthest_instances(
    const Pose& pose, int k) const {
  std::vector<const InstanceRecord*> all;
  for (const auto& r : records_) all.push_back(&r);
  Vec3 p = pose.eye();
  std::stable_sort(all.begin(), all.end(),
                   [&](const InstanceRecord* a, const InstanceRecord* b) {
                     double da = centroid_dist(a->centroid, p);
                     double db = centroid_dist(b->centroid, p);
                     if (da != db) return da > db;
                     if (a->ordinal != b->ordinal) return a->ordinal < b->ordinal;
                     return a->category < b->category;
                   });
  if (static_cast<int>(all.size()) > k) all.resize(k);
  return all;
}

void WorldModel::apply_action_effect(ActionType type, const std::string& target_id,
                                     bool success, const std::string& dest_id) {
  if (!success) return;
  if (is_navigation(type) || type == ActionType::Stop) return;

  InstanceRecord* target = find_mutable(target_id);
  auto set_auth = [&](InstanceRecord* r, const char* pred, bool value) {
    if (r) r->states[pred] = {value, true};
  };
  auto believed = [&](const InstanceRecord* r, const char* pred) {
    if (!r) return false;
    auto it = r->states.find(pred);
    return it != r->states.end() && it->second.value;
  };
  auto children_of = [&](const std::string& id) {
    std::vector<InstanceRecord*> out;
    for (auto& r : records_)
      if (r.parent == id) out.push_back(&r);
    return out;
  };
  auto linked_sink = [&](const InstanceRecord* faucet) -> InstanceRecord* {
    InstanceRecord* best = nullptr;
    double bd = 1e18;
    for (auto& r : records_) {
      const sim::CategoryInfo* info = aff().find(r.category);
      if (!info || !info->is_sink) continue;
      double d = centroid_dist(r.centroid, faucet->centroid);
      if (d < bd) {
        bd = d;
        best = &r;
      }
    }
    return best;
  };

  switch (type) {
    case ActionType::PickUp: {
      if (!target) return;
      target->held = true;
      set_auth(target, "isPickedUp", true);
      if (!target->parent.empty()) {
        // removing an occupant frees up the receptacle again
        InstanceRecord* parent = find_mutable(target->parent);
        if (parent) parent->states.erase("receptacleFull");
      }
      target->parent.clear();
      target->parent_is_container = false;
      return;
    }
    case ActionType::Place: {
      if (!target) return;
      InstanceRecord* dest = find_mutable(dest_id);
      target->held = false;
      set_auth(target, "isPickedUp", false);
      if (!dest) return;
      const sim::CategoryInfo* dinfo = aff().find(dest->category);
      target->parent = dest->id;
      target->parent_is_container = dinfo && dinfo->container;
      // belief position snaps to the receptacle until re-observed: inside a
      // container (where rays cannot wrongly "see" it), just above a surface
      Vec3 guess = dest->centroid;
      if (!(dinfo && dinfo->container))
        guess.z += dest->bbox_size.z / 2 + kVoxelSize / 2;
      VoxelIdx v = voxel_of(guess);
      if (map_.in_bounds(v)) {
        target->voxels = {map_.index(v)};
        recompute_geometry(*target);
      }
      const sim::CategoryInfo* tinfo = aff().find(target->category);
      // conditional mirrors of the action model
      if (dinfo && dinfo->is_sink) {
        for (auto& r : records_) {
          const sim::CategoryInfo* i2 = aff().find(r.category);
          if (i2 && i2->is_faucet && believed(&r, "isToggled") &&
              linked_sink(&r) == dest) {
            set_auth(target, "isClean", true);
            if (tinfo && tinfo->fillable) set_auth(target, "isFilledWithLiquid", true);
          }
        }
      }
      if (dinfo && dinfo->cooks_contained && believed(dest, "isToggled") &&
          tinfo && tinfo->is_food)
        set_auth(target, "isCooked", true);
      if (dinfo && dinfo->brews_coffee && believed(dest, "isToggled") && tinfo &&
          tinfo->fillable) {
        set_auth(target, "simbotIsFilledWithCoffee", true);
        set_auth(target, "isFilledWithLiquid", true);
      }
      if (dinfo && dinfo->pickupable && !dest->parent.empty()) {
        const InstanceRecord* stove = find(dest->parent);
        if (stove) {
          const sim::CategoryInfo* sinfo = aff().find(stove->category);
          if (sinfo && sinfo->stove_top && believed(stove, "isToggled") && tinfo &&
              tinfo->is_food)
            set_auth(target, "isCooked", true);
        }
      }
      return;
    }
    case ActionType::ToggleOn: {
      if (!target) return;
      set_auth(target, "isToggled", true);
      const sim::CategoryInfo* info = aff().find(target->category);
      if (!info) return;
      if (info->is_faucet) {
        InstanceRecord* sink = linked_sink(target);
        if (sink) {
          for (auto* c : children_of(sink->id)) {
            set_auth(c, "isClean", true);
            const sim::CategoryInfo* ci = aff().find(c->category);
            if (ci && ci->fillable) set_auth(c, "isFilledWithLiquid", true);
          }
        }
      }
      if (info->cooks_contained ||
          (info->cooks_contained_closed && !believed(target, "isOpen"))) {
        for (auto* c : children_of(target->id)) {
          const sim::CategoryInfo* ci = aff().find(c->category);
          if (ci && ci->is_food) set_auth(c, "isCooked", true);
          for (auto* cc : children_of(c->id)) {
            const sim::CategoryInfo* cci = aff().find(cc->category);
            if (cci && cci->is_food) set_auth(cc, "isCooked", true);
          }
        }
      }
      if (info->stove_top) {
        for (auto* vessel : children_of(target->id))
          for (auto* c : children_of(vessel->id)) {
            const sim::CategoryInfo* ci = aff().find(c->category);
            if (ci && ci->is_food) set_auth(c, "isCooked", true);
          }
      }
      if (info->brews_coffee) {
        for (auto* c : children_of(target->id)) {
          const sim::CategoryInfo* ci = aff().find(c->category);
          if (ci && ci->fillable) {
            set_auth(c, "simbotIsFilledWithCoffee", true);
            set_auth(c, "isFilledWithLiquid", true);
          }
        }
      }
      return;
    }
    case ActionType::ToggleOff:
      set_auth(target, "isToggled", false);
      return;
    case ActionType::Open:
      set_auth(target, "isOpen", true);
      return;
    case ActionType::Close: {
      set_auth(target, "isOpen", false);
      if (!target) return;
      const sim::CategoryInfo* info = aff().find(target->category);
      if (info && info->cooks_contained_closed && believed(target, "isToggled")) {
        for (auto* c : children_of(target->id)) {
          const sim::CategoryInfo* ci = aff().find(c->category);
          if (ci && ci->is_food) set_auth(c, "isCooked", true);
        }
      }
      return;
    }
    case ActionType::Slice: {
      if (!target) return;
      const sim::CategoryInfo* info = aff().find(target->category);
      if (!info || info->slice_yield.empty()) return;
      std::string parent = target->parent;
      bool parent_container = target->parent_is_container;
      std::vector<int32_t> voxels = target->voxels;
      std::string yield = info->slice_yield;
      int want = std::max(1, info->slice_count);
      delete_instance(target_id);

      int pieces = std::min<int>(want, static_cast<int>(voxels.size()));
      if (pieces < 1) pieces = 1;
      size_t per = std::max<size_t>(1, voxels.size() / pieces);
      for (int i = 0; i < pieces; ++i) {
        size_t begin = i * per;
        size_t end = (i == pieces - 1) ? voxels.size() : (i + 1) * per;
        if (begin >= voxels.size()) break;
        std::vector<int32_t> chunk(voxels.begin() + begin, voxels.begin() + end);
        InstanceRecord& child = register_instance(yield, std::move(chunk));
        child.states["isSliced"] = {true, true};
        child.parent = parent;
        child.parent_is_container = parent_container;
      }
      return;
    }
    case ActionType::Pour: {
      set_auth(target, "isFilledWithLiquid", false);
      set_auth(target, "simbotIsFilledWithCoffee", false);
      return;
    }
    default:
      throw std::invalid_argument("no modeled effect for action " +
                                  to_string(type));
  }
}

planner::BeliefSnapshot WorldModel::snapshot(const Pose& agent) const {
  planner::BeliefSnapshot snap;
  snap.agent = agent;
  for (const auto& r : records_) {
    planner::BeliefInstance b;
    b.id = r.id;
    b.category = r.category;
    b.ordinal = r.ordinal;
    b.centroid = r.centroid;
    for (const auto& [pred, entry] : r.states) b.states[pred] = entry.value;
    b.parent = r.parent;
    b.parent_is_container = r.parent_is_container;
    b.visible_now = r.visible_now;
    b.held = r.held;
    snap.instances.push_back(std::move(b));
  }
  return snap;
}

}  // namespace delib::world
