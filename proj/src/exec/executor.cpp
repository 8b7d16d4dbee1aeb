#include "delib/exec/executor.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "delib/nav/navigation.hpp"
#include "delib/pddl/parser.hpp"
#include "delib/util/log.hpp"
#include "delib/util/rng.hpp"

namespace delib::exec {

using monitor::Subgoal;
using monitor::SubgoalPredicate;
using nlohmann::json;

std::string to_string(ExceptionKind k) {
  switch (k) {
    case ExceptionKind::NoPlanFound: return "NoPlanFound";
    case ExceptionKind::TargetUnreachable: return "TargetUnreachable";
    case ExceptionKind::TargetNotVisible: return "TargetNotVisible";
    case ExceptionKind::PathBlocked: return "PathBlocked";
    case ExceptionKind::ObjectNotFoundAfterSearch: return "ObjectNotFoundAfterSearch";
    case ExceptionKind::ReceptacleFull: return "ReceptacleFull";
    case ExceptionKind::HandOccupied: return "HandOccupied";
    case ExceptionKind::NoEffectObserved: return "NoEffectObserved";
    case ExceptionKind::SimulatorRejection: return "SimulatorRejection";
  }
  return "?";
}

ExceptionPhase phase_of(ExceptionKind k) {
  switch (k) {
    case ExceptionKind::NoPlanFound:
    case ExceptionKind::TargetUnreachable:
    case ExceptionKind::TargetNotVisible:
    case ExceptionKind::PathBlocked:
      return ExceptionPhase::PreExecution;
    default:
      return ExceptionPhase::PostExecution;
  }
}

ExceptionKind classify_exception(const std::string& reason, bool effect_missing) {
  if (reason.empty() && effect_missing) return ExceptionKind::NoEffectObserved;
  if (reason == "receptacle-full") return ExceptionKind::ReceptacleFull;
  if (reason == "hand-occupied") return ExceptionKind::HandOccupied;
  if (reason == "blocked") return ExceptionKind::PathBlocked;
  if (reason == "not-visible" || reason == "nothing-at-pixel")
    return ExceptionKind::TargetNotVisible;
  return ExceptionKind::SimulatorRejection;
}

std::string to_string(FailureCategory c) {
  switch (c) {
    case FailureCategory::SubgoalPrediction: return "SubgoalPrediction";
    case FailureCategory::PlanNotFound: return "PlanNotFound";
    case FailureCategory::ObjectNotFound: return "ObjectNotFound";
    case FailureCategory::InteractionFailure: return "InteractionFailure";
    case FailureCategory::GroundingFailure: return "GroundingFailure";
    case FailureCategory::Other: return "Other";
  }
  return "?";
}

std::string to_string(RecoveryDecision::Kind k) {
  switch (k) {
    case RecoveryDecision::Kind::RetryAction: return "RetryAction";
    case RecoveryDecision::Kind::ReGround: return "ReGround";
    case RecoveryDecision::Kind::ReplanPath: return "ReplanPath";
    case RecoveryDecision::Kind::ReplanSubgoal: return "ReplanSubgoal";
    case RecoveryDecision::Kind::ReplanUnpruned: return "ReplanUnpruned";
    case RecoveryDecision::Kind::PushSubgoal: return "PushSubgoal";
    case RecoveryDecision::Kind::Abandon: return "Abandon";
  }
  return "?";
}

RecoveryDecision recover(ExceptionKind kind, const RecoveryContext& ctx) {
  using K = RecoveryDecision::Kind;
  RecoveryDecision d;

  if (!ctx.replanning_enabled) {
    // the single retry is not replanning; everything else gives up
    if (kind == ExceptionKind::NoEffectObserved && !ctx.already_retried)
      d.kind = K::RetryAction;
    else
      d.kind = K::Abandon;
    return d;
  }
  if (ctx.replans_used >= ctx.max_replans) {
    d.kind = K::Abandon;
    return d;
  }

  switch (kind) {
    case ExceptionKind::ReceptacleFull:
      if (ctx.clear_subgoal) {
        d.kind = K::PushSubgoal;
        d.push = *ctx.clear_subgoal;
        d.push_pinned = ctx.clear_pinned;
      } else {
        d.kind = K::ReplanSubgoal;
      }
      return d;
    case ExceptionKind::TargetNotVisible:
      d.kind = ctx.regrounded ? K::ReplanSubgoal : K::ReGround;
      return d;
    case ExceptionKind::PathBlocked:
      d.kind = ctx.path_rebuilt ? K::ReplanSubgoal : K::ReplanPath;
      return d;
    case ExceptionKind::HandOccupied:
      if (ctx.putdown_subgoal) {
        d.kind = K::PushSubgoal;
        d.push = *ctx.putdown_subgoal;
      } else {
        d.kind = K::ReplanSubgoal;
      }
      return d;
    case ExceptionKind::NoEffectObserved:
      d.kind = ctx.already_retried ? K::ReplanSubgoal : K::RetryAction;
      return d;
    case ExceptionKind::ObjectNotFoundAfterSearch:
      d.kind = K::Abandon;
      return d;
    case ExceptionKind::NoPlanFound:
      d.kind = ctx.tried_unpruned ? K::Abandon : K::ReplanUnpruned;
      return d;
    case ExceptionKind::TargetUnreachable:
    case ExceptionKind::SimulatorRejection:
      d.kind = K::ReplanSubgoal;
      return d;
  }
  return d;
}

namespace {

const sim::AffordanceTable& aff() { return sim::AffordanceTable::builtin(); }

struct WorkItem {
  Subgoal sg;
  int count = 1;           // required satisfying instances
  std::string pinned;      // specific patient instance (recovery goals)
  bool recovery = false;
};

enum class ItemOutcome { Completed, Abandoned, EpisodeOver };

class EpisodeRunner {
 public:
  EpisodeRunner(const sim::EpisodeSpec& spec,
                const std::vector<Subgoal>& subgoals, const EpisodeConfig& cfg)
      : spec_(spec),
        cfg_(cfg),
        env_(spec.scene, spec.task, cfg.noise, cfg.seed ^ 0x9e97, cfg.camera),
        world_(spec.scene.X, spec.scene.Y, spec.scene.Z, cfg.camera),
        search_rng_(Rng(cfg.seed).fork(0x5ea7c4)),
        domain_(pddl::parse_domain(sim::household_domain_text())),
        subgoals_(subgoals) {}

  EpisodeResult run();

 private:
  // --- environment interaction -------------------------------------------
  ActionResult env_step(const PrimitiveAction& a);
  bool budget_exhausted() const {
    return env_.steps() >= cfg_.budget.max_steps ||
           env_.failed_actions() >= cfg_.budget.max_failed;
  }
  bool subgoal_budget_exhausted() const {
    return env_.steps() - subgoal_step_base_ >= cfg_.budget.subgoal_steps;
  }
  Pose pose() const { return env_.observation().pose; }
  planner::BeliefSnapshot belief() const { return world_.snapshot(pose()); }

  void preseed_full_observability();
  void initial_sweep();

  // --- subgoal processing -------------------------------------------------
  ItemOutcome process_item(WorkItem item, int depth);
  ItemOutcome execute_plan(const planner::MidLevelPlan& plan, WorkItem& item,
                           RecoveryContext& rctx, bool& need_replan, int depth);
  bool item_completed(const WorkItem& item) const;

  // plan-step helpers; each returns an exception when one occurred
  std::optional<ExceptionKind> exec_goto(const std::string& target,
                                         RecoveryContext& rctx);
  std::optional<ExceptionKind> exec_search(const std::string& category);
  std::optional<ExceptionKind> exec_manipulation(const planner::PlanStep& step,
                                                 RecoveryContext& rctx);

  std::string manip_target(const planner::PlanStep& step) const;
  ActionType manip_action(const std::string& name) const;
  bool observed_effect(ActionType type, const std::string& target_id);
  void note_exception(ExceptionKind k);
  void fill_recovery_options(ExceptionKind k, const planner::PlanStep& step,
                             const WorkItem& item, RecoveryContext& rctx);

  void trace_step(const PrimitiveAction& a, const ActionResult& res);
  std::string belief_digest() const;
  void dump_plan(const planner::SubgoalPlan& sp);
  void dump_frame();

  // --- members -------------------------------------------------------------
  const sim::EpisodeSpec& spec_;
  EpisodeConfig cfg_;
  sim::Env env_;
  world::WorldModel world_;
  Rng search_rng_;
  pddl::DomainModel domain_;
  std::vector<Subgoal> subgoals_;

  EpisodeResult result_;
  int subgoal_step_base_ = 0;
  std::string active_subgoal_;
  int plan_remaining_ = 0;
  std::string pending_exception_, pending_recovery_;
  std::string last_search_target_;
  std::set<Cell> extra_blocked_;  // cells the env refused to enter
  std::set<std::string> opened_containers_;
  std::map<std::string, std::string> oracle_to_belief_;
  std::vector<FailureCategory> abandon_reasons_;
  int plan_dump_counter_ = 0;
  bool stop_issued_ = false;
};

ActionResult EpisodeRunner::env_step(const PrimitiveAction& a) {
  ActionResult res = env_.step(a);
  trace_step(a, res);
  if (!cfg_.dump_frames_dir.empty()) dump_frame();
  return res;
}

void EpisodeRunner::trace_step(const PrimitiveAction& a, const ActionResult& res) {
  json j;
  j["step"] = env_.steps();
  Pose p = pose();
  j["pose"] = {{"cell", {p.cell.x, p.cell.y}}, {"heading", p.heading},
               {"pitch", p.pitch}};
  j["action"] = a.str();
  j["result"] = {{"success", res.success}, {"reason", res.reason}};
  if (!pending_exception_.empty()) {
    j["exception"] = pending_exception_;
    pending_exception_.clear();
  }
  if (!pending_recovery_.empty()) {
    j["recovery"] = pending_recovery_;
    pending_recovery_.clear();
  }
  j["active_subgoal"] = active_subgoal_;
  j["plan_remaining"] = plan_remaining_;
  j["belief_digest"] = belief_digest();
  result_.trace.push_back(j.dump());
}

std::string EpisodeRunner::belief_digest() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& r : world_.records()) {
    h = fnv1a(r.id.data(), r.id.size(), h);
    h = fnv1a(r.parent.data(), r.parent.size(), h);
    char held = r.held ? '1' : '0';
    h = fnv1a(&held, 1, h);
    for (const auto& [k, v] : r.states) {
      h = fnv1a(k.data(), k.size(), h);
      char c = v.value ? 'T' : 'F';
      h = fnv1a(&c, 1, h);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void EpisodeRunner::dump_frame() {
  namespace fs = std::filesystem;
  fs::create_directories(cfg_.dump_frames_dir);
  const Observation& o = env_.observation();
  char name[64];
  std::snprintf(name, sizeof name, "frame_%05d", env_.steps());
  {
    std::ofstream pgm(cfg_.dump_frames_dir + "/" + name + ".pgm");
    pgm << "P2\n" << o.width << " " << o.height << "\n255\n";
    for (int v = 0; v < o.height; ++v) {
      for (int u = 0; u < o.width; ++u) {
        float d = o.depth_at(u, v);
        int g = d <= 0 ? 0 : std::min(255, static_cast<int>(d / 10.0 * 255));
        pgm << g << (u + 1 == o.width ? "" : " ");
      }
      pgm << "\n";
    }
  }
  {
    std::ofstream ppm(cfg_.dump_frames_dir + "/" + name + ".ppm");
    ppm << "P3\n" << o.width << " " << o.height << "\n255\n";
    for (int v = 0; v < o.height; ++v) {
      for (int u = 0; u < o.width; ++u) {
        int32_t k = o.seg_at(u, v);
        int r = 30, g = 30, b = 30;
        if (k >= 0) {
          uint64_t h = fnv1a(&k, sizeof k);
          r = 40 + static_cast<int>(h % 200);
          g = 40 + static_cast<int>((h >> 8) % 200);
          b = 40 + static_cast<int>((h >> 16) % 200);
        }
        ppm << r << " " << g << " " << b << (u + 1 == o.width ? "" : " ");
      }
      ppm << "\n";
    }
  }
}

void EpisodeRunner::dump_plan(const planner::SubgoalPlan& sp) {
  if (cfg_.dump_plans_dir.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(cfg_.dump_plans_dir);
  std::string base =
      cfg_.dump_plans_dir + "/plan_" + std::to_string(plan_dump_counter_++);
  std::ofstream prob(base + ".pddl");
  prob << pddl::serialize(sp.problem, domain_);
  std::ofstream plan(base + ".plan");
  for (const auto& s : sp.outcome.plan.steps) plan << s.str() << "\n";
  plan << "; total-cost " << sp.outcome.plan.total_cost << "\n";
}

void EpisodeRunner::preseed_full_observability() {
  preseed_ground_truth(world_, env_);
}

void EpisodeRunner::initial_sweep() {
  world_.update(env_.observation());
  for (int i = 0; i < 4 && !budget_exhausted(); ++i) {
    env_step(PrimitiveAction::nav(ActionType::TurnLeft));
    world_.update(env_.observation());
  }
}

bool EpisodeRunner::item_completed(const WorkItem& item) const {
  planner::BeliefSnapshot b = world_.snapshot(env_.observation().pose);
  if (!item.pinned.empty()) {
    const planner::BeliefInstance* inst = b.find(item.pinned);
    if (!inst) return true;  // occupant gone entirely
    if (item.sg.predicate == SubgoalPredicate::isPlacedTo && item.sg.destination) {
      if (inst->parent.empty()) return false;
      const planner::BeliefInstance* p = b.find(inst->parent);
      return p && p->category == *item.sg.destination;
    }
  }
  return monitor::check_completed(item.sg, b, item.count);
}

std::string EpisodeRunner::manip_target(const planner::PlanStep& step) const {
  // the pixel grounds the acted-on object: the receptacle for Place/Pour,
  // the sliced thing for Slice, the object itself otherwise
  if (step.action == "Place" || step.action == "Pour") return step.args[1];
  if (step.action == "Slice") return step.args[1];
  return step.args[0];
}

ActionType EpisodeRunner::manip_action(const std::string& name) const {
  auto t = action_type_from(name);
  if (t) return *t;
  throw std::runtime_error("unknown plan action: " + name);
}

bool EpisodeRunner::observed_effect(ActionType type, const std::string& target_id) {
  // compare the expected postcondition to the raw post-step labels
  const Observation& obs = env_.observation();
  const auto* pixels = world_.frame_pixels(target_id);
  auto label_value = [&](const char* pred) -> std::optional<bool> {
    if (!pixels || pixels->empty()) return std::nullopt;
    int32_t key = obs.seg_at((*pixels)[0].first, (*pixels)[0].second);
    auto it = obs.labels.find(key);
    if (it == obs.labels.end()) return std::nullopt;
    auto st = it->second.states.find(pred);
    if (st == it->second.states.end()) return std::nullopt;
    return st->second;
  };
  switch (type) {
    case ActionType::ToggleOn: return label_value("isToggled").value_or(true);
    case ActionType::ToggleOff: return !label_value("isToggled").value_or(false);
    case ActionType::Open: return label_value("isOpen").value_or(true);
    case ActionType::Close: return !label_value("isOpen").value_or(false);
    default: return true;  // other effects are trusted unless contradicted
  }
}

void EpisodeRunner::note_exception(ExceptionKind k) {
  pending_exception_ = to_string(k);
  ++result_.exception_counts[to_string(k)];
}

void EpisodeRunner::fill_recovery_options(ExceptionKind k,
                                          const planner::PlanStep& step,
                                          const WorkItem& item,
                                          RecoveryContext& rctx) {
  planner::BeliefSnapshot b = belief();
  if (k == ExceptionKind::ReceptacleFull) {
    // clear an occupant to a counter; prefer one that is not itself the
    // subgoal's patient (do not undo our own progress), then lowest ordinal
    const std::string& receptacle = manip_target(step);
    const planner::BeliefInstance* occupant = nullptr;
    auto better = [&](const planner::BeliefInstance& cand,
                      const planner::BeliefInstance* best) {
      if (!best) return true;
      bool cand_patient = cand.category == item.sg.patient;
      bool best_patient = best->category == item.sg.patient;
      if (cand_patient != best_patient) return !cand_patient;
      if (cand.ordinal != best->ordinal) return cand.ordinal < best->ordinal;
      return cand.id < best->id;
    };
    for (const auto& i : b.instances) {
      if (i.parent != receptacle) continue;
      if (better(i, occupant)) occupant = &i;
    }
    if (occupant) {
      Subgoal clear;
      clear.patient = occupant->category;
      clear.predicate = SubgoalPredicate::isPlacedTo;
      clear.destination = "CounterTop";
      rctx.clear_subgoal = clear;
      rctx.clear_pinned = occupant->id;
    }
  }
  if (k == ExceptionKind::HandOccupied) {
    const planner::BeliefInstance* held = b.held();
    if (held) {
      Subgoal put;
      put.patient = held->category;
      put.predicate = SubgoalPredicate::isPlacedTo;
      put.destination = "CounterTop";
      rctx.putdown_subgoal = put;
    }
  }
}

std::optional<ExceptionKind> EpisodeRunner::exec_goto(const std::string& target,
                                                      RecoveryContext& rctx) {
  const world::InstanceRecord* rec = world_.find(target);
  if (!rec) return ExceptionKind::TargetUnreachable;

  bool rebuilt = false;
  while (true) {
    if (budget_exhausted() || subgoal_budget_exhausted()) return std::nullopt;
    rec = world_.find(target);
    if (!rec) return ExceptionKind::TargetUnreachable;

    nav::OccupancyGrid grid = nav::derive_occupancy(world_, pose(), target);
    for (const Cell& c : extra_blocked_) grid.set(c, nav::CellState::Blocked);
    auto region = nav::goal_region(grid, rec->centroid);
    std::vector<Cell> goal_cells;
    for (const auto& g : region) goal_cells.push_back(g.cell);

    std::vector<Cell> path;
    try {
      path = nav::plan_path(grid, pose().cell, goal_cells, false);
    } catch (const nav::Unreachable&) {
      note_exception(ExceptionKind::PathBlocked);
      rctx.path_rebuilt = rebuilt;
      RecoveryDecision d = recover(ExceptionKind::PathBlocked, rctx);
      pending_recovery_ = to_string(d.kind);
      ++result_.recoveries;
      if (d.kind == RecoveryDecision::Kind::ReplanPath && !rebuilt) {
        rebuilt = true;
        // optimistic second try: unknown space becomes traversable
        try {
          path = nav::plan_path(grid, pose().cell, goal_cells, true);
        } catch (const nav::Unreachable&) {
          return ExceptionKind::TargetUnreachable;
        }
      } else {
        return ExceptionKind::TargetUnreachable;
      }
    }

    // aim of the chosen goal cell
    const nav::NavGoal* chosen = nullptr;
    for (const auto& g : region)
      if (g.cell == path.back()) { chosen = &g; break; }
    if (!chosen) return ExceptionKind::TargetUnreachable;

    auto prims = nav::path_to_primitives(path, pose(), chosen->heading,
                                         chosen->pitch);
    bool blocked = false;
    for (ActionType t : prims) {
      if (budget_exhausted() || subgoal_budget_exhausted()) return std::nullopt;
      ActionResult res = env_step(PrimitiveAction::nav(t));
      world_.update(env_.observation());
      if (!res.success) {
        if (t == ActionType::Forward) {
          auto d = heading_step(pose().heading);
          extra_blocked_.insert({pose().cell.x + d[0], pose().cell.y + d[1]});
        }
        note_exception(ExceptionKind::PathBlocked);
        rctx.path_rebuilt = rebuilt;
        RecoveryDecision dec = recover(ExceptionKind::PathBlocked, rctx);
        pending_recovery_ = to_string(dec.kind);
        ++result_.recoveries;
        if (dec.kind != RecoveryDecision::Kind::ReplanPath || rebuilt)
          return ExceptionKind::PathBlocked;
        rebuilt = true;
        blocked = true;
        break;
      }
    }
    if (!blocked) return std::nullopt;  // arrived
  }
}

std::optional<ExceptionKind> EpisodeRunner::exec_search(const std::string& category) {
  ++result_.searches;
  auto found = [&]() {
    for (const auto& r : world_.records())
      if (r.category == category) return true;
    return false;
  };

  while (!budget_exhausted() && !subgoal_budget_exhausted()) {
    if (found()) return std::nullopt;

    // closed containers first: hidden objects can only be inside them
    const world::InstanceRecord* closed_container = nullptr;
    for (const auto& r : world_.records()) {
      const sim::CategoryInfo* info = aff().find(r.category);
      if (!info || !info->openable) continue;
      auto it = r.states.find("isOpen");
      bool believed_open = it != r.states.end() && it->second.value;
      bool opened_before = opened_containers_.count(r.id) > 0;
      if (!believed_open && !opened_before) {
        closed_container = &r;
        break;
      }
    }

    if (closed_container) {
      std::string id = closed_container->id;
      RecoveryContext dummy_ctx;
      auto exc = exec_goto(id, dummy_ctx);
      if (budget_exhausted() || subgoal_budget_exhausted()) break;
      if (!exc) {
        try {
          auto [px, py] = nav::interaction_point(world_, id);
          ActionResult res =
              env_step(PrimitiveAction::manip(ActionType::Open, px, py));
          if (res.success) world_.apply_action_effect(ActionType::Open, id, true);
          world_.update(env_.observation());
        } catch (const nav::NotVisible&) {
          // fall through to wandering; the container stays on the list
        }
      }
      opened_containers_.insert(id);
      continue;
    }

    // wander: sample a far instance or a frontier cell, then sweep
    nav::SearchTarget target;
    try {
      target = nav::select_search_target(world_, pose(), search_rng_,
                                         last_search_target_);
    } catch (const nav::NoFrontier&) {
      break;
    }
    if (target.is_instance) {
      last_search_target_ = target.instance_id;
      RecoveryContext dummy_ctx;
      exec_goto(target.instance_id, dummy_ctx);
    } else {
      nav::OccupancyGrid grid = nav::derive_occupancy(world_, pose());
      try {
        auto path = nav::plan_path(grid, pose().cell, {target.cell}, true);
        auto prims = nav::path_to_primitives(path, pose(), pose().heading, 0);
        for (ActionType t : prims) {
          if (budget_exhausted() || subgoal_budget_exhausted()) break;
          env_step(PrimitiveAction::nav(t));
          world_.update(env_.observation());
          if (found()) return std::nullopt;
        }
      } catch (const nav::Unreachable&) {
        // sampled an unreachable frontier; resample next loop
      }
    }
    for (int i = 0; i < 4; ++i) {
      if (budget_exhausted() || subgoal_budget_exhausted()) break;
      env_step(PrimitiveAction::nav(ActionType::TurnLeft));
      world_.update(env_.observation());
      if (found()) return std::nullopt;
    }
  }
  if (found()) return std::nullopt;
  return ExceptionKind::ObjectNotFoundAfterSearch;
}

std::optional<ExceptionKind> EpisodeRunner::exec_manipulation(
    const planner::PlanStep& step, RecoveryContext& rctx) {
  const std::string target = manip_target(step);
  ActionType type = manip_action(step.action);

  bool retried = false;
  bool regrounded = false;
  while (true) {
    if (budget_exhausted() || subgoal_budget_exhausted()) return std::nullopt;
    if (!world_.find(target)) return ExceptionKind::TargetUnreachable;

    std::pair<int, int> pixel;
    try {
      pixel = nav::interaction_point(world_, target);
    } catch (const nav::NotVisible&) {
      note_exception(ExceptionKind::TargetNotVisible);
      rctx.regrounded = regrounded;
      RecoveryDecision d = recover(ExceptionKind::TargetNotVisible, rctx);
      pending_recovery_ = to_string(d.kind);
      ++result_.recoveries;
      if (d.kind != RecoveryDecision::Kind::ReGround)
        return ExceptionKind::TargetNotVisible;
      regrounded = true;
      // re-aim: approach the target again, which also resets heading/pitch
      auto exc = exec_goto(target, rctx);
      if (exc) return exc;
      continue;
    }

    // the PickUp no-effect probe needs the pre-step key at the pixel
    int32_t pre_key = env_.observation().seg_at(pixel.first, pixel.second);

    ActionResult res = env_step(PrimitiveAction::manip(type, pixel.first,
                                                       pixel.second));
    if (res.success) {
      std::string dest = step.action == "Place" ? step.args[1] : "";
      std::string acted = step.args[0];
      world_.apply_action_effect(type, acted, true, dest);
      world_.update(env_.observation());

      bool effect = observed_effect(type, target);
      if (effect && type == ActionType::PickUp) {
        // object still at the grounding pixel means the grab did nothing
        int32_t post_key =
            env_.observation().seg_at(pixel.first, pixel.second);
        if (post_key >= 0 && post_key == pre_key) effect = false;
      }
      if (effect) return std::nullopt;

      note_exception(ExceptionKind::NoEffectObserved);
      rctx.already_retried = retried;
      RecoveryDecision d = recover(ExceptionKind::NoEffectObserved, rctx);
      pending_recovery_ = to_string(d.kind);
      ++result_.recoveries;
      // undo the optimistic authoritative write; perception wins again
      if (type == ActionType::PickUp) {
        auto* rec = world_.find_mutable(acted);
        if (rec) {
          rec->held = false;
          rec->states["isPickedUp"] = {false, false};
        }
      } else if (type == ActionType::ToggleOn || type == ActionType::ToggleOff) {
        auto* rec = world_.find_mutable(acted);
        if (rec) rec->states["isToggled"] = {type == ActionType::ToggleOff, false};
      } else if (type == ActionType::Open || type == ActionType::Close) {
        auto* rec = world_.find_mutable(acted);
        if (rec) rec->states["isOpen"] = {type == ActionType::Close, false};
      }
      if (d.kind == RecoveryDecision::Kind::RetryAction && !retried) {
        retried = true;
        continue;
      }
      return ExceptionKind::NoEffectObserved;
    }

    world_.update(env_.observation());
    if (res.reason == "receptacle-full") {
      auto* rec = world_.find_mutable(target);
      if (rec) rec->states["receptacleFull"] = {true, false};
    }
    ExceptionKind kind = classify_exception(res.reason, false);
    note_exception(kind);
    return kind;
  }
}

ItemOutcome EpisodeRunner::execute_plan(const planner::MidLevelPlan& plan,
                                        WorkItem& item, RecoveryContext& rctx,
                                        bool& need_replan, int depth) {
  need_replan = false;
  plan_remaining_ = static_cast<int>(plan.steps.size());
  for (const auto& step : plan.steps) {
    if (budget_exhausted()) return ItemOutcome::EpisodeOver;
    if (subgoal_budget_exhausted()) {
      abandon_reasons_.push_back(FailureCategory::Other);
      return ItemOutcome::Abandoned;
    }

    std::optional<ExceptionKind> exc;
    if (step.action == "GoTo") {
      exc = exec_goto(step.args[0], rctx);
    } else if (step.action == "Search") {
      const world::InstanceRecord* rec = world_.find(step.args[0]);
      std::string category;
      if (rec) category = rec->category;
      else {
        // dummy ids are <Category>_u0
        std::string id = step.args[0];
        size_t us = id.rfind("_u0");
        category = us == std::string::npos ? id : id.substr(0, us);
      }
      exc = exec_search(category);
      if (!exc) {
        need_replan = true;  // a real instance exists now; rebind the plan
        return ItemOutcome::Completed;  // caller re-checks and replans
      }
    } else {
      exc = exec_manipulation(step, rctx);
    }
    --plan_remaining_;

    if (budget_exhausted()) return ItemOutcome::EpisodeOver;

    if (exc) {
      fill_recovery_options(*exc, step, item, rctx);
      RecoveryDecision d = recover(*exc, rctx);
      pending_recovery_ = to_string(d.kind);
      switch (d.kind) {
        case RecoveryDecision::Kind::PushSubgoal: {
          ++result_.recoveries;
          ++result_.replans;
          ++rctx.replans_used;
          if (depth >= 3) {
            abandon_reasons_.push_back(FailureCategory::InteractionFailure);
            return ItemOutcome::Abandoned;
          }
          WorkItem recovery;
          recovery.sg = d.push;
          recovery.pinned = d.push_pinned;
          recovery.recovery = true;
          ItemOutcome sub = process_item(recovery, depth + 1);
          if (sub == ItemOutcome::EpisodeOver) return sub;
          need_replan = true;
          return ItemOutcome::Completed;  // resume the original via replan
        }
        case RecoveryDecision::Kind::ReplanSubgoal:
        case RecoveryDecision::Kind::ReplanPath:
        case RecoveryDecision::Kind::ReGround: {
          ++result_.replans;
          ++rctx.replans_used;
          need_replan = true;
          return ItemOutcome::Completed;
        }
        case RecoveryDecision::Kind::Abandon: {
          FailureCategory cat = FailureCategory::Other;
          switch (*exc) {
            case ExceptionKind::ObjectNotFoundAfterSearch:
              cat = FailureCategory::ObjectNotFound;
              break;
            case ExceptionKind::NoPlanFound:
              cat = FailureCategory::PlanNotFound;
              break;
            case ExceptionKind::TargetNotVisible:
              cat = FailureCategory::GroundingFailure;
              break;
            case ExceptionKind::NoEffectObserved:
            case ExceptionKind::ReceptacleFull:
            case ExceptionKind::HandOccupied:
            case ExceptionKind::SimulatorRejection:
              cat = FailureCategory::InteractionFailure;
              break;
            default:
              cat = FailureCategory::Other;
          }
          abandon_reasons_.push_back(cat);
          return ItemOutcome::Abandoned;
        }
        default:
          need_replan = true;
          return ItemOutcome::Completed;
      }
    }
  }
  plan_remaining_ = 0;
  return ItemOutcome::Completed;
}

ItemOutcome EpisodeRunner::process_item(WorkItem item, int depth) {
  active_subgoal_ = item.sg.str();
  if (depth == 0) subgoal_step_base_ = env_.steps();
  RecoveryContext rctx;
  rctx.replanning_enabled = cfg_.replanning;
  rctx.max_replans = cfg_.budget.max_replans;

  int already_satisfied_spins = 0;

  while (true) {
    if (budget_exhausted()) return ItemOutcome::EpisodeOver;
    if (subgoal_budget_exhausted()) {
      abandon_reasons_.push_back(FailureCategory::Other);
      return ItemOutcome::Abandoned;
    }
    if (item_completed(item)) return ItemOutcome::Completed;
    if (rctx.replans_used > cfg_.budget.max_replans) {
      abandon_reasons_.push_back(FailureCategory::PlanNotFound);
      return ItemOutcome::Abandoned;
    }

    planner::PlanRequest req;
    req.subgoal = item.sg;
    req.belief = belief();
    req.domain = &domain_;
    req.timeout = cfg_.plan_timeout;
    req.allow_unobserved = cfg_.allow_unobserved;
    req.prune = cfg_.pruning && !rctx.tried_unpruned;
    req.required_count = item.count;
    req.pinned_patient = item.pinned;

    planner::SubgoalPlan sp = planner::plan_subgoal(req);
    ++result_.plan_calls;
    result_.plan_seconds += sp.plan_seconds;
    dump_plan(sp);
    if (log::level() >= log::Level::Debug) {
      std::string steps;
      for (const auto& s : sp.outcome.plan.steps) steps += s.str() + " ";
      log::debug("plan for %s count=%d pinned=%s: kind=%d [%s]",
                 item.sg.str().c_str(), item.count, item.pinned.c_str(),
                 static_cast<int>(sp.outcome.kind), steps.c_str());
    }

    using planner::OutcomeKind;
    if (sp.outcome.kind == OutcomeKind::GoalAlreadySatisfied) {
      if (item_completed(item)) return ItemOutcome::Completed;
      if (++already_satisfied_spins >= 2) {
        abandon_reasons_.push_back(FailureCategory::PlanNotFound);
        return ItemOutcome::Abandoned;
      }
      continue;
    }
    if (sp.outcome.kind == OutcomeKind::NoSolution ||
        sp.outcome.kind == OutcomeKind::Timeout) {
      note_exception(ExceptionKind::NoPlanFound);
      RecoveryDecision d = recover(ExceptionKind::NoPlanFound, rctx);
      pending_recovery_ = to_string(d.kind);
      if (d.kind == RecoveryDecision::Kind::ReplanUnpruned) {
        rctx.tried_unpruned = true;
        ++result_.replans;
        ++rctx.replans_used;
        continue;
      }
      abandon_reasons_.push_back(FailureCategory::PlanNotFound);
      return ItemOutcome::Abandoned;
    }

    bool need_replan = false;
    ItemOutcome out = execute_plan(sp.outcome.plan, item, rctx, need_replan, depth);
    if (out == ItemOutcome::EpisodeOver || out == ItemOutcome::Abandoned)
      return out;
    if (!need_replan) {
      if (item_completed(item)) return ItemOutcome::Completed;
      ++result_.replans;
      ++rctx.replans_used;
      if (rctx.replans_used >= cfg_.budget.max_replans) {
        abandon_reasons_.push_back(FailureCategory::PlanNotFound);
        return ItemOutcome::Abandoned;
      }
    }
  }
}

EpisodeResult EpisodeRunner::run() {
  if (cfg_.full_observability) preseed_full_observability();
  initial_sweep();

  // duplicates of a subgoal raise the required satisfying count
  std::vector<WorkItem> items;
  std::map<std::string, int> occurrence;
  for (const auto& sg : subgoals_) {
    WorkItem item;
    item.sg = sg;
    item.count = ++occurrence[sg.str()];
    items.push_back(item);
  }
  if (cfg_.last_subgoal_only && items.size() > 1)
    items.erase(items.begin(), items.end() - 1);

  bool any_abandoned = false;
  if (items.empty()) {
    abandon_reasons_.push_back(FailureCategory::SubgoalPrediction);
    any_abandoned = true;
  }

  for (auto& item : items) {
    if (budget_exhausted()) break;
    if (item.sg.completed_hint) {
      if (item_completed(item)) continue;  // verified, skip
    }
    ItemOutcome out = process_item(item, 0);
    if (out == ItemOutcome::Abandoned) any_abandoned = true;
    if (out == ItemOutcome::EpisodeOver) break;
  }

  active_subgoal_ = "";
  plan_remaining_ = 0;
  if (!budget_exhausted()) {
    env_step(PrimitiveAction::nav(ActionType::Stop));
    stop_issued_ = true;
  }

  // metrics
  result_.steps = env_.steps();
  result_.failed_actions = env_.failed_actions();
  result_.metrics.success = env_.task_success();
  result_.metrics.goal_condition_rate = env_.goal_condition_rate();
  result_.metrics.trajectory_length = env_.steps();
  long ref = spec_.reference_length > 0 ? spec_.reference_length
                                        : std::max<long>(1, env_.steps());
  result_.metrics.reference_length = ref;
  result_.metrics.plw_success =
      sim::plw(result_.metrics.success ? 1.0 : 0.0, env_.steps(), ref);
  result_.metrics.plw_goal_condition_rate =
      sim::plw(result_.metrics.goal_condition_rate, env_.steps(), ref);

  if (!result_.metrics.success) {
    // taxonomy priority over everything recorded while running
    FailureCategory cat = FailureCategory::Other;
    auto has = [&](FailureCategory c) {
      return std::find(abandon_reasons_.begin(), abandon_reasons_.end(), c) !=
             abandon_reasons_.end();
    };
    if (has(FailureCategory::SubgoalPrediction))
      cat = FailureCategory::SubgoalPrediction;
    else if (has(FailureCategory::PlanNotFound))
      cat = FailureCategory::PlanNotFound;
    else if (has(FailureCategory::ObjectNotFound))
      cat = FailureCategory::ObjectNotFound;
    else if (has(FailureCategory::GroundingFailure))
      cat = FailureCategory::GroundingFailure;
    else if (has(FailureCategory::InteractionFailure))
      cat = FailureCategory::InteractionFailure;
    result_.failure = cat;
    result_.metrics.failure_category = to_string(cat);
  }
  (void)any_abandoned;

  // trajectory record for the annotation pipeline
  result_.trajectory.conditions = spec_.task.conditions;
  result_.trajectory.initial_atoms = env_.initial_atoms();
  result_.trajectory.initial_satisfied = env_.initial_satisfied();
  result_.trajectory.steps = env_.trajectory();
  return result_;
}

}  // namespace

void preseed_ground_truth(world::WorldModel& world, const sim::Env& env) {
  std::map<std::string, std::string> oracle_to_belief;
  for (const auto& o : env.oracle_instances()) {
    std::vector<int32_t> voxels;
    for (const auto& v : o.voxels)
      if (world.map().in_bounds(v)) voxels.push_back(world.map().index(v));
    if (voxels.empty()) {
      VoxelIdx c = voxel_of(o.centroid);
      if (world.map().in_bounds(c)) voxels.push_back(world.map().index(c));
    }
    if (voxels.empty()) continue;
    auto& rec = world.register_instance(o.category, std::move(voxels));
    for (const auto& [pred, value] : o.states) rec.states[pred] = {value, true};
    rec.held = o.held;
    oracle_to_belief[o.id] = rec.id;
  }
  for (const auto& o : env.oracle_instances()) {
    if (o.parent.empty()) continue;
    auto it = oracle_to_belief.find(o.id);
    auto pit = oracle_to_belief.find(o.parent);
    if (it == oracle_to_belief.end() || pit == oracle_to_belief.end()) continue;
    auto* rec = world.find_mutable(it->second);
    const auto* parent = world.find(pit->second);
    rec->parent = parent->id;
    const sim::CategoryInfo* info =
        sim::AffordanceTable::builtin().find(parent->category);
    rec->parent_is_container = info && info->container;
  }
}

EpisodeResult run_episode(const sim::EpisodeSpec& spec,
                          const std::vector<Subgoal>& subgoals,
                          const EpisodeConfig& config) {
  EpisodeRunner runner(spec, subgoals, config);
  return runner.run();
}

long compute_reference_length(const sim::EpisodeSpec& spec) {
  EpisodeConfig cfg;
  cfg.full_observability = true;
  EpisodeResult res = run_episode(spec, spec.subgoals, cfg);
  if (!res.metrics.success) return -1;
  return res.steps;
}

sim::EpisodeSpec prepare_episode(const std::string& template_name, uint64_t seed,
                                 const sim::Difficulty& difficulty) {
  sim::EpisodeSpec spec = sim::generate_scene(template_name, seed, difficulty);
  long ref = compute_reference_length(spec);
  if (ref < 0)
    throw sim::GenerationFailure("oracle solver failed on " + template_name +
                                 " seed " + std::to_string(seed));
  spec.reference_length = ref;
  return spec;
}

}  // namespace delib::exec
