#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "delib/monitor/task_monitor.hpp"
#include "delib/planner/problem_builder.hpp"
#include "delib/sim/env.hpp"
#include "delib/sim/generator.hpp"
#include "delib/sim/metrics.hpp"
#include "delib/world/world_model.hpp"

namespace delib::exec {

enum class ExceptionKind {
  NoPlanFound,
  TargetUnreachable,
  TargetNotVisible,
  PathBlocked,
  ObjectNotFoundAfterSearch,
  ReceptacleFull,
  HandOccupied,
  NoEffectObserved,
  SimulatorRejection,
};

enum class ExceptionPhase { PreExecution, PostExecution };

std::string to_string(ExceptionKind k);
ExceptionPhase phase_of(ExceptionKind k);

// Deterministic mapping from an abnormal action attempt to its kind.
// `reason` is the environment failure reason (empty when the env reported
// success); `effect_missing` marks a success whose expected belief change
// did not show up in the post-step observation.
ExceptionKind classify_exception(const std::string& reason, bool effect_missing);

enum class FailureCategory {
  SubgoalPrediction,
  PlanNotFound,
  ObjectNotFound,
  InteractionFailure,
  GroundingFailure,
  Other,
};

std::string to_string(FailureCategory c);

struct Budget {
  int max_steps = 1000;
  int max_failed = 30;
  int subgoal_steps = 200;
  int max_replans = 5;
};

struct RecoveryContext {
  bool replanning_enabled = true;
  int replans_used = 0;
  int max_replans = 5;
  bool already_retried = false;   // the single NoEffectObserved retry
  bool tried_unpruned = false;    // the single NoPlanFound unpruned retry
  bool regrounded = false;        // TargetNotVisible re-aim already attempted
  bool path_rebuilt = false;      // PathBlocked grid rebuild already attempted
  std::optional<monitor::Subgoal> clear_subgoal;    // ReceptacleFull push
  std::string clear_pinned;                         // occupant instance id
  std::optional<monitor::Subgoal> putdown_subgoal;  // HandOccupied push
};

struct RecoveryDecision {
  enum class Kind {
    RetryAction,
    ReGround,
    ReplanPath,
    ReplanSubgoal,
    ReplanUnpruned,
    PushSubgoal,
    Abandon,
  };
  Kind kind = Kind::Abandon;
  monitor::Subgoal push;     // for PushSubgoal
  std::string push_pinned;   // occupant instance to move, when applicable
};

std::string to_string(RecoveryDecision::Kind k);

// The exception decision tree.
RecoveryDecision recover(ExceptionKind kind, const RecoveryContext& ctx);

struct EpisodeConfig {
  Budget budget;
  sim::NoiseConfig noise;
  uint64_t seed = 0;
  bool full_observability = false;
  bool pruning = true;
  bool replanning = true;
  bool last_subgoal_only = false;
  bool allow_unobserved = true;
  double plan_timeout = 120.0;
  Camera camera;
  std::string dump_plans_dir;
  std::string dump_frames_dir;
};

struct EpisodeResult {
  sim::MetricsReport metrics;
  std::optional<FailureCategory> failure;
  int steps = 0;
  int failed_actions = 0;
  int replans = 0;
  int recoveries = 0;
  int searches = 0;
  int plan_calls = 0;
  double plan_seconds = 0;
  std::map<std::string, int> exception_counts;
  std::vector<std::string> trace;        // JSONL records, one per step
  monitor::TrajectoryRecord trajectory;  // oracle diffs for annotation
};

// Runs one episode: per subgoal prune/plan/execute/update with exception
// recovery, within the step/failure budgets.
EpisodeResult run_episode(const sim::EpisodeSpec& spec,
                          const std::vector<monitor::Subgoal>& subgoals,
                          const EpisodeConfig& config);

// Registers every oracle instance in the belief with authoritative states
// and relations (the fully-observable bootstrap).
void preseed_ground_truth(world::WorldModel& world, const sim::Env& env);

// Full-observability noiseless solve; returns the step count and requires
// success (used for reference lengths and generation guarantees).
long compute_reference_length(const sim::EpisodeSpec& spec);

// generate_scene + oracle reference length (throws GenerationFailure when
// the oracle cannot solve the scene).
sim::EpisodeSpec prepare_episode(const std::string& template_name, uint64_t seed,
                                 const sim::Difficulty& difficulty = {});

}  // namespace delib::exec
