#include "delib/planner/search.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace delib::planner {

using pddl::AtomId;
using pddl::GroundedAction;
using pddl::GroundedTask;
using pddl::SymState;

std::string PlanStep::str() const {
  std::string s = action + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += args[i];
  }
  return s + ")";
}

namespace {

constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;

// Additive delete-relaxation cost estimates. Conditional effects become
// separate relaxed operators (action preconditions plus positive condition
// literals as preconditions). Negative literals cost 0 when already false,
// otherwise the cheapest deleter.
class AdditiveHeuristic {
 public:
  explicit AdditiveHeuristic(const GroundedTask& task) : task_(task) {
    size_t n_ops = 0;
    for (const auto& a : task.actions) n_ops += 1 + a.cond_effects.size();
    ops_.reserve(n_ops);
    for (const auto& a : task.actions) {
      add_op(a, nullptr);
      for (const auto& ce : a.cond_effects) add_op(a, &ce);
    }
    deleters_.resize(task.atoms.size());
    consumers_.resize(task.atoms.size());
    for (size_t i = 0; i < ops_.size(); ++i) {
      for (AtomId atom : ops_[i].del) deleters_[atom].push_back(i);
      for (AtomId atom : ops_[i].pre) consumers_[atom].push_back(i);
    }
  }

  // h_add of the task goal from state s; kInf when relaxed-unreachable.
  int64_t evaluate(const SymState& s) {
    compute(s);
    int64_t total = 0;
    for (AtomId g : task_.goal_pos) {
      if (cost_[g] >= kInf) return kInf;
      total += cost_[g];
    }
    for (AtomId g : task_.goal_neg) {
      int64_t c = negative_cost(g, s);
      if (c >= kInf) return kInf;
      total += c;
    }
    return total;
  }

 private:
  struct RelaxedOp {
    std::vector<AtomId> pre;
    std::vector<AtomId> add, del;
    int cost;
  };

  void add_op(const GroundedAction& a, const pddl::CondEffect* ce) {
    RelaxedOp op;
    op.pre = a.pre_pos;
    if (ce) {
      op.pre.insert(op.pre.end(), ce->cond_pos.begin(), ce->cond_pos.end());
      std::sort(op.pre.begin(), op.pre.end());
      op.pre.erase(std::unique(op.pre.begin(), op.pre.end()), op.pre.end());
      op.add = ce->add;
      op.del = ce->del;
    } else {
      op.add = a.add;
      op.del = a.del;
    }
    op.cost = a.cost;
    if (!op.add.empty() || !op.del.empty()) ops_.push_back(std::move(op));
  }

  void compute(const SymState& s) {
    cost_.assign(task_.atoms.size(), kInf);
    op_cost_.assign(ops_.size(), kInf);
    unsat_.assign(ops_.size(), 0);
    for (size_t i = 0; i < ops_.size(); ++i)
      unsat_[i] = static_cast<int>(ops_[i].pre.size());

    using Entry = std::pair<int64_t, AtomId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    for (AtomId a : s) {
      cost_[a] = 0;
      open.push({0, a});
    }
    // zero-precondition ops fire immediately
    for (size_t i = 0; i < ops_.size(); ++i) {
      if (unsat_[i] == 0) {
        op_cost_[i] = ops_[i].cost;
        for (AtomId add : ops_[i].add) relax(add, op_cost_[i], open);
      }
    }
    while (!open.empty()) {
      auto [c, atom] = open.top();
      open.pop();
      if (c > cost_[atom]) continue;
      for (size_t op_idx : consumers(atom)) {
        if (--unsat_[op_idx] == 0) {
          int64_t oc = ops_[op_idx].cost;
          for (AtomId p : ops_[op_idx].pre) oc += cost_[p];
          op_cost_[op_idx] = oc;
          for (AtomId add : ops_[op_idx].add) relax(add, oc, open);
        }
      }
    }
  }

  void relax(AtomId atom, int64_t c,
             std::priority_queue<std::pair<int64_t, AtomId>,
                                 std::vector<std::pair<int64_t, AtomId>>,
                                 std::greater<>>& open) {
    if (c < cost_[atom]) {
      cost_[atom] = c;
      open.push({c, atom});
    }
  }

  const std::vector<size_t>& consumers(AtomId atom) const { return consumers_[atom]; }

  int64_t negative_cost(AtomId atom, const SymState& s) {
    if (!pddl::state_contains(s, atom)) return 0;
    int64_t best = kInf;
    for (size_t op_idx : deleters_[atom]) {
      if (op_cost_[op_idx] < best) best = op_cost_[op_idx];
    }
    return best;
  }

  const GroundedTask& task_;
  std::vector<RelaxedOp> ops_;
  std::vector<std::vector<size_t>> deleters_, consumers_;
  std::vector<int64_t> cost_, op_cost_;
  std::vector<int> unsat_;
};

struct Node {
  SymState state;
  int32_t parent = -1;
  uint32_t action = 0;  // grounded action index used to reach this node
  int64_t g = 0;
};

struct QueueEntry {
  int64_t h;       // heuristic of the parent at generation time (or own, for root)
  int64_t g;
  uint32_t action_index;
  uint64_t seq;
  int32_t node;

  bool operator>(const QueueEntry& o) const {
    if (h != o.h) return h > o.h;
    if (g != o.g) return g > o.g;
    if (action_index != o.action_index) return action_index > o.action_index;
    return seq > o.seq;
  }
};

}  // namespace

PlanOutcome search_plan(const GroundedTask& task, const SearchOptions& opts) {
  PlanOutcome out;
  if (task.goal_satisfied(task.init)) {
    out.kind = OutcomeKind::GoalAlreadySatisfied;
    return out;
  }

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(opts.timeout_seconds);

  AdditiveHeuristic h(task);
  std::vector<Node> nodes;
  nodes.push_back({task.init, -1, 0, 0});

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  std::unordered_set<uint64_t> seen;
  seen.insert(pddl::state_hash(task.init));
  uint64_t seq = 0;
  open.push({0, 0, 0, seq++, 0});

  while (!open.empty()) {
    if (std::chrono::steady_clock::now() > deadline) {
      out.kind = OutcomeKind::Timeout;
      return out;
    }
    QueueEntry top = open.top();
    open.pop();
    const int32_t ni = top.node;
    ++out.expanded;

    if (task.goal_satisfied(nodes[ni].state)) {
      // reconstruct
      std::vector<uint32_t> actions;
      for (int32_t cur = ni; nodes[cur].parent >= 0; cur = nodes[cur].parent)
        actions.push_back(nodes[cur].action);
      std::reverse(actions.begin(), actions.end());
      out.kind = OutcomeKind::Solved;
      for (uint32_t idx : actions) {
        const auto& ga = task.actions[idx];
        out.plan.steps.push_back({ga.name, ga.args, ga.cost});
        out.plan.total_cost += ga.cost;
      }
      return out;
    }

    const int64_t hv = opts.uniform_cost ? nodes[ni].g : h.evaluate(nodes[ni].state);
    if (hv >= kInf) continue;  // relaxed dead end

    const SymState state = nodes[ni].state;  // copy: nodes may reallocate
    for (const auto& ga : task.actions) {
      if (!pddl::preconditions_hold(ga, state)) continue;
      SymState succ = pddl::apply(ga, state, task);
      uint64_t hash = pddl::state_hash(succ);
      if (!seen.insert(hash).second) continue;
      Node n;
      n.state = std::move(succ);
      n.parent = ni;
      n.action = ga.index;
      n.g = nodes[ni].g + ga.cost;
      nodes.push_back(std::move(n));
      ++out.generated;
      open.push({hv, nodes.back().g, ga.index, seq++,
                 static_cast<int32_t>(nodes.size() - 1)});
    }
  }
  out.kind = OutcomeKind::NoSolution;
  return out;
}

ValidationResult validate_plan(const MidLevelPlan& plan, const GroundedTask& task) {
  SymState s = task.init;
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    const GroundedAction* match = nullptr;
    for (const auto& ga : task.actions) {
      if (ga.name == step.action && ga.args == step.args) {
        match = &ga;
        break;
      }
    }
    if (!match)
      return {false, static_cast<int>(i), "no grounded action " + step.str()};
    if (!pddl::preconditions_hold(*match, s))
      return {false, static_cast<int>(i), "precondition failed at " + step.str()};
    s = pddl::apply(*match, s, task);
  }
  if (!task.goal_satisfied(s)) {
    return {false, static_cast<int>(plan.steps.size()), "goal unsatisfied after plan"};
  }
  return {true, -1, ""};
}

}  // namespace delib::planner
