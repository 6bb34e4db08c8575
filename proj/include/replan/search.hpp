#ifndef REPLAN_SEARCH_HPP
#define REPLAN_SEARCH_HPP

// Search over the refinement space: best-first, depth-first and iterative
// deepening, with a step bound, node/time budgets and eager regression of
// analytical leaf failures.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "replan/domain.hpp"
#include "replan/ebl.hpp"
#include "replan/executor.hpp"
#include "replan/plan.hpp"

namespace replan {

enum class Strategy { BestFirst, Dfs, Iddfs };

inline std::optional<Strategy> strategy_from_name(const std::string& s) {
  if (s == "best-first") return Strategy::BestFirst;
  if (s == "dfs") return Strategy::Dfs;
  if (s == "iddfs") return Strategy::Iddfs;
  return std::nullopt;
}

struct SearchLimits {
  size_t step_bound = 30;   // maximum real (non-dummy) steps in a plan
  long node_budget = 50000;
  double time_budget_s = 0;  // 0 = unlimited
};

struct SearchStats {
  long nodes = 0;           // refine() children consistency-checked
  long expanded = 0;        // nodes refined
  long final_path = 0;      // plan refinements on the final derivation path
  long replay_nodes = 0;    // children produced by replayed decisions
  long replay_on_path = 0;  // of those, how many remain on the final path
  double wall_s = 0;
  double retrieval_s = 0;

  void absorb(const SearchStats& o) {
    nodes += o.nodes;
    expanded += o.expanded;
    replay_nodes += o.replay_nodes;
    wall_s += o.wall_s;
  }
};

struct Node {
  std::shared_ptr<const Node> parent;
  PartialPlan plan;
  Decision decision;  // the decision that produced this node
  int f = 0;
  std::uint64_t seq = 0;
  bool from_replay = false;
  bool flawless = false;
  Flaw selected;  // first flaw in selection order; valid when !flawless
  int threat_count = 0;
};

using NodePtr = std::shared_ptr<const Node>;

// f = steps (dummies included) + open conditions + threats; see rank().
inline NodePtr make_node(PartialPlan plan, Decision decision, NodePtr parent,
                         std::uint64_t seq, bool from_replay = false) {
  auto node = std::make_shared<Node>();
  node->parent = std::move(parent);
  node->plan = std::move(plan);
  node->decision = std::move(decision);
  node->seq = seq;
  node->from_replay = from_replay;
  std::vector<Flaw> flaws = detect_flaws(node->plan);
  node->flawless = flaws.empty();
  if (!node->flawless) node->selected = flaws.front();
  for (const Flaw& fl : flaws)
    if (fl.kind == Flaw::Kind::Threat) ++node->threat_count;
  node->f = static_cast<int>(node->plan.total_step_count()) +
            static_cast<int>(node->plan.open.size()) + node->threat_count;
  return node;
}

inline int rank(const Node& n) { return n.f; }

inline NodePtr make_root(const Problem& problem) {
  Decision start;
  start.type = DecisionType::StartNode;
  return make_node(make_null_plan(problem), start, nullptr, 0);
}

struct SearchResult {
  enum class Status { Solution, Exhausted, Budget };
  Status status = Status::Exhausted;
  NodePtr solution;
  bool depth_limit_hit = false;
  // Analytical leaf explanations regressed to the explanation root.
  std::vector<FailureExplanation> explanations;
};

// One search episode over the refinement space.  The caller owns the
// frontier; budgets are shared through the referenced counters so that the
// extension and recovery phases of an adaptation draw on one allowance.
class Searcher {
 public:
  Searcher(const Domain& domain, const SearchLimits& limits, Strategy strategy,
           RefineMode mode, long* node_counter, SearchStats* stats)
      : domain_(domain),
        limits_(limits),
        strategy_(strategy),
        mode_(mode),
        nodes_(node_counter),
        stats_(stats),
        start_(std::chrono::steady_clock::now()) {}

  void set_expansion_hook(std::function<void(const Node&)> hook) {
    hook_ = std::move(hook);
  }
  void set_seq_counter(std::uint64_t* seq) { seq_ = seq; }

  SearchResult run(std::vector<NodePtr> frontier) {
    if (strategy_ == Strategy::Iddfs) return run_iddfs(std::move(frontier));
    return run_once(std::move(frontier), limits_.step_bound);
  }

 private:
  SearchResult run_iddfs(std::vector<NodePtr> frontier) {
    SearchResult last;
    for (size_t bound = 1; bound <= limits_.step_bound; ++bound) {
      last = run_once(frontier, bound);
      if (last.status != SearchResult::Status::Exhausted) return last;
      if (!last.depth_limit_hit) return last;  // genuinely exhausted
    }
    return last;
  }

  SearchResult run_once(std::vector<NodePtr> frontier, size_t bound) {
    SearchResult result;
    collected_.clear();
    auto cmp = [](const NodePtr& a, const NodePtr& b) {
      if (a->f != b->f) return a->f > b->f;
      return a->seq > b->seq;
    };
    std::priority_queue<NodePtr, std::vector<NodePtr>, decltype(cmp)> heap(cmp);
    std::vector<NodePtr> stack;
    auto push = [&](NodePtr n) {
      if (strategy_ == Strategy::BestFirst)
        heap.push(std::move(n));
      else
        stack.push_back(std::move(n));
    };
    auto pop = [&]() {
      NodePtr n;
      if (strategy_ == Strategy::BestFirst) {
        n = heap.top();
        heap.pop();
      } else {
        n = stack.back();
        stack.pop_back();
      }
      return n;
    };
    auto empty = [&]() {
      return strategy_ == Strategy::BestFirst ? heap.empty() : stack.empty();
    };

    for (NodePtr& n : frontier) push(std::move(n));

    while (!empty()) {
      if (over_budget()) {
        result.status = SearchResult::Status::Budget;
        return result;
      }
      NodePtr node = pop();
      if (node->flawless) {
        verify_solution(*node);
        result.status = SearchResult::Status::Solution;
        result.solution = node;
        return result;
      }
      ++stats_->expanded;
      if (hook_) hook_(*node);

      std::vector<Child> children =
          refine(node->plan, domain_, node->selected, mode_);
      std::vector<NodePtr> viable;
      for (Child& child : children) {
        ++*nodes_;
        if (!child.consistency.ok()) {
          record_failure(child, node);
          continue;
        }
        if (child.plan.real_step_count() > bound) {
          result.depth_limit_hit = true;
          continue;
        }
        viable.push_back(make_node(std::move(child.plan),
                                   std::move(child.decision), node,
                                   next_seq()));
      }
      if (strategy_ == Strategy::BestFirst) {
        for (NodePtr& v : viable) push(std::move(v));
      } else {
        for (auto it = viable.rbegin(); it != viable.rend(); ++it)
          push(std::move(*it));
      }
    }
    result.status = SearchResult::Status::Exhausted;
    result.explanations = std::move(collected_);
    collected_.clear();
    return result;
  }

  bool over_budget() const {
    if (limits_.node_budget > 0 && *nodes_ >= limits_.node_budget) return true;
    if (limits_.time_budget_s > 0) {
      auto elapsed = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start_)
                         .count();
      if (elapsed > limits_.time_budget_s) return true;
    }
    return false;
  }

  void record_failure(const Child& child, const NodePtr& parent) {
    if (!expl_collecting()) return;
    FailureExplanation e = explain_leaf(child.plan, child.consistency);
    e = regress(e, child.decision);
    for (const Node* n = parent.get(); n && n != expl_root_;
         n = n->parent.get())
      e = regress(e, n->decision);
    collected_.push_back(std::move(e));
  }

  bool expl_collecting() const { return collect_; }

 public:
  // Explanation collection is off unless enabled; enable_collection(root)
  // turns it on with the given regression root.
  void enable_collection(const Node* root) {
    collect_ = true;
    expl_root_ = root;
  }
  std::vector<FailureExplanation>& collected() { return collected_; }

 private:
  void verify_solution(const Node& node) const;

  std::uint64_t next_seq() { return seq_ ? ++*seq_ : ++local_seq_; }

  const Domain& domain_;
  SearchLimits limits_;
  Strategy strategy_;
  RefineMode mode_;
  long* nodes_;
  SearchStats* stats_;
  std::chrono::steady_clock::time_point start_;
  const Node* expl_root_ = nullptr;
  bool collect_ = false;
  std::function<void(const Node&)> hook_;
  std::uint64_t* seq_ = nullptr;
  std::uint64_t local_seq_ = 0;
  std::vector<FailureExplanation> collected_;
};

// ---------------------------------------------------------------------------

struct SearchOutcome {
  enum class Status { Solution, Exhausted, BudgetExceeded };
  Status status = Status::Exhausted;
  NodePtr leaf;
  std::vector<GroundAction> actions;
  std::optional<CaseFailureReason> root_reason;
  SearchStats stats;

  bool solved() const { return status == Status::Solution; }
};

inline void finalize_path_stats(SearchStats& stats, const NodePtr& leaf) {
  for (const Node* n = leaf.get(); n && n->parent; n = n->parent.get()) {
    ++stats.final_path;
    if (n->from_replay) ++stats.replay_on_path;
  }
}

// From-scratch search over the whole refinement space.
inline SearchOutcome search(const Domain& domain, const Problem& problem,
                            Strategy strategy, const SearchLimits& limits) {
  SearchOutcome outcome;
  auto t0 = std::chrono::steady_clock::now();
  NodePtr root = make_root(problem);
  Searcher searcher(domain, limits, strategy, RefineMode::Scratch,
                    &outcome.stats.nodes, &outcome.stats);
  searcher.enable_collection(root.get());
  SearchResult r = searcher.run({root});
  switch (r.status) {
    case SearchResult::Status::Solution: {
      outcome.status = SearchOutcome::Status::Solution;
      outcome.leaf = r.solution;
      outcome.actions = extract_solution(r.solution->plan, domain);
      finalize_path_stats(outcome.stats, outcome.leaf);
      break;
    }
    case SearchResult::Status::Exhausted: {
      outcome.status = SearchOutcome::Status::Exhausted;
      if (!r.explanations.empty())
        outcome.root_reason = build_case_failure_reason(
            r.explanations, r.depth_limit_hit, domain);
      break;
    }
    case SearchResult::Status::Budget:
      outcome.status = SearchOutcome::Status::BudgetExceeded;
      break;
  }
  outcome.stats.wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return outcome;
}

inline void Searcher::verify_solution(const Node& node) const {
  ConsistencyResult c = check_consistency(node.plan);
  if (!c.ok()) throw std::logic_error("flawless plan fails consistency check");
  std::vector<GroundAction> actions = extract_solution(node.plan, domain_);
  State init(node.plan.steps[kInitStep].adds.begin(),
             node.plan.steps[kInitStep].adds.end());
  ExecutionResult exec = execute(actions, init);
  if (!exec.ok())
    throw std::logic_error("extracted solution fails to execute: " +
                           exec.failure->reason);
  std::vector<Literal> goals = node.plan.goal.preconds;
  for (Literal& g : goals) {
    Literal resolved = node.plan.bindings.resolve(g);
    g = resolved;
  }
  if (!entails(*exec.final_state, goals))
    throw std::logic_error("extracted solution does not entail the goals");
}

}  // namespace replan

#endif  // REPLAN_SEARCH_HPP
