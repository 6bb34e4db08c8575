#ifndef REPLAN_REPLAY_HPP
#define REPLAN_REPLAY_HPP

// Eager sequential replay of retrieved derivation traces into a skeletal
// plan, extension-first adaptation with recovery, and replay metrics.
//
// Replay validates each recorded decision against the current plan and
// adopts the matching refinement child when the justification still holds.
// Step addition decisions are additionally skipped when the plan offers
// linking opportunities beyond the siblings recorded with the decision, so
// that positively interacting subplans merge instead of duplicating steps.

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "replan/domain.hpp"
#include "replan/ebl.hpp"
#include "replan/plan.hpp"
#include "replan/search.hpp"
#include "replan/subst.hpp"
#include "replan/trace.hpp"

namespace replan {

struct ReplayItem {
  DerivationTrace trace;
  Substitution subst;  // case variables -> problem terms
  std::string case_id;
};

enum class SkipReason { InvalidPrecondition, IncreasedJustification };

struct ReplayLogEntry {
  size_t item = 0;          // index into the replayed items
  std::string record;       // record name within that trace
  bool replayed = false;
  SkipReason skip = SkipReason::InvalidPrecondition;
};

struct ReplayLog {
  std::vector<ReplayLogEntry> entries;

  long replayed_count() const {
    long n = 0;
    for (const auto& e : entries) n += e.replayed ? 1 : 0;
    return n;
  }
};

struct ReplayedPath {
  NodePtr root;      // null-plan node
  NodePtr skeletal;  // last replayed node (== root when nothing replayed)
  ReplayLog log;
  // Untaken consistent siblings of each replayed decision, kept for the
  // recovery phase, with the trace item whose decision they bypass.
  std::vector<NodePtr> recovery_frontier;
  std::vector<size_t> frontier_items;
};

struct ReplayOptions {
  bool increased_justification = true;
};

namespace detail {

// Extends the per-item substitution so that every trace variable resolves to
// a fresh replay variable up front; plan terms then bind to those through
// sigma updates as decisions are adopted.
inline void freshen_variables(const DerivationTrace& trace, size_t item_index,
                              Substitution& sigma) {
  auto touch = [&](const Term& t) {
    if (!t.variable || sigma.count(t)) return;
    sigma[t] = Term::var("?r" + std::to_string(item_index) + "_" +
                         t.text().substr(1));
  };
  auto touch_lit = [&](const Literal& l) {
    for (const Term& t : l.args) touch(t);
  };
  for (const DecisionRecord& r : trace.records) {
    touch_lit(r.open_cond);
    touch_lit(r.link_cond);
    touch_lit(r.threat_cond);
    touch_lit(r.clobber_effect);
    for (const Term& t : r.step_args) touch(t);
  }
}

// Records how the plan instantiated the decision: trace-side variables pick
// up the plan terms they matched.
inline void absorb_bindings(Substitution& sigma, const Literal& pattern,
                            const Literal& plan_lit, const BindingSet& b) {
  for (size_t i = 0; i < pattern.args.size() && i < plan_lit.args.size();
       ++i) {
    Term p = substitute(sigma, pattern.args[i]);
    if (p.variable) sigma[p] = b.find(plan_lit.args[i]);
  }
}

inline bool compatible(const Literal& want, const Literal& have,
                       const BindingSet& b) {
  return unify(want, have, b).has_value();
}

}  // namespace detail

// Validation outcome for one decision record against the current plan.
struct Validation {
  bool valid = false;
  SkipReason skip = SkipReason::InvalidPrecondition;
  Flaw flaw;                  // the flaw the decision resolves (when valid)
  Literal target_link_cond;   // substituted link condition
  std::vector<std::string> current_link_prints;  // for NEW-STEP decisions
};

// Checks a decision record's justification in the current plan, following
// the validation rules: establishments need their open condition (and, for
// links, a unifiable producer effect), resolutions need the threat.
inline Validation validate_decision(const DecisionRecord& rec,
                                    const PartialPlan& plan,
                                    const std::map<StepId, StepId>& idmap,
                                    const Substitution& sigma,
                                    const ReplayOptions& opts = {}) {
  Validation v;
  auto mapped = [&](StepId s) -> std::optional<StepId> {
    auto it = idmap.find(s);
    if (it == idmap.end()) return std::nullopt;
    return it->second;
  };

  if (rec.type == DecisionType::Establishment) {
    auto consumer = mapped(rec.open_consumer);
    if (!consumer) return v;
    Literal want = substitute(sigma, rec.open_cond);
    const OpenCond* entry = nullptr;
    for (size_t i = plan.open.size(); i-- > 0;) {
      const OpenCond& oc = plan.open[i];
      if (oc.consumer != *consumer) continue;
      if (detail::compatible(want, plan.bindings.resolve(oc.cond),
                             plan.bindings)) {
        entry = &oc;
        break;
      }
    }
    if (!entry) return v;
    v.flaw.kind = Flaw::Kind::OpenCondition;
    v.flaw.open = *entry;

    if (rec.kind == DecisionKind::NewLink) {
      auto producer = mapped(rec.producer);
      if (!producer) return v;
      v.target_link_cond = substitute(sigma, rec.link_cond);
      bool supplies = false;
      for (const auto& [step, effect] : link_candidates(plan, *entry)) {
        if (step != *producer) continue;
        if (detail::compatible(v.target_link_cond,
                               plan.bindings.resolve(effect), plan.bindings)) {
          supplies = true;
          break;
        }
      }
      if (!supplies) return v;
      v.valid = true;
      return v;
    }

    // NEW-STEP: subject to increased justification.
    for (const auto& [step, effect] : link_candidates(plan, *entry))
      v.current_link_prints.push_back(
          link_fingerprint(plan.step(step).schema, effect));
    if (opts.increased_justification) {
      for (const std::string& fp : v.current_link_prints) {
        if (std::find(rec.siblings.begin(), rec.siblings.end(), fp) ==
            rec.siblings.end()) {
          v.skip = SkipReason::IncreasedJustification;
          return v;
        }
      }
    }
    v.valid = true;
    return v;
  }

  if (rec.type == DecisionType::Resolution) {
    auto p = mapped(rec.threat_producer);
    auto c = mapped(rec.threat_consumer);
    auto t = mapped(rec.clobberer);
    if (!p || !c || !t) return v;
    for (const Threat& threat : detect_threats(plan)) {
      if (threat.link.producer == *p && threat.link.consumer == *c &&
          threat.clobberer == *t &&
          threat.link.cond.pred == rec.threat_cond.pred) {
        v.flaw.kind = Flaw::Kind::Threat;
        v.flaw.threat = threat;
        v.valid = true;
        return v;
      }
    }
    return v;
  }
  return v;  // START-NODE records are never replayed
}

// ---------------------------------------------------------------------------

// Replays every item in sequence, eagerly adopting each valid decision.
// Returns the skeletal path plus the untaken siblings for recovery.
inline ReplayedPath replay(const std::vector<ReplayItem>& items,
                           const Problem& problem, const Domain& domain,
                           SearchStats* stats, std::uint64_t* seq,
                           const ReplayOptions& opts = {}) {
  ReplayedPath path;
  path.root = make_root(problem);
  NodePtr current = path.root;

  std::vector<Substitution> sigmas;
  for (size_t i = 0; i < items.size(); ++i) {
    Substitution sigma = items[i].subst;
    detail::freshen_variables(items[i].trace, i, sigma);
    sigmas.push_back(std::move(sigma));
  }

  for (size_t item_index = 0; item_index < items.size(); ++item_index) {
    const DerivationTrace& trace = items[item_index].trace;
    Substitution& sigma = sigmas[item_index];
    std::map<StepId, StepId> idmap{{kInitStep, kInitStep},
                                   {kGoalStep, kGoalStep}};

    for (const DecisionRecord& rec : trace.records) {
      if (rec.type == DecisionType::StartNode) continue;
      ReplayLogEntry entry;
      entry.item = item_index;
      entry.record = rec.name;

      Validation v =
          validate_decision(rec, current->plan, idmap, sigma, opts);
      if (!v.valid) {
        entry.skip = v.skip;
        path.log.entries.push_back(entry);
        continue;
      }

      std::vector<Child> children = refine(current->plan, domain, v.flaw);
      if (stats) stats->nodes += static_cast<long>(children.size());

      // Select the child matching the recorded decision.
      int taken = -1;
      for (size_t ci = 0; ci < children.size(); ++ci) {
        Child& ch = children[ci];
        if (!ch.consistency.ok()) continue;
        if (ch.decision.kind != rec.kind) continue;
        if (rec.kind == DecisionKind::NewStep) {
          if (ch.decision.schema != rec.schema) continue;
          bool args_ok = true;
          for (size_t k = 0; k < rec.step_args.size(); ++k) {
            Term want = substitute(sigma, rec.step_args[k]);
            Term have = ch.plan.bindings.find(ch.decision.step_args[k]);
            if (!want.variable && !have.variable && want != have)
              args_ok = false;
          }
          if (!args_ok) continue;
        } else if (rec.kind == DecisionKind::NewLink) {
          auto it = idmap.find(rec.producer);
          if (ch.decision.link.producer != it->second) continue;
          if (!detail::compatible(v.target_link_cond,
                                  ch.plan.bindings.resolve(
                                      ch.decision.link.cond),
                                  ch.plan.bindings))
            continue;
        } else {
          // Resolutions: promotion/demotion already matched by kind; make
          // sure it is the same threat.
          if (!(ch.decision.threat.link.producer == v.flaw.threat.link.producer &&
                ch.decision.threat.link.consumer == v.flaw.threat.link.consumer &&
                ch.decision.threat.clobberer == v.flaw.threat.clobberer))
            continue;
        }
        taken = static_cast<int>(ci);
        break;
      }
      if (taken < 0) {
        entry.skip = SkipReason::InvalidPrecondition;
        path.log.entries.push_back(entry);
        continue;
      }

      Child& chosen = children[taken];
      // Thread the plan's instantiation back into the substitution.
      if (rec.type == DecisionType::Establishment) {
        detail::absorb_bindings(sigma, rec.open_cond, v.flaw.open.cond,
                                chosen.plan.bindings);
        detail::absorb_bindings(sigma, rec.link_cond, chosen.decision.link.cond,
                                chosen.plan.bindings);
        if (rec.kind == DecisionKind::NewStep) {
          idmap[rec.created] = chosen.decision.new_step;
          Literal want(true, "args", rec.step_args);
          Literal have(true, "args", chosen.decision.step_args);
          detail::absorb_bindings(sigma, want, have, chosen.plan.bindings);
        }
      }

      NodePtr node = make_node(std::move(chosen.plan),
                               std::move(chosen.decision), current,
                               seq ? ++*seq : 0, /*from_replay=*/true);
      if (stats) ++stats->replay_nodes;
      entry.replayed = true;
      path.log.entries.push_back(entry);

      // Keep the untaken consistent siblings for recovery.
      for (size_t ci = 0; ci < children.size(); ++ci) {
        if (static_cast<int>(ci) == taken) continue;
        Child& ch = children[ci];
        if (!ch.consistency.ok()) continue;
        path.recovery_frontier.push_back(
            make_node(std::move(ch.plan), std::move(ch.decision), current,
                      seq ? ++*seq : 0));
        path.frontier_items.push_back(item_index);
      }
      current = node;
    }
  }
  path.skeletal = current;
  return path;
}

// ---------------------------------------------------------------------------
// Adaptation: replay, extension, and recovery

struct ReplayMetrics {
  bool seq = false;
  double der = 0;  // replay-produced nodes on the final path / path length
  double rep = 0;  // replay-produced nodes on the final path / all replayed
};

struct AdaptOutcome {
  enum class Status { Sequenced, Recovered, Failed };
  Status status = Status::Failed;
  bool budget_exhausted = false;
  NodePtr leaf;
  NodePtr skeletal;
  std::vector<GroundAction> actions;
  std::optional<CaseFailureReason> failure_reason;
  // For recovered episodes: the replayed item whose decision the recovery
  // backtracked over (the failing case).
  std::optional<size_t> failing_item;
  // Mapping from episode terms to the reason's variables; used to tie a
  // stored reason back to the failing case's own variables.
  std::map<Term, Term> reason_lift;
  SearchStats stats;
  ReplayLog log;
  ReplayMetrics metrics;

  bool solved() const { return status != Status::Failed; }
};

inline AdaptOutcome adapt(const Domain& domain, const Problem& problem,
                          const std::vector<ReplayItem>& items,
                          Strategy strategy, const SearchLimits& limits,
                          const ReplayOptions& opts = {}) {
  AdaptOutcome out;
  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t seq_counter = 0;

  ReplayedPath path =
      replay(items, problem, domain, &out.stats, &seq_counter, opts);
  out.log = path.log;
  out.skeletal = path.skeletal;
  long replayed_total = path.log.replayed_count();

  auto finish_metrics = [&](const NodePtr& leaf, bool sequenced) {
    finalize_path_stats(out.stats, leaf);
    out.metrics.seq = sequenced;
    if (out.stats.final_path > 0)
      out.metrics.der = static_cast<double>(out.stats.replay_on_path) /
                        static_cast<double>(out.stats.final_path);
    if (replayed_total > 0)
      out.metrics.rep = static_cast<double>(out.stats.replay_on_path) /
                        static_cast<double>(replayed_total);
    out.stats.wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  };

  // Extension: explore the subtree under the skeletal plan first.
  Searcher extension(domain, limits, strategy, RefineMode::Extension,
                     &out.stats.nodes, &out.stats);
  extension.set_seq_counter(&seq_counter);
  extension.enable_collection(path.skeletal.get());
  SearchResult ext = extension.run({path.skeletal});

  if (ext.status == SearchResult::Status::Solution) {
    out.status = AdaptOutcome::Status::Sequenced;
    out.leaf = ext.solution;
    out.actions = extract_solution(ext.solution->plan, domain);
    finish_metrics(out.leaf, true);
    return out;
  }
  if (ext.status == SearchResult::Status::Budget) {
    out.budget_exhausted = true;
    finish_metrics(path.skeletal, false);
    return out;
  }

  // The skeletal plan failed: its failure reason is the extension failures
  // regressed through the replayed decisions to the search root.
  if (!ext.explanations.empty()) {
    std::vector<FailureExplanation> at_root;
    for (FailureExplanation e : ext.explanations) {
      for (const Node* n = path.skeletal.get(); n && n->parent;
           n = n->parent.get())
        e = regress(e, n->decision);
      at_root.push_back(std::move(e));
    }
    LiftMap lm(domain.filter_predicates());
    out.failure_reason = build_case_failure_reason(
        at_root, ext.depth_limit_hit, domain, &lm);
    out.reason_lift = lm.mapping();
  }

  // Recovery: explore the siblings of the replayed path.
  Searcher recovery(domain, limits, strategy, RefineMode::Scratch,
                    &out.stats.nodes, &out.stats);
  recovery.set_seq_counter(&seq_counter);
  SearchResult rec = recovery.run(path.recovery_frontier);
  if (rec.status == SearchResult::Status::Solution) {
    out.status = AdaptOutcome::Status::Recovered;
    out.leaf = rec.solution;
    out.actions = extract_solution(rec.solution->plan, domain);
    // The frontier ancestor of the solution names the decision that was
    // backtracked over, and with it the failing case.
    for (const Node* n = out.leaf.get(); n; n = n->parent.get()) {
      for (size_t fi = 0; fi < path.recovery_frontier.size(); ++fi) {
        if (path.recovery_frontier[fi].get() == n) {
          out.failing_item = path.frontier_items[fi];
          break;
        }
      }
      if (out.failing_item) break;
    }
    finish_metrics(out.leaf, false);
    return out;
  }
  out.status = AdaptOutcome::Status::Failed;
  out.budget_exhausted = rec.status == SearchResult::Status::Budget;
  finish_metrics(path.skeletal, false);
  return out;
}

}  // namespace replan

#endif  // REPLAN_REPLAY_HPP
