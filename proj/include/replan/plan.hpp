#ifndef REPLAN_PLAN_HPP
#define REPLAN_PLAN_HPP

// The partial-plan constraint algebra: steps, orderings, bindings, causal
// links, effects and open conditions, flaw detection, refinement operators,
// consistency checking and solution extraction.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "replan/bindings.hpp"
#include "replan/domain.hpp"
#include "replan/executor.hpp"
#include "replan/terms.hpp"

namespace replan {

using StepId = std::uint32_t;
constexpr StepId kInitStep = 0;
constexpr StepId kGoalStep = 0xFFFFFFFFu;

inline std::string step_name(StepId s) {
  if (s == kInitStep) return "0";
  if (s == kGoalStep) return "GOAL";
  return std::to_string(s);
}

struct PlanStep {
  StepId id = 0;
  std::string schema;  // empty for the two dummy steps
  std::vector<Term> params;
  std::vector<Literal> preconds;
  std::vector<Literal> adds;
  std::vector<Literal> deletes;
};

struct CausalLink {
  std::uint32_t serial = 0;  // unique within a plan lineage
  StepId producer = 0;
  Literal cond;
  StepId consumer = 0;
};

struct EffectEntry {
  StepId step = 0;
  Literal lit;  // deletes are stored negated
};

struct OpenCond {
  Literal cond;
  StepId consumer = 0;
};

struct OrderingPair {
  StepId before = 0;
  StepId after = 0;
  bool operator==(const OrderingPair& o) const {
    return before == o.before && after == o.after;
  }
  bool operator<(const OrderingPair& o) const {
    if (before != o.before) return before < o.before;
    return after < o.after;
  }
};

struct Threat {
  CausalLink link;
  StepId clobberer = 0;
  Literal effect;  // the clobbering (negative) effect as stored
};

struct Flaw {
  enum class Kind { OpenCondition, Threat };
  Kind kind = Kind::OpenCondition;
  OpenCond open;        // valid when Kind::OpenCondition
  size_t open_index = 0;
  Threat threat;        // valid when Kind::Threat
};

enum class DecisionType { StartNode, Establishment, Resolution };
enum class DecisionKind { None, NewStep, NewLink, Promotion, Demotion };

inline const char* to_text(DecisionType t) {
  switch (t) {
    case DecisionType::StartNode: return "START-NODE";
    case DecisionType::Establishment: return "ESTABLISHMENT";
    case DecisionType::Resolution: return "RESOLUTION";
  }
  return "?";
}
inline const char* to_text(DecisionKind k) {
  switch (k) {
    case DecisionKind::None: return "NONE";
    case DecisionKind::NewStep: return "NEW-STEP";
    case DecisionKind::NewLink: return "NEW-LINK";
    case DecisionKind::Promotion: return "PROMOTION";
    case DecisionKind::Demotion: return "DEMOTION";
  }
  return "?";
}

// A refinement decision together with the constraint deltas it applied.
// Literals are snapshotted resolved under the child's bindings.
struct Decision {
  DecisionType type = DecisionType::StartNode;
  DecisionKind kind = DecisionKind::None;

  OpenCond consumed;             // establishments
  CausalLink link;               // establishments: the added link
  StepId new_step = 0;           // NewStep
  std::string schema;            // NewStep
  std::vector<Term> step_args;   // NewStep, resolved
  bool producer_is_new = false;  // link producer is the freshly added step

  Threat threat;                 // resolutions

  std::vector<OrderingPair> added_orderings;
  std::vector<std::pair<Term, Term>> added_bindings;
  std::vector<std::pair<Term, Term>> added_distinct;
  std::vector<std::string> sibling_links;  // NewStep: fingerprints of the
                                           // NEW-LINK alternatives
  bool failed_init_link = false;  // link to t_I with unsatisfiable condition
};

struct ConsistencyResult {
  enum class Status { Ok, OrderingCycle, BindingConflict, InitContradiction };
  Status status = Status::Ok;
  // OrderingCycle: the offending pair plus the explicit/structural pairs
  // closing the cycle.
  OrderingPair cycle_pair;
  std::vector<OrderingPair> cycle_path;
  // BindingConflict: the clashing pair of constraints.
  std::pair<Term, Term> bound_pair;
  std::pair<Term, Term> distinct_pair;
  // InitContradiction: the unsupportable link.
  CausalLink init_link;
  bool ok() const { return status == Status::Ok; }
};

class PartialPlan {
 public:
  std::vector<PlanStep> steps;  // index == id; [0] is t_I
  PlanStep goal;                // id kGoalStep
  std::vector<OrderingPair> orderings;  // explicit pairs, creation order
  BindingSet bindings;
  std::vector<CausalLink> links;     // creation order
  std::vector<EffectEntry> effects;  // creation order, t_I entries first
  std::vector<OpenCond> open;        // stack: back() is most recent
  std::uint32_t next_link_serial = 0;

  const PlanStep& step(StepId s) const {
    if (s == kGoalStep) return goal;
    return steps.at(s);
  }

  size_t real_step_count() const { return steps.size() - 1; }
  // Step count including both dummy steps.
  size_t total_step_count() const { return steps.size() + 1; }

  StepId next_step_id() const { return static_cast<StepId>(steps.size()); }

  bool has_ordering(StepId a, StepId b) const {
    for (const auto& p : orderings)
      if (p.before == a && p.after == b) return true;
    return false;
  }

  // Transitive ordering query, including the structural facts that t_I is
  // minimal and t_G maximal.  Assumes the explicit pairs are acyclic.
  bool ordered_before(StepId a, StepId b) const {
    if (a == b) return false;
    if (a == kInitStep) return true;
    if (b == kGoalStep) return true;
    if (a == kGoalStep || b == kInitStep) return reachable(a, b, false);
    return reachable(a, b, false);
  }

  // BFS over explicit pairs; when with_structural is set the t_I/t_G edges
  // participate (used for witness paths).
  bool reachable(StepId from, StepId to, bool with_structural,
                 std::vector<OrderingPair>* path = nullptr) const {
    std::map<StepId, OrderingPair> via;
    std::deque<StepId> queue{from};
    std::set<StepId> seen{from};
    while (!queue.empty()) {
      StepId u = queue.front();
      queue.pop_front();
      std::vector<OrderingPair> out;
      for (const auto& p : orderings)
        if (p.before == u) out.push_back(p);
      if (with_structural) {
        if (u == kInitStep) {
          for (const auto& s : steps)
            if (s.id != kInitStep) out.push_back({kInitStep, s.id});
          out.push_back({kInitStep, kGoalStep});
        } else if (u != kGoalStep) {
          out.push_back({u, kGoalStep});
        }
      }
      for (const auto& edge : out) {
        if (seen.count(edge.after)) continue;
        seen.insert(edge.after);
        via[edge.after] = edge;
        if (edge.after == to) {
          if (path) {
            StepId cur = to;
            while (cur != from) {
              path->push_back(via[cur]);
              cur = via[cur].before;
            }
            std::reverse(path->begin(), path->end());
          }
          return true;
        }
        queue.push_back(edge.after);
      }
    }
    return false;
  }

  // Would adding before<after close a cycle?  Returns the witness path of
  // pairs from `after` back to `before` when it would.
  std::optional<std::vector<OrderingPair>> cycle_on_add(StepId before,
                                                        StepId after) const {
    if (before == after) return std::vector<OrderingPair>{};
    std::vector<OrderingPair> path;
    if (reachable(after, before, true, &path)) return path;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Construction

inline PartialPlan make_null_plan(const Problem& problem) {
  PartialPlan plan;
  PlanStep init;
  init.id = kInitStep;
  init.adds = problem.init;
  plan.steps.push_back(init);
  plan.goal.id = kGoalStep;
  plan.goal.preconds = problem.goals;
  for (const Literal& i : problem.init)
    plan.effects.push_back({kInitStep, i});
  for (const Literal& g : problem.goals) plan.open.push_back({g, kGoalStep});
  return plan;
}

// ---------------------------------------------------------------------------
// Flaw detection

// Threats follow the ground-threat policy: only effects that necessarily
// codesignate with (the negation of) the link condition count, and the
// clobberer must still be able to fall inside the link's span.
inline std::vector<Threat> detect_threats(const PartialPlan& plan) {
  std::vector<Threat> threats;
  for (auto li = plan.links.rbegin(); li != plan.links.rend(); ++li) {
    const CausalLink& link = *li;
    for (auto ei = plan.effects.rbegin(); ei != plan.effects.rend(); ++ei) {
      const EffectEntry& eff = *ei;
      if (eff.step == link.producer || eff.step == link.consumer) continue;
      if (eff.lit.positive == link.cond.positive) continue;
      if (!necessarily_codesignate(eff.lit, link.cond, plan.bindings)) continue;
      if (plan.ordered_before(eff.step, link.producer)) continue;
      if (plan.ordered_before(link.consumer, eff.step)) continue;
      threats.push_back({link, eff.step, eff.lit});
    }
  }
  return threats;
}

// All flaws, selection-ordered: threats first (most recent link first), then
// open conditions most-recently-introduced first.
inline std::vector<Flaw> detect_flaws(const PartialPlan& plan) {
  std::vector<Flaw> flaws;
  for (const Threat& t : detect_threats(plan)) {
    Flaw f;
    f.kind = Flaw::Kind::Threat;
    f.threat = t;
    flaws.push_back(f);
  }
  for (size_t i = plan.open.size(); i-- > 0;) {
    Flaw f;
    f.kind = Flaw::Kind::OpenCondition;
    f.open = plan.open[i];
    f.open_index = i;
    flaws.push_back(f);
  }
  return flaws;
}

// ---------------------------------------------------------------------------
// Consistency

inline ConsistencyResult check_consistency(const PartialPlan& plan) {
  ConsistencyResult r;
  // Ordering cycles: some explicit pair whose endpoints are already ordered
  // the other way by the remaining graph.
  for (size_t i = 0; i < plan.orderings.size(); ++i) {
    const OrderingPair& p = plan.orderings[i];
    PartialPlan probe = plan;  // cheap at desk scale
    probe.orderings.erase(probe.orderings.begin() + i);
    if (auto path = probe.cycle_on_add(p.before, p.after)) {
      r.status = ConsistencyResult::Status::OrderingCycle;
      r.cycle_pair = p;
      r.cycle_path = *path;
      return r;
    }
  }
  // Binding conflicts: a prohibited pair inside one class.
  for (const auto& [a, b] : plan.bindings.distinct_pairs()) {
    if (plan.bindings.necessarily_equal(a, b)) {
      r.status = ConsistencyResult::Status::BindingConflict;
      r.bound_pair = {a, b};
      r.distinct_pair = {a, b};
      return r;
    }
  }
  // Every link from t_I must be supportable by some initial condition.
  for (const CausalLink& link : plan.links) {
    if (link.producer != kInitStep) continue;
    Literal cond = plan.bindings.resolve(link.cond);
    bool supported = false;
    if (cond.positive) {
      for (const Literal& i : plan.steps[kInitStep].adds) {
        if (unify(cond, i, plan.bindings)) {
          supported = true;
          break;
        }
      }
    }
    if (!supported) {
      r.status = ConsistencyResult::Status::InitContradiction;
      r.init_link = link;
      return r;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Refinement

struct Child {
  Decision decision;
  PartialPlan plan;
  ConsistencyResult consistency;
};

enum class RefineMode {
  Scratch,    // only children with a unifiable producer effect
  Extension,  // also materialize unsatisfiable links to t_I so that failures
              // under a replayed plan can be explained
};

// Fingerprint of a linking opportunity: producer schema plus the effect
// literal with its terms normalized positionally.  Rendered as an
// s-expression so trace files can carry it verbatim.
inline std::string link_fingerprint(const std::string& producer_schema,
                                    const Literal& effect) {
  std::map<Term, int> seen;
  Literal norm = effect;
  for (Term& t : norm.args) {
    auto [it, fresh] = seen.emplace(t, static_cast<int>(seen.size() + 1));
    t = Term::var("?v" + std::to_string(it->second));
    (void)fresh;
  }
  std::ostringstream ss;
  ss << '(' << (producer_schema.empty() ? "init" : producer_schema) << ' '
     << norm << ')';
  return ss.str();
}

namespace detail {

inline Term rename_var(const Term& v, StepId id) {
  return Term::var(v.text() + "#" + std::to_string(id));
}

inline Literal rename_literal(const Literal& l, StepId id) {
  Literal out = l;
  for (Term& t : out.args)
    if (t.variable) t = rename_var(t, id);
  return out;
}

// Schema instance with variables standardized apart using the step id.
inline PlanStep instantiate(const OperatorSchema& schema, StepId id) {
  PlanStep s;
  s.id = id;
  s.schema = schema.name;
  for (const Term& p : schema.params) s.params.push_back(rename_var(p, id));
  for (const Literal& l : schema.preconds)
    s.preconds.push_back(rename_literal(l, id));
  for (const Literal& l : schema.adds) s.adds.push_back(rename_literal(l, id));
  for (const Literal& l : schema.deletes)
    s.deletes.push_back(rename_literal(l, id));
  return s;
}

inline void erase_open(PartialPlan& plan, const OpenCond& oc) {
  for (size_t i = plan.open.size(); i-- > 0;) {
    if (plan.open[i].consumer == oc.consumer && plan.open[i].cond == oc.cond) {
      plan.open.erase(plan.open.begin() + i);
      return;
    }
  }
  throw std::logic_error("open condition to consume not found");
}

}  // namespace detail

// Establishment by adding a new step instantiated from `schema`, linking its
// add-effect `effect_index` to the open condition.
inline std::optional<Child> apply_new_step(const PartialPlan& plan,
                                           const OperatorSchema& schema,
                                           size_t effect_index,
                                           const OpenCond& oc) {
  StepId id = plan.next_step_id();
  PlanStep fresh = detail::instantiate(schema, id);
  const Literal& effect = fresh.adds[effect_index];
  auto unified = unify(effect, oc.cond, plan.bindings);
  if (!unified) return std::nullopt;

  Child child;
  child.plan = plan;
  PartialPlan& p = child.plan;
  p.bindings = *unified;
  p.steps.push_back(fresh);

  Decision& d = child.decision;
  d.type = DecisionType::Establishment;
  d.kind = DecisionKind::NewStep;
  d.new_step = id;
  d.schema = schema.name;
  d.producer_is_new = true;
  for (size_t i = 0; i < effect.args.size(); ++i)
    if (!plan.bindings.necessarily_equal(effect.args[i], oc.cond.args[i]))
      d.added_bindings.emplace_back(effect.args[i], oc.cond.args[i]);

  // Compile the schema's equals constraints into the binding set.
  BindingViolation violation;
  for (const EqualsConstraint& c : schema.equals) {
    Term a = c.a.variable ? detail::rename_var(c.a, id) : c.a;
    Term b = c.b.variable ? detail::rename_var(c.b, id) : c.b;
    if (c.equal) {
      d.added_bindings.emplace_back(a, b);
      if (auto v = p.bindings.unify_terms(a, b); v && !violation) violation = v;
    } else {
      d.added_distinct.emplace_back(a, b);
      if (auto v = p.bindings.add_distinct(a, b); v && !violation) violation = v;
    }
  }

  CausalLink link{p.next_link_serial++, id, effect, oc.consumer};
  p.links.push_back(link);
  d.link = link;
  if (oc.consumer != kGoalStep) {
    OrderingPair pair{id, oc.consumer};
    p.orderings.push_back(pair);
    d.added_orderings.push_back(pair);
  }
  for (const Literal& a : fresh.adds) p.effects.push_back({id, a});
  for (const Literal& del : fresh.deletes)
    p.effects.push_back({id, del.negated()});
  detail::erase_open(p, oc);
  for (const Literal& pre : fresh.preconds) p.open.push_back({pre, id});

  d.consumed = {plan.bindings.resolve(oc.cond), oc.consumer};
  for (const Term& t : fresh.params) d.step_args.push_back(p.bindings.find(t));

  if (violation) {
    child.consistency.status = ConsistencyResult::Status::BindingConflict;
    child.consistency.bound_pair = {violation.a, violation.b};
    child.consistency.distinct_pair = {violation.a, violation.b};
  }
  return child;
}

// Establishment by linking the open condition to an effect of an existing
// step.  `effect` must be an entry of that step (or an initial condition for
// t_I).  Inconsistent children are returned marked, not suppressed.
inline std::optional<Child> apply_new_link(const PartialPlan& plan,
                                           StepId producer,
                                           const Literal& effect,
                                           const OpenCond& oc) {
  auto unified = unify(effect, oc.cond, plan.bindings);
  if (!unified) return std::nullopt;

  Child child;
  child.plan = plan;
  PartialPlan& p = child.plan;
  p.bindings = *unified;

  Decision& d = child.decision;
  d.type = DecisionType::Establishment;
  d.kind = DecisionKind::NewLink;
  for (size_t i = 0; i < effect.args.size(); ++i)
    if (!plan.bindings.necessarily_equal(effect.args[i], oc.cond.args[i]))
      d.added_bindings.emplace_back(effect.args[i], oc.cond.args[i]);

  CausalLink link{p.next_link_serial++, producer, effect, oc.consumer};
  p.links.push_back(link);
  d.link = link;

  auto cycle = plan.cycle_on_add(producer, oc.consumer);
  bool structural = producer == kInitStep || oc.consumer == kGoalStep;
  if (!structural && !plan.has_ordering(producer, oc.consumer)) {
    OrderingPair pair{producer, oc.consumer};
    p.orderings.push_back(pair);
    d.added_orderings.push_back(pair);
  }
  detail::erase_open(p, oc);
  d.consumed = {plan.bindings.resolve(oc.cond), oc.consumer};

  if (cycle) {
    child.consistency.status = ConsistencyResult::Status::OrderingCycle;
    child.consistency.cycle_pair = {producer, oc.consumer};
    child.consistency.cycle_path = *cycle;
  }
  return child;
}

// Extension-mode establishment from t_I when no initial condition unifies:
// the plan records the link and is immediately inconsistent.
inline Child apply_failed_init_link(const PartialPlan& plan,
                                    const OpenCond& oc) {
  Child child;
  child.plan = plan;
  PartialPlan& p = child.plan;

  Literal cond = plan.bindings.resolve(oc.cond);
  CausalLink link{p.next_link_serial++, kInitStep, cond, oc.consumer};
  p.links.push_back(link);
  detail::erase_open(p, oc);

  Decision& d = child.decision;
  d.type = DecisionType::Establishment;
  d.kind = DecisionKind::NewLink;
  d.link = link;
  d.consumed = {cond, oc.consumer};
  d.failed_init_link = true;

  child.consistency.status = ConsistencyResult::Status::InitContradiction;
  child.consistency.init_link = link;
  return child;
}

// Threat resolution by ordering the clobberer after the consumer (promotion)
// or before the producer (demotion).
inline Child apply_resolution(const PartialPlan& plan, const Threat& threat,
                              bool promotion) {
  Child child;
  child.plan = plan;
  PartialPlan& p = child.plan;

  OrderingPair pair = promotion
                          ? OrderingPair{threat.link.consumer, threat.clobberer}
                          : OrderingPair{threat.clobberer, threat.link.producer};
  auto cycle = plan.cycle_on_add(pair.before, pair.after);
  p.orderings.push_back(pair);

  Decision& d = child.decision;
  d.type = DecisionType::Resolution;
  d.kind = promotion ? DecisionKind::Promotion : DecisionKind::Demotion;
  d.threat = threat;
  d.threat.link.cond = plan.bindings.resolve(threat.link.cond);
  d.threat.effect = plan.bindings.resolve(threat.effect);
  d.added_orderings.push_back(pair);

  if (cycle) {
    child.consistency.status = ConsistencyResult::Status::OrderingCycle;
    child.consistency.cycle_pair = pair;
    child.consistency.cycle_path = *cycle;
  }
  return child;
}

// The linking opportunities available for an open condition: every existing
// step effect that unifies with it.
inline std::vector<std::pair<StepId, Literal>> link_candidates(
    const PartialPlan& plan, const OpenCond& oc) {
  std::vector<std::pair<StepId, Literal>> out;
  for (const EffectEntry& eff : plan.effects) {
    if (eff.step == oc.consumer) continue;
    if (!unify(eff.lit, oc.cond, plan.bindings)) continue;
    out.emplace_back(eff.step, eff.lit);
  }
  return out;
}

// All refinements of `flaw`, in deterministic order.  Inconsistent children
// are included, marked by their consistency result, so that the search layer
// can record failure explanations for them.
inline std::vector<Child> refine(const PartialPlan& plan, const Domain& domain,
                                 const Flaw& flaw,
                                 RefineMode mode = RefineMode::Scratch) {
  std::vector<Child> children;
  if (flaw.kind == Flaw::Kind::Threat) {
    children.push_back(apply_resolution(plan, flaw.threat, true));
    children.push_back(apply_resolution(plan, flaw.threat, false));
    return children;
  }

  const OpenCond& oc = flaw.open;
  std::vector<std::string> link_prints;
  std::vector<Child> link_children;
  for (const auto& [producer, effect] : link_candidates(plan, oc)) {
    if (auto child = apply_new_link(plan, producer, effect, oc)) {
      link_prints.push_back(
          link_fingerprint(plan.step(producer).schema, effect));
      link_children.push_back(std::move(*child));
    }
  }
  if (oc.cond.positive) {
    for (const OperatorSchema& schema : domain.schemas) {
      for (size_t i = 0; i < schema.adds.size(); ++i) {
        if (auto child = apply_new_step(plan, schema, i, oc)) {
          child->decision.sibling_links = link_prints;
          children.push_back(std::move(*child));
        }
      }
    }
  }
  for (Child& c : link_children) children.push_back(std::move(c));
  // When a condition has no producer at all, an attempt to take it from the
  // initial state is still recorded so the failure can be explained.
  if (mode == RefineMode::Extension && oc.cond.positive &&
      link_children.empty())
    children.push_back(apply_failed_init_link(plan, oc));
  return children;
}

// ---------------------------------------------------------------------------
// Solution extraction

struct ExtractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Topological linearization of the real steps, grounded.  Residual unbound
// variable classes are grounded to the first constant found at a matching
// predicate position of the initial state.
inline std::vector<GroundAction> extract_solution(const PartialPlan& plan,
                                                  const Domain& domain) {
  // Kahn's algorithm over real steps, smallest id first.
  std::vector<StepId> order;
  std::set<StepId> remaining;
  for (const PlanStep& s : plan.steps)
    if (s.id != kInitStep) remaining.insert(s.id);
  while (!remaining.empty()) {
    StepId pick = kGoalStep;
    bool found = false;
    for (StepId s : remaining) {
      bool blocked = false;
      for (const OrderingPair& p : plan.orderings) {
        if (p.after == s && remaining.count(p.before)) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        pick = s;
        found = true;
        break;
      }
    }
    if (!found) throw ExtractionError("ordering constraints are cyclic");
    order.push_back(pick);
    remaining.erase(pick);
  }

  // Residual grounding.
  std::map<Term, Term> ground_map;
  auto ground_term = [&](const Term& t0) -> Term {
    Term t = plan.bindings.find(t0);
    if (!t.variable) return t;
    auto it = ground_map.find(t);
    if (it != ground_map.end()) return it->second;
    // Locate a predicate position where this class occurs.
    for (const PlanStep& s : plan.steps) {
      auto scan = [&](const std::vector<Literal>& lits) -> std::optional<Term> {
        for (const Literal& l : lits) {
          for (size_t k = 0; k < l.args.size(); ++k) {
            if (plan.bindings.find(l.args[k]) != t) continue;
            for (const Literal& i : plan.steps[kInitStep].adds) {
              if (i.pred == l.pred && k < i.args.size() &&
                  !plan.bindings.prohibited(t, i.args[k]))
                return i.args[k];
            }
          }
        }
        return std::nullopt;
      };
      for (const auto* lits : {&s.preconds, &s.adds, &s.deletes}) {
        if (auto c = scan(*lits)) {
          ground_map[t] = *c;
          return *c;
        }
      }
    }
    throw ExtractionError("no consistent grounding for variable " + t.text());
  };

  std::vector<GroundAction> actions;
  for (StepId id : order) {
    const PlanStep& s = plan.step(id);
    GroundAction a;
    a.name = s.schema;
    for (const Term& t : s.params) a.args.push_back(ground_term(t));
    auto ground_lits = [&](const std::vector<Literal>& in) {
      std::vector<Literal> out;
      for (const Literal& l : in) {
        Literal g = l;
        for (Term& t : g.args) t = ground_term(t);
        out.push_back(g);
      }
      return out;
    };
    a.preconds = ground_lits(s.preconds);
    a.adds = ground_lits(s.adds);
    a.deletes = ground_lits(s.deletes);
    if (const OperatorSchema* schema = domain.find_schema(s.schema)) {
      for (const EqualsConstraint& c : schema->equals) {
        if (c.equal) continue;
        Term x = c.a.variable ? detail::rename_var(c.a, id) : c.a;
        Term y = c.b.variable ? detail::rename_var(c.b, id) : c.b;
        a.must_differ.emplace_back(ground_term(x), ground_term(y));
      }
    }
    actions.push_back(std::move(a));
  }
  return actions;
}

// ---------------------------------------------------------------------------
// Canonical form (systematicity checks)

// A renaming-independent serialization of the plan's constraint sets
// <S,O,B,L>.  Steps are keyed by schema plus resolved arguments with
// variables positionally normalized over the whole plan.
inline std::string canonical_form(const PartialPlan& plan) {
  std::map<Term, int> var_ids;
  auto term_text = [&](const Term& t0) {
    Term t = plan.bindings.find(t0);
    if (!t.variable) return t.text();
    auto [it, _] = var_ids.emplace(t, static_cast<int>(var_ids.size() + 1));
    return std::string("?") + std::to_string(it->second);
  };
  auto lit_text = [&](const Literal& l) {
    std::ostringstream ss;
    ss << (l.positive ? "" : "!") << l.pred_text();
    for (const Term& t : l.args) ss << ' ' << term_text(t);
    return ss.str();
  };

  // Step labels, then iterate a neighbourhood refinement so that identical
  // schema/argument steps are told apart by their link structure.
  std::map<StepId, std::string> label;
  label[kInitStep] = "I";
  label[kGoalStep] = "G";
  for (const PlanStep& s : plan.steps) {
    if (s.id == kInitStep) continue;
    std::ostringstream ss;
    ss << s.schema;
    for (const Term& t : s.params) ss << ' ' << term_text(t);
    label[s.id] = ss.str();
  }
  for (int round = 0; round < 3; ++round) {
    std::map<StepId, std::string> next = label;
    for (const auto& [id, base] : label) {
      std::vector<std::string> in, out;
      for (const CausalLink& l : plan.links) {
        if (l.consumer == id)
          in.push_back(label.at(l.producer) + ">" + lit_text(l.cond));
        if (l.producer == id)
          out.push_back(lit_text(l.cond) + ">" + label.at(l.consumer));
      }
      std::sort(in.begin(), in.end());
      std::sort(out.begin(), out.end());
      std::ostringstream ss;
      ss << base << "{";
      for (const auto& x : in) ss << x << ';';
      ss << '|';
      for (const auto& x : out) ss << x << ';';
      ss << '}';
      next[id] = ss.str();
    }
    label = std::move(next);
  }

  std::vector<std::string> step_labels;
  for (const auto& [id, l] : label) step_labels.push_back(l);
  std::sort(step_labels.begin(), step_labels.end());

  std::vector<std::string> ords;
  for (const OrderingPair& p : plan.orderings)
    ords.push_back(label.at(p.before) + "<" + label.at(p.after));
  std::sort(ords.begin(), ords.end());
  ords.erase(std::unique(ords.begin(), ords.end()), ords.end());

  std::vector<std::string> links;
  for (const CausalLink& l : plan.links)
    links.push_back(label.at(l.producer) + "-" + lit_text(l.cond) + "-" +
                    label.at(l.consumer));
  std::sort(links.begin(), links.end());

  std::ostringstream ss;
  ss << "S:";
  for (const auto& s : step_labels) ss << s << '\n';
  ss << "O:";
  for (const auto& o : ords) ss << o << '\n';
  ss << "L:";
  for (const auto& l : links) ss << l << '\n';
  return ss.str();
}

}  // namespace replan

#endif  // REPLAN_PLAN_HPP
