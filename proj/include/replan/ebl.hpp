#ifndef REPLAN_EBL_HPP
#define REPLAN_EBL_HPP

// Analytical failure explanations, their regression through refinement
// decisions, and the construction and evaluation of retrieval failure
// reasons.
//
// A failure explanation is a constraint subset of the plan it explains,
// shaped like the plan itself.  Regressing it through the decision that
// produced the node replaces each constraint the decision added by the
// decision's own preconditions, so that the explanation at the search root
// mentions only the problem's goals and initial-state conditions.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "replan/domain.hpp"
#include "replan/plan.hpp"
#include "replan/subst.hpp"

namespace replan {

struct BindingConstraintE {
  Term a;
  Term b;
  bool equal = true;
};

struct FailureExplanation {
  std::vector<StepId> steps;                 // S_e
  std::vector<OrderingPair> orderings;       // O_e
  std::vector<BindingConstraintE> bindings;  // B_e
  std::vector<CausalLink> links;             // L_e
  std::vector<EffectEntry> effects;          // E_e; entries at t_I may be
                                             // closed-world (negative) facts
  std::vector<OpenCond> opens;               // C_e
};

// The leaf-node explanation for an inconsistent plan: the minimal witnessing
// constraints named by the consistency result.
inline FailureExplanation explain_leaf(const PartialPlan& plan,
                                       const ConsistencyResult& violation) {
  FailureExplanation e;
  switch (violation.status) {
    case ConsistencyResult::Status::Ok:
      throw std::logic_error("explain_leaf on a consistent plan");
    case ConsistencyResult::Status::InitContradiction: {
      CausalLink link = violation.init_link;
      link.cond = plan.bindings.resolve(link.cond);
      e.links.push_back(link);
      e.effects.push_back({kInitStep, link.cond.negated()});
      break;
    }
    case ConsistencyResult::Status::OrderingCycle: {
      e.orderings.push_back(violation.cycle_pair);
      for (const OrderingPair& p : violation.cycle_path)
        e.orderings.push_back(p);
      break;
    }
    case ConsistencyResult::Status::BindingConflict: {
      e.bindings.push_back({violation.bound_pair.first,
                            violation.bound_pair.second, true});
      e.bindings.push_back({violation.distinct_pair.first,
                            violation.distinct_pair.second, false});
      break;
    }
  }
  return e;
}

namespace detail {

inline bool same_pair(const std::pair<Term, Term>& p, const Term& a,
                      const Term& b) {
  return (p.first == a && p.second == b) || (p.first == b && p.second == a);
}

inline bool mentions(const OrderingPair& p, StepId s) {
  return p.before == s || p.after == s;
}

inline void dedup_explanation(FailureExplanation& e) {
  auto key_lit = [](const Literal& l) { return to_string(l); };
  std::sort(e.steps.begin(), e.steps.end());
  e.steps.erase(std::unique(e.steps.begin(), e.steps.end()), e.steps.end());
  std::sort(e.orderings.begin(), e.orderings.end());
  e.orderings.erase(std::unique(e.orderings.begin(), e.orderings.end()),
                    e.orderings.end());
  std::set<std::string> seen;
  auto filter = [&](auto& vec, auto key) {
    auto out = vec;
    out.clear();
    for (const auto& x : vec)
      if (seen.insert(key(x)).second) out.push_back(x);
    vec = std::move(out);
  };
  seen.clear();
  filter(e.links, [&](const CausalLink& l) {
    return std::to_string(l.serial) + "|" + step_name(l.producer) + "|" +
           key_lit(l.cond) + "|" + step_name(l.consumer);
  });
  seen.clear();
  filter(e.effects, [&](const EffectEntry& x) {
    return step_name(x.step) + "|" + key_lit(x.lit);
  });
  seen.clear();
  filter(e.opens, [&](const OpenCond& x) {
    return key_lit(x.cond) + "|" + step_name(x.consumer);
  });
  seen.clear();
  filter(e.bindings, [&](const BindingConstraintE& x) {
    std::string a = x.a.text(), b = x.b.text();
    if (b < a) std::swap(a, b);
    return a + (x.equal ? "=" : "#") + b;
  });
}

}  // namespace detail

// Regresses `expl`, which holds at the node produced by `d`, to d's parent.
inline FailureExplanation regress(const FailureExplanation& expl,
                                  const Decision& d) {
  if (d.type == DecisionType::StartNode) return expl;
  FailureExplanation out;
  bool consumed_needed = false;

  auto added_ordering = [&](const OrderingPair& p) {
    return std::find(d.added_orderings.begin(), d.added_orderings.end(), p) !=
           d.added_orderings.end();
  };
  bool is_establishment = d.type == DecisionType::Establishment;
  bool is_new_step = d.kind == DecisionKind::NewStep;

  for (const StepId& s : expl.steps) {
    if (is_new_step && s == d.new_step)
      consumed_needed = true;
    else
      out.steps.push_back(s);
  }

  for (const OrderingPair& p : expl.orderings) {
    if (added_ordering(p)) {
      if (d.type == DecisionType::Resolution) {
        out.links.push_back(d.threat.link);
        out.effects.push_back({d.threat.clobberer, d.threat.effect});
      } else {
        consumed_needed = true;
      }
    } else if (is_new_step && detail::mentions(p, d.new_step)) {
      consumed_needed = true;
    } else {
      out.orderings.push_back(p);
    }
  }

  for (const BindingConstraintE& b : expl.bindings) {
    bool added = false;
    if (is_establishment) {
      const auto& list = b.equal ? d.added_bindings : d.added_distinct;
      for (const auto& pair : list)
        if (detail::same_pair(pair, b.a, b.b)) {
          added = true;
          break;
        }
    }
    if (added)
      consumed_needed = true;
    else
      out.bindings.push_back(b);
  }

  for (const CausalLink& l : expl.links) {
    if (is_establishment && l.serial == d.link.serial) {
      // The link regresses to the open condition that was the precondition
      // of adding it; initial-state effects regress to themselves.
      consumed_needed = true;
    } else if (is_new_step &&
               (l.producer == d.new_step || l.consumer == d.new_step)) {
      consumed_needed = true;
    } else {
      out.links.push_back(l);
    }
  }

  for (const EffectEntry& eff : expl.effects) {
    if (is_new_step && eff.step == d.new_step)
      consumed_needed = true;
    else
      out.effects.push_back(eff);
  }

  for (const OpenCond& oc : expl.opens) {
    if (is_new_step && oc.consumer == d.new_step)
      consumed_needed = true;
    else
      out.opens.push_back(oc);
  }

  if (consumed_needed && is_establishment) out.opens.push_back(d.consumed);
  if (consumed_needed && !is_establishment)
    throw std::logic_error("resolution decision cannot own step constraints");
  detail::dedup_explanation(out);
  return out;
}

// ---------------------------------------------------------------------------
// Retrieval failure reasons

// Root-level reason for a replay failure: the interacting goals C and the
// initial-state conditions E under which replaying the case fails again.
struct CaseFailureReason {
  std::vector<Literal> goals;       // lifted, implicitly at t_G
  std::vector<Literal> init_conds;  // lifted, signed, implicitly at t_I
  bool sound = true;

  bool operator==(const CaseFailureReason& o) const {
    return goals == o.goals && init_conds == o.init_conds && sound == o.sound;
  }
};

// Consistent constant -> variable generalization.  Constants that occur only
// inside filter-predicate literals keep their identity; every other constant
// and every residual plan variable is renamed to a canonical variable.
class LiftMap {
 public:
  explicit LiftMap(const std::set<std::uint32_t>& filter_preds)
      : filter_preds_(filter_preds) {}

  // First pass over every literal that will be lifted.
  void observe(const Literal& l) {
    bool filter = filter_preds_.count(l.pred) > 0;
    for (const Term& t : l.args) {
      if (t.variable) continue;
      auto [it, _] = only_filter_.emplace(t, true);
      if (!filter) it->second = false;
    }
  }

  Term lift(const Term& t) {
    if (!t.variable) {
      auto it = only_filter_.find(t);
      if (it != only_filter_.end() && it->second) return t;  // filter constant
    }
    auto [it, fresh] = map_.emplace(t, Term());
    if (fresh)
      it->second = Term::var("?x" + std::to_string(map_.size()));
    return it->second;
  }

  Literal lift(const Literal& l) {
    Literal out = l;
    for (Term& t : out.args) t = lift(t);
    return out;
  }

  const std::map<Term, Term>& mapping() const { return map_; }

 private:
  std::set<std::uint32_t> filter_preds_;
  std::map<Term, bool> only_filter_;
  std::map<Term, Term> map_;
};

// Combines the regressed root explanations of every analytical leaf under a
// failing replayed plan into one reason.  The combination is component-wise
// union; reasons formed while any depth-limit leaf occurred are unsound.
inline CaseFailureReason build_case_failure_reason(
    const std::vector<FailureExplanation>& root_explanations,
    bool depth_limit_leaves, const Domain& domain,
    LiftMap* lift_out = nullptr) {
  if (root_explanations.empty())
    throw std::logic_error("no explanations to combine");
  std::vector<Literal> goals;
  std::vector<Literal> init_conds;
  for (const FailureExplanation& e : root_explanations) {
    if (!e.steps.empty() || !e.orderings.empty() || !e.bindings.empty() ||
        !e.links.empty())
      throw std::logic_error("explanation not fully regressed to the root");
    for (const OpenCond& oc : e.opens) {
      if (oc.consumer != kGoalStep)
        throw std::logic_error("root explanation names a non-goal condition");
      goals.push_back(oc.cond);
    }
    for (const EffectEntry& eff : e.effects) {
      if (eff.step != kInitStep)
        throw std::logic_error("root explanation names a non-initial effect");
      init_conds.push_back(eff.lit);
    }
  }

  LiftMap local(domain.filter_predicates());
  LiftMap& lm = lift_out ? *lift_out : local;
  for (const Literal& l : goals) lm.observe(l);
  for (const Literal& l : init_conds) lm.observe(l);

  CaseFailureReason reason;
  reason.sound = !depth_limit_leaves;
  std::set<std::string> seen;
  for (const Literal& l : goals) {
    Literal lifted = lm.lift(l);
    if (seen.insert(to_string(lifted)).second) reason.goals.push_back(lifted);
  }
  seen.clear();
  for (const Literal& l : init_conds) {
    Literal lifted = lm.lift(l);
    if (seen.insert(to_string(lifted)).second)
      reason.init_conds.push_back(lifted);
  }
  return reason;
}

// Does the reason hold for this problem under an extension of `base`?
// Goals in C must map into the problem goals; positive members of E must
// hold in I; negative members must have no true instance in I (their free
// variables read universally).
inline bool reason_holds(const CaseFailureReason& reason,
                         const Problem& problem, const Substitution& base) {
  std::vector<Literal> positives;
  std::vector<Literal> negatives;
  for (const Literal& l : reason.init_conds)
    (l.positive ? positives : negatives).push_back(l);

  auto check_negatives = [&](const Substitution& s) {
    for (const Literal& n : negatives) {
      Literal pos = substitute(s, n);
      pos.positive = true;
      for (const Literal& i : problem.init)
        if (match(pos, i, s)) return false;
    }
    return true;
  };

  return match_all_distinct(reason.goals, problem.goals, base,
                            [&](const Substitution& s1) {
                              return match_all(positives, 0, problem.init, s1,
                                               check_negatives);
                            });
}

}  // namespace replan

#endif  // REPLAN_EBL_HPP
