#ifndef REPLAN_TRACE_HPP
#define REPLAN_TRACE_HPP

// Derivation traces: the replayable decision sequence of a successful
// derivation, its generalization for storage, and the trace file format.

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "replan/domain.hpp"
#include "replan/ebl.hpp"
#include "replan/plan.hpp"
#include "replan/search.hpp"
#include "replan/sexpr.hpp"

namespace replan {

// One replayable decision.  Step references use trace-local creation-order
// ids; literals are snapshots under the bindings current when the decision
// was taken (open conditions before it, link conditions after).
struct DecisionRecord {
  std::string name;  // G1, G2, ...
  DecisionType type = DecisionType::StartNode;
  DecisionKind kind = DecisionKind::None;

  std::string schema;           // NEW-STEP
  std::vector<Term> step_args;  // NEW-STEP
  StepId created = 0;           // NEW-STEP

  StepId producer = 0;  // establishments: the link
  Literal link_cond;
  StepId consumer = 0;
  Literal open_cond;  // establishments: the justification
  StepId open_consumer = 0;

  StepId threat_producer = 0;  // resolutions
  Literal threat_cond;
  StepId threat_consumer = 0;
  StepId clobberer = 0;
  Literal clobber_effect;

  std::vector<std::string> siblings;  // NEW-STEP: link fingerprints

  bool operator==(const DecisionRecord& o) const {
    return name == o.name && type == o.type && kind == o.kind &&
           schema == o.schema && step_args == o.step_args &&
           created == o.created && producer == o.producer &&
           link_cond == o.link_cond && consumer == o.consumer &&
           open_cond == o.open_cond && open_consumer == o.open_consumer &&
           threat_producer == o.threat_producer &&
           threat_cond == o.threat_cond &&
           threat_consumer == o.threat_consumer && clobberer == o.clobberer &&
           clobber_effect == o.clobber_effect && siblings == o.siblings;
  }
};

struct DerivationTrace {
  std::vector<DecisionRecord> records;  // starts with a START-NODE record
  std::vector<Literal> goals;           // goals the derivation achieved
  std::vector<Literal> footprint;       // conditions of links from t_I
  bool lifted = false;

  bool operator==(const DerivationTrace& o) const {
    return records == o.records && goals == o.goals &&
           footprint == o.footprint && lifted == o.lifted;
  }
};

// The footprinted initial state: conditions of every causal link whose
// producer is the initial step.
inline std::vector<Literal> trace_footprint(
    const std::vector<DecisionRecord>& records) {
  std::vector<Literal> out;
  std::set<std::string> seen;
  for (const DecisionRecord& r : records) {
    if (r.type != DecisionType::Establishment ||
        r.kind != DecisionKind::NewLink || r.producer != kInitStep)
      continue;
    if (seen.insert(to_string(r.link_cond)).second) out.push_back(r.link_cond);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extraction

// Records the root-to-leaf decisions of a solution node.  Sibling
// annotations are re-derived from each parent plan and must agree with the
// ones captured when the decision was taken.
inline DerivationTrace extract_trace(const NodePtr& leaf) {
  std::vector<const Node*> path;
  for (const Node* n = leaf.get(); n; n = n->parent.get()) path.push_back(n);
  std::reverse(path.begin(), path.end());

  DerivationTrace trace;
  int counter = 1;
  for (size_t i = 0; i < path.size(); ++i) {
    const Node* node = path[i];
    const Decision& d = node->decision;
    DecisionRecord r;
    r.name = "G" + std::to_string(counter++);
    r.type = d.type;
    r.kind = d.kind;
    switch (d.type) {
      case DecisionType::StartNode:
        break;
      case DecisionType::Establishment: {
        r.open_cond = d.consumed.cond;
        r.open_consumer = d.consumed.consumer;
        r.producer = d.link.producer;
        r.link_cond = node->plan.bindings.resolve(d.link.cond);
        r.consumer = d.link.consumer;
        if (d.kind == DecisionKind::NewStep) {
          r.schema = d.schema;
          r.created = d.new_step;
          for (const Term& t : d.step_args)
            r.step_args.push_back(node->plan.bindings.find(t));
          r.siblings = d.sibling_links;
          // Annotation completeness check against the parent plan.
          const Node* parent = path[i - 1];
          std::set<std::string> expect;
          for (const auto& [producer, effect] :
               link_candidates(parent->plan, d.consumed))
            expect.insert(link_fingerprint(parent->plan.step(producer).schema,
                                           effect));
          std::set<std::string> got(r.siblings.begin(), r.siblings.end());
          if (expect != got)
            throw std::logic_error(
                "sibling annotation does not match the linking alternatives");
        }
        break;
      }
      case DecisionType::Resolution: {
        r.threat_producer = d.threat.link.producer;
        r.threat_cond = node->plan.bindings.resolve(d.threat.link.cond);
        r.threat_consumer = d.threat.link.consumer;
        r.clobberer = d.threat.clobberer;
        r.clobber_effect = node->plan.bindings.resolve(d.threat.effect);
        break;
      }
    }
    trace.records.push_back(std::move(r));
  }
  const PartialPlan& root_plan = path.front()->plan;
  trace.goals = root_plan.goal.preconds;
  trace.footprint = trace_footprint(trace.records);
  return trace;
}

// ---------------------------------------------------------------------------
// Lifting (generalization for storage)

// Retains exactly the decisions in the causal-dependency closure of
// keep_goals, renumbers them, and generalizes object constants to variables
// (constants occurring only in filter conditions stay).
inline DerivationTrace lift(const DerivationTrace& trace,
                            const std::vector<Literal>& keep_goals,
                            const Domain& domain) {
  // Fixpoint over relevant steps and links.
  std::set<std::string> kept_goal_keys;
  for (const Literal& g : keep_goals) kept_goal_keys.insert(to_string(g));
  std::set<StepId> relevant_steps;
  std::set<size_t> relevant_records;
  auto link_key = [](StepId p, const Literal& c, StepId s) {
    return step_name(p) + "|" + to_string(c) + "|" + step_name(s);
  };
  std::set<std::string> relevant_links;

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < trace.records.size(); ++i) {
      if (relevant_records.count(i)) continue;
      const DecisionRecord& r = trace.records[i];
      bool keep = false;
      if (r.type == DecisionType::Establishment) {
        if (r.open_consumer == kGoalStep)
          keep = kept_goal_keys.count(to_string(r.open_cond)) > 0;
        else
          keep = relevant_steps.count(r.open_consumer) > 0;
      } else if (r.type == DecisionType::Resolution) {
        bool link_ok = relevant_links.count(
                           link_key(r.threat_producer, r.threat_cond,
                                    r.threat_consumer)) > 0;
        bool clobber_ok = relevant_steps.count(r.clobberer) > 0 ||
                          r.clobberer == kInitStep;
        keep = link_ok && clobber_ok;
      }
      if (!keep) continue;
      relevant_records.insert(i);
      changed = true;
      if (r.kind == DecisionKind::NewStep) relevant_steps.insert(r.created);
      if (r.type == DecisionType::Establishment) {
        if (r.producer != kInitStep && r.producer != kGoalStep)
          relevant_steps.insert(r.producer);
        relevant_links.insert(link_key(r.producer, r.link_cond, r.consumer));
      }
    }
  }

  // Rebuild with renumbered steps and record names.
  std::map<StepId, StepId> id_map{{kInitStep, kInitStep},
                                  {kGoalStep, kGoalStep}};
  LiftMap lm(domain.filter_predicates());
  std::vector<const DecisionRecord*> kept;
  kept.push_back(&trace.records.front());  // START-NODE
  for (size_t i = 0; i < trace.records.size(); ++i) {
    if (i == 0 || !relevant_records.count(i)) continue;
    kept.push_back(&trace.records[i]);
  }
  for (const DecisionRecord* r : kept) {
    lm.observe(r->open_cond);
    lm.observe(r->link_cond);
    lm.observe(r->threat_cond);
    lm.observe(r->clobber_effect);
    Literal args_lit(true, "args", r->step_args);
    lm.observe(args_lit);
  }
  for (const Literal& g : keep_goals) lm.observe(g);

  DerivationTrace out;
  out.lifted = true;
  StepId next_id = 1;
  int counter = 1;
  for (const DecisionRecord* src : kept) {
    DecisionRecord r = *src;
    r.name = "G" + std::to_string(counter++);
    if (r.kind == DecisionKind::NewStep) {
      id_map[r.created] = next_id;
      r.created = next_id++;
    }
    auto remap = [&](StepId s) {
      auto it = id_map.find(s);
      if (it == id_map.end())
        throw std::logic_error("lift: dependency closure is ill-formed");
      return it->second;
    };
    if (r.type == DecisionType::Establishment) {
      r.producer = remap(r.producer);
      r.consumer = remap(r.consumer);
      r.open_consumer = remap(r.open_consumer);
    } else if (r.type == DecisionType::Resolution) {
      r.threat_producer = remap(r.threat_producer);
      r.threat_consumer = remap(r.threat_consumer);
      r.clobberer = remap(r.clobberer);
    }
    r.open_cond = lm.lift(r.open_cond);
    r.link_cond = lm.lift(r.link_cond);
    r.threat_cond = lm.lift(r.threat_cond);
    r.clobber_effect = lm.lift(r.clobber_effect);
    for (Term& t : r.step_args) t = lm.lift(t);
    out.records.push_back(std::move(r));
  }
  for (const Literal& g : keep_goals) out.goals.push_back(lm.lift(g));
  out.footprint = trace_footprint(out.records);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization (line-oriented s-expressions)

namespace detail {

inline std::string render_literal(const Literal& l) {
  std::ostringstream ss;
  ss << l;
  return ss.str();
}

inline void render_terms(std::ostream& os, const std::vector<Term>& ts) {
  for (const Term& t : ts) os << ' ' << t;
}

}  // namespace detail

inline std::string serialize(const DerivationTrace& trace) {
  std::ostringstream os;
  os << "(goals";
  for (const Literal& g : trace.goals) os << ' ' << g;
  os << ")\n(footprint";
  for (const Literal& f : trace.footprint) os << ' ' << f;
  os << ")\n(lifted " << (trace.lifted ? "yes" : "no") << ")\n";
  for (const DecisionRecord& r : trace.records) {
    os << "(record :name " << r.name << " :type " << to_text(r.type);
    if (r.type != DecisionType::StartNode)
      os << " :kind " << to_text(r.kind);
    if (r.kind == DecisionKind::NewStep) {
      os << " :new-step (" << r.created << " (" << r.schema;
      detail::render_terms(os, r.step_args);
      os << "))";
    }
    if (r.type == DecisionType::Establishment) {
      os << " :new-link (" << step_name(r.producer) << ' '
         << detail::render_literal(r.link_cond) << ' '
         << step_name(r.consumer) << ')';
      os << " :open-cond (" << detail::render_literal(r.open_cond) << ' '
         << step_name(r.open_consumer) << ')';
    }
    if (r.type == DecisionType::Resolution) {
      os << " :unsafe-link (" << step_name(r.threat_producer) << ' '
         << detail::render_literal(r.threat_cond) << ' '
         << step_name(r.threat_consumer) << ')';
      os << " :effect (" << step_name(r.clobberer) << ' '
         << detail::render_literal(r.clobber_effect) << ')';
    }
    if (r.kind == DecisionKind::NewStep) {
      os << " :siblings (";
      for (size_t i = 0; i < r.siblings.size(); ++i)
        os << (i ? " " : "") << r.siblings[i];
      os << ')';
    }
    os << ")\n";
  }
  return os.str();
}

namespace detail {

inline StepId parse_step_ref(const Sexpr& e) {
  const std::string& s = e.as_atom();
  if (s == "GOAL") return kGoalStep;
  return static_cast<StepId>(std::stoul(s));
}

inline Literal parse_trace_literal(const Sexpr& e) {
  return parse_literal(e, false, nullptr);
}

inline DecisionType parse_type(const std::string& s) {
  if (s == "START-NODE") return DecisionType::StartNode;
  if (s == "ESTABLISHMENT") return DecisionType::Establishment;
  if (s == "RESOLUTION") return DecisionType::Resolution;
  throw ParseError(0, 0, "unknown decision type " + s);
}

inline DecisionKind parse_kind(const std::string& s) {
  if (s == "NEW-STEP") return DecisionKind::NewStep;
  if (s == "NEW-LINK") return DecisionKind::NewLink;
  if (s == "PROMOTION") return DecisionKind::Promotion;
  if (s == "DEMOTION") return DecisionKind::Demotion;
  if (s == "NONE") return DecisionKind::None;
  throw ParseError(0, 0, "unknown decision kind " + s);
}

}  // namespace detail

inline DerivationTrace deserialize_trace(const std::string& text) {
  DerivationTrace trace;
  for (const Sexpr& form : parse_sexprs(text)) {
    if (!form.is_list() || form.size() == 0)
      throw ParseError(form.line, form.column, "malformed trace form");
    const std::string& head = form[0].as_atom();
    if (head == "goals") {
      for (size_t i = 1; i < form.size(); ++i)
        trace.goals.push_back(detail::parse_trace_literal(form[i]));
    } else if (head == "footprint") {
      for (size_t i = 1; i < form.size(); ++i)
        trace.footprint.push_back(detail::parse_trace_literal(form[i]));
    } else if (head == "lifted") {
      trace.lifted = form.size() > 1 && form[1].as_atom() == "yes";
    } else if (head == "record") {
      DecisionRecord r;
      for (size_t i = 1; i + 1 < form.size(); i += 2) {
        const std::string& key = form[i].as_atom();
        const Sexpr& val = form[i + 1];
        if (key == ":name") {
          r.name = val.as_atom();
        } else if (key == ":type") {
          r.type = detail::parse_type(val.as_atom());
        } else if (key == ":kind") {
          r.kind = detail::parse_kind(val.as_atom());
        } else if (key == ":new-step") {
          r.created = detail::parse_step_ref(val[0]);
          const Sexpr& inst = val[1];
          r.schema = inst[0].as_atom();
          for (size_t k = 1; k < inst.size(); ++k)
            r.step_args.push_back(Term::parse(inst[k].as_atom()));
        } else if (key == ":new-link") {
          r.producer = detail::parse_step_ref(val[0]);
          r.link_cond = detail::parse_trace_literal(val[1]);
          r.consumer = detail::parse_step_ref(val[2]);
        } else if (key == ":open-cond") {
          r.open_cond = detail::parse_trace_literal(val[0]);
          r.open_consumer = detail::parse_step_ref(val[1]);
        } else if (key == ":unsafe-link") {
          r.threat_producer = detail::parse_step_ref(val[0]);
          r.threat_cond = detail::parse_trace_literal(val[1]);
          r.threat_consumer = detail::parse_step_ref(val[2]);
        } else if (key == ":effect") {
          r.clobberer = detail::parse_step_ref(val[0]);
          r.clobber_effect = detail::parse_trace_literal(val[1]);
        } else if (key == ":siblings") {
          for (const Sexpr& s : val.items) r.siblings.push_back(s.str());
        } else {
          throw ParseError(form[i].line, form[i].column,
                           "unknown record key " + key);
        }
      }
      trace.records.push_back(std::move(r));
    } else {
      throw ParseError(form.line, form.column, "unknown trace form " + head);
    }
  }
  return trace;
}

}  // namespace replan

#endif  // REPLAN_TRACE_HPP
