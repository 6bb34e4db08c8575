#ifndef REPLAN_CASE_LIBRARY_HPP
#define REPLAN_CASE_LIBRARY_HPP

// Failure-driven case storage and retrieval.  Cases are lifted derivation
// traces indexed by goal and footprinted initial state; repairing cases hang
// beneath the case they repair and censor its retrieval whenever the
// attached failure reason holds in the new problem.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "replan/domain.hpp"
#include "replan/ebl.hpp"
#include "replan/replay.hpp"
#include "replan/search.hpp"
#include "replan/trace.hpp"

namespace replan {

struct CaseAnnotation {
  CaseFailureReason reason;
  std::string repair_id;
  Substitution bridge;  // this case's variables -> reason variables
};

struct Case {
  std::string id;
  DerivationTrace trace;  // lifted
  std::vector<CaseAnnotation> annotations;
  int repair_depth = 0;

  const std::vector<Literal>& goals() const { return trace.goals; }
  const std::vector<Literal>& footprint() const { return trace.footprint; }
};

struct RetrievedInstance {
  std::string case_id;
  Substitution subst;
  std::vector<size_t> covered;  // indices into the problem's goal list
  bool via_redirect = false;
};

struct RetrievalResult {
  std::vector<RetrievedInstance> instances;  // in replay order
  std::vector<size_t> uncovered;
};

enum class RetrievalMode { Static, Learning };

struct StoreResult {
  enum class Status { Stored, Duplicate, PrefixViolation, DepthLimit };
  Status status = Status::Stored;
  std::string id;
  bool stored() const { return status == Status::Stored; }
};

class CaseLibrary {
 public:
  explicit CaseLibrary(int repair_depth_limit = 4)
      : repair_depth_limit_(repair_depth_limit) {}

  size_t size() const { return cases_.size(); }
  const Case* find(const std::string& id) const {
    auto it = cases_.find(id);
    return it == cases_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, Case>& cases() const { return cases_; }

  // -------------------------------------------------------------------
  // Storage

  // Stores a fresh top-level case from a solution trace; the trace is
  // lifted over the goals it achieved.  No-op for an equivalent case.
  StoreResult store(const DerivationTrace& raw, const Domain& domain) {
    DerivationTrace lifted =
        raw.lifted ? raw : lift(raw, raw.goals, domain);
    return store_lifted(std::move(lifted), std::nullopt);
  }

  // Stores a repairing case beneath `failing_case`.  The recovery trace is
  // stripped to the dependency closure of the reason's interacting goals.
  // `reason_lift` maps episode terms to reason variables and `failing_subst`
  // maps the failing case's variables to episode terms.
  StoreResult store_repair(const DerivationTrace& recovery_raw,
                           const CaseFailureReason& reason,
                           const std::map<Term, Term>& reason_lift,
                           const std::string& failing_case,
                           const Substitution& failing_subst,
                           const Domain& domain) {
    auto parent = cases_.find(failing_case);
    if (parent == cases_.end())
      throw std::logic_error("unknown failing case " + failing_case);
    if (parent->second.repair_depth + 1 > repair_depth_limit_) {
      return {StoreResult::Status::DepthLimit, ""};
    }

    // The interacting goals, grounded back into the episode vocabulary.
    Substitution unlift;
    for (const auto& [term, var] : reason_lift) unlift[var] = term;
    std::vector<Literal> keep;
    for (const Literal& g : reason.goals) keep.push_back(substitute(unlift, g));

    DerivationTrace lifted = lift(recovery_raw, keep, domain);

    CaseAnnotation note;
    note.reason = reason;
    for (const auto& [var, episode_term] : failing_subst) {
      auto it = reason_lift.find(episode_term);
      if (it != reason_lift.end()) note.bridge[var] = it->second;
    }
    // Only initial-state conditions whose variables are anchored - through
    // the interacting goals or the failing case's own terms - can be
    // evaluated at retrieval time; the rest are dropped from the annotation.
    std::set<Term> anchored;
    for (const Literal& g : note.reason.goals)
      for (const Term& t : g.args) anchored.insert(t);
    for (const auto& [var, rvar] : note.bridge) anchored.insert(rvar);
    std::vector<Literal> checkable;
    for (const Literal& e : note.reason.init_conds) {
      bool ok = true;
      for (const Term& t : e.args)
        if (t.variable && !anchored.count(t)) ok = false;
      if (ok) checkable.push_back(e);
    }
    note.reason.init_conds = std::move(checkable);

    StoreResult r =
        store_lifted(std::move(lifted), parent->second.repair_depth + 1);
    if (r.status == StoreResult::Status::Stored ||
        r.status == StoreResult::Status::Duplicate) {
      // Annotate the failing case unless an equivalent annotation exists.
      note.repair_id = r.id;
      bool present = false;
      for (const CaseAnnotation& a : parent->second.annotations)
        if (a.repair_id == note.repair_id && a.reason == note.reason)
          present = true;
      if (!present) parent->second.annotations.push_back(std::move(note));
    }
    return r;
  }

  // -------------------------------------------------------------------
  // Retrieval

  RetrievalResult retrieve(const Problem& problem, RetrievalMode mode) const {
    RetrievalResult result;
    std::vector<bool> covered(problem.goals.size(), false);
    for (size_t gi = 0; gi < problem.goals.size(); ++gi) {
      if (covered[gi]) continue;
      auto cand = best_candidate(problem, gi, covered);
      if (!cand) {
        result.uncovered.push_back(gi);
        continue;
      }
      RetrievedInstance instance = *cand;
      if (mode == RetrievalMode::Learning) {
        int depth = 0;
        while (depth < repair_depth_limit_) {
          const Case& c = cases_.at(instance.case_id);
          std::optional<RetrievedInstance> redirected;
          for (const CaseAnnotation& note : c.annotations) {
            Substitution base;
            for (const auto& [cvar, rvar] : note.bridge) {
              auto bound = instance.subst.find(cvar);
              if (bound != instance.subst.end()) base[rvar] = bound->second;
            }
            if (!reason_holds(note.reason, problem, base)) continue;
            redirected = instantiate(note.repair_id, problem, gi, covered);
            if (redirected) break;
          }
          if (!redirected) break;
          redirected->via_redirect = true;
          instance = std::move(*redirected);
          ++depth;
        }
      }
      for (size_t j : instance.covered) covered[j] = true;
      result.instances.push_back(std::move(instance));
    }
    for (size_t gi = 0; gi < problem.goals.size(); ++gi)
      if (!covered[gi]) {
        bool listed = false;
        for (size_t u : result.uncovered) listed |= (u == gi);
        if (!listed) result.uncovered.push_back(gi);
      }
    return result;
  }

  std::vector<ReplayItem> to_items(const RetrievalResult& r) const {
    std::vector<ReplayItem> items;
    for (const RetrievedInstance& inst : r.instances)
      items.push_back({cases_.at(inst.case_id).trace, inst.subst,
                       inst.case_id});
    return items;
  }

  // -------------------------------------------------------------------
  // Invariant checks (used by the test suites)

  // No stored sequence may be a prefix of another at the same attachment
  // point, and a repairing case must diverge from the case it repairs.
  bool prefix_free() const {
    std::map<std::string, std::vector<const Case*>> buckets;
    for (const auto& [id, c] : cases_)
      buckets[attachment_key(c)].push_back(&c);
    for (const auto& [key, group] : buckets) {
      for (size_t i = 0; i < group.size(); ++i)
        for (size_t j = 0; j < group.size(); ++j)
          if (i != j && is_prefix(group[i]->trace, group[j]->trace))
            return false;
    }
    for (const auto& [id, c] : cases_)
      for (const CaseAnnotation& note : c.annotations) {
        const Case* repair = find(note.repair_id);
        if (repair && is_prefix(c.trace, repair->trace)) return false;
      }
    return true;
  }

  // Every annotation's repairing case covers its reason's goals.
  bool annotations_consistent() const {
    for (const auto& [id, c] : cases_) {
      for (const CaseAnnotation& note : c.annotations) {
        const Case* repair = find(note.repair_id);
        if (!repair) return false;
        if (repair->goals().size() < note.reason.goals.size()) return false;
        bool ok = match_all_distinct(note.reason.goals, repair->goals(), {},
                                     [](const Substitution&) { return true; });
        if (!ok) return false;
      }
    }
    return true;
  }

  // -------------------------------------------------------------------
  // Persistence: one file per case plus a manifest, atomic rename on write.

  void save(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& [id, c] : cases_)
      write_atomic(dir + "/" + id + ".case", serialize_case(c));
    std::ostringstream manifest;
    manifest << "(library :version 1 :next " << next_number_
             << " :repair-depth-limit " << repair_depth_limit_ << ")\n";
    manifest << "(cases";
    for (const auto& [id, c] : cases_) manifest << ' ' << id;
    manifest << ")\n";
    write_atomic(dir + "/manifest.rcl", manifest.str());
  }

  static CaseLibrary load(const std::string& dir) {
    namespace fs = std::filesystem;
    CaseLibrary lib;
    std::string manifest_path = dir + "/manifest.rcl";
    std::ifstream mf(manifest_path);
    if (!mf) throw std::runtime_error("no library manifest in " + dir);
    std::stringstream mbuf;
    mbuf << mf.rdbuf();
    std::vector<std::string> ids;
    for (const Sexpr& form : parse_sexprs(mbuf.str())) {
      const std::string& head = form[0].as_atom();
      if (head == "library") {
        for (size_t i = 1; i + 1 < form.size(); i += 2) {
          if (form[i].as_atom() == ":next")
            lib.next_number_ = std::stoi(form[i + 1].as_atom());
          if (form[i].as_atom() == ":repair-depth-limit")
            lib.repair_depth_limit_ = std::stoi(form[i + 1].as_atom());
        }
      } else if (head == "cases") {
        for (size_t i = 1; i < form.size(); ++i)
          ids.push_back(form[i].as_atom());
      }
    }
    for (const std::string& id : ids) {
      std::ifstream cf(dir + "/" + id + ".case");
      if (!cf) throw std::runtime_error("missing case file " + id);
      std::stringstream cbuf;
      cbuf << cf.rdbuf();
      Case c = parse_case(cbuf.str());
      lib.index(c);
      lib.cases_.emplace(c.id, std::move(c));
    }
    return lib;
  }

  int repair_depth_limit() const { return repair_depth_limit_; }

 private:
  static std::string goal_key(const Literal& g) {
    return g.pred_text() + "/" + std::to_string(g.args.size());
  }
  static std::string attachment_key(const Case& c) {
    if (c.repair_depth > 0) return "repair:" + std::to_string(c.repair_depth);
    std::set<std::string> keys;
    for (const Literal& g : c.goals()) keys.insert(goal_key(g));
    std::string out = "top:";
    for (const auto& k : keys) out += k + ";";
    return out;
  }

  // Record-sequence prefix test over the canonical serialized forms.
  static bool is_prefix(const DerivationTrace& a, const DerivationTrace& b) {
    if (a.records.size() >= b.records.size()) return false;
    for (size_t i = 0; i < a.records.size(); ++i)
      if (!(a.records[i] == b.records[i])) return false;
    return true;
  }

  StoreResult store_lifted(DerivationTrace lifted, std::optional<int> depth) {
    // Equivalent case already present?
    std::string body = serialize(lifted);
    for (const auto& [id, c] : cases_)
      if (serialize(c.trace) == body) return {StoreResult::Status::Duplicate,
                                              id};
    Case c;
    c.trace = std::move(lifted);
    c.repair_depth = depth.value_or(0);
    // Reject sequences that extend or shorten a stored case at the same
    // attachment point.
    for (const auto& [id, other] : cases_) {
      if (attachment_key(other) != attachment_key(c)) continue;
      if (is_prefix(other.trace, c.trace) || is_prefix(c.trace, other.trace))
        return {StoreResult::Status::PrefixViolation, id};
    }
    c.id = "c" + std::to_string(next_number_++);
    index(c);
    std::string id = c.id;
    cases_.emplace(id, std::move(c));
    return {StoreResult::Status::Stored, id};
  }

  void index(const Case& c) {
    if (c.repair_depth > 0) return;  // reachable only through annotations
    for (const Literal& g : c.goals()) net_[goal_key(g)].push_back(c.id);
  }

  // The best top-level case instance covering goal `gi`.
  std::optional<RetrievedInstance> best_candidate(
      const Problem& problem, size_t gi,
      const std::vector<bool>& covered) const {
    auto it = net_.find(goal_key(problem.goals[gi]));
    if (it == net_.end()) return std::nullopt;
    std::optional<RetrievedInstance> best;
    size_t best_footprint = 0;
    for (const std::string& id : it->second) {
      auto inst = instantiate(id, problem, gi, covered);
      if (!inst) continue;
      size_t fp = cases_.at(id).footprint().size();
      bool better = false;
      if (!best) {
        better = true;
      } else if (inst->covered.size() != best->covered.size()) {
        better = inst->covered.size() > best->covered.size();
      } else if (fp != best_footprint) {
        better = fp > best_footprint;
      } else {
        better = id < best->case_id;
      }
      if (better) {
        best = inst;
        best_footprint = fp;
      }
    }
    return best;
  }

  // Unifies the case's goals and footprint with the problem, requiring goal
  // `gi` to be among the covered goals.  Among the feasible instantiations
  // the one covering the most problem goals wins (first found on ties).
  std::optional<RetrievedInstance> instantiate(
      const std::string& id, const Problem& problem, size_t gi,
      const std::vector<bool>& /*covered*/) const {
    auto found = cases_.find(id);
    if (found == cases_.end()) return std::nullopt;
    const Case& c = found->second;
    std::optional<RetrievedInstance> out;
    match_all_distinct(c.goals(), problem.goals, {}, [&](const Substitution& s1) {
      // The target goal must be covered by this instance.
      std::set<size_t> covers;
      bool hits_target = false;
      for (const Literal& g : c.goals()) {
        Literal ground = substitute(s1, g);
        for (size_t j = 0; j < problem.goals.size(); ++j) {
          if (ground == problem.goals[j]) {
            covers.insert(j);
            if (j == gi) hits_target = true;
          }
        }
      }
      if (!hits_target) return false;
      if (out && covers.size() <= out->covered.size()) return false;
      match_all(c.footprint(), 0, problem.init, s1,
                [&](const Substitution& s2) {
                  RetrievedInstance inst;
                  inst.case_id = id;
                  inst.subst = s2;
                  inst.covered.assign(covers.begin(), covers.end());
                  out = std::move(inst);
                  return true;
                });
      // Keep searching until every goal assignment has been considered.
      return out && out->covered.size() == c.goals().size() &&
             covers.size() == c.goals().size();
    });
    return out;
  }

  // -------------------------------------------------------------------
  // Case file format

  static std::string serialize_case(const Case& c) {
    std::ostringstream os;
    os << "(case :id " << c.id << " :repair-depth " << c.repair_depth
       << ")\n";
    os << serialize(c.trace);
    for (const CaseAnnotation& a : c.annotations) {
      os << "(annotation :repair " << a.repair_id << " :sound "
         << (a.reason.sound ? "yes" : "no") << " :reason-goals (";
      for (size_t i = 0; i < a.reason.goals.size(); ++i)
        os << (i ? " " : "") << a.reason.goals[i];
      os << ") :reason-init (";
      for (size_t i = 0; i < a.reason.init_conds.size(); ++i)
        os << (i ? " " : "") << a.reason.init_conds[i];
      os << ") :bridge (";
      bool first = true;
      for (const auto& [v, r] : a.bridge) {
        os << (first ? "" : " ") << '(' << v << ' ' << r << ')';
        first = false;
      }
      os << "))\n";
    }
    return os.str();
  }

  static Case parse_case(const std::string& text) {
    Case c;
    std::vector<Sexpr> forms = parse_sexprs(text);
    std::ostringstream trace_text;
    for (const Sexpr& form : forms) {
      const std::string& head = form[0].as_atom();
      if (head == "case") {
        for (size_t i = 1; i + 1 < form.size(); i += 2) {
          if (form[i].as_atom() == ":id") c.id = form[i + 1].as_atom();
          if (form[i].as_atom() == ":repair-depth")
            c.repair_depth = std::stoi(form[i + 1].as_atom());
        }
      } else if (head == "annotation") {
        CaseAnnotation a;
        for (size_t i = 1; i + 1 < form.size(); i += 2) {
          const std::string& key = form[i].as_atom();
          const Sexpr& val = form[i + 1];
          if (key == ":repair") a.repair_id = val.as_atom();
          if (key == ":sound") a.reason.sound = val.as_atom() == "yes";
          if (key == ":reason-goals")
            for (const Sexpr& g : val.items)
              a.reason.goals.push_back(detail::parse_trace_literal(g));
          if (key == ":reason-init")
            for (const Sexpr& g : val.items)
              a.reason.init_conds.push_back(detail::parse_trace_literal(g));
          if (key == ":bridge")
            for (const Sexpr& pair : val.items)
              a.bridge[Term::parse(pair[0].as_atom())] =
                  Term::parse(pair[1].as_atom());
        }
        c.annotations.push_back(std::move(a));
      } else {
        trace_text << form.str() << "\n";
      }
    }
    c.trace = deserialize_trace(trace_text.str());
    return c;
  }

  static void write_atomic(const std::string& path, const std::string& body) {
    std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << body;
    }
    std::rename(tmp.c_str(), path.c_str());
  }

  std::map<std::string, std::vector<std::string>> net_;
  std::map<std::string, Case> cases_;
  int next_number_ = 1;
  int repair_depth_limit_ = 4;
};

// ---------------------------------------------------------------------------
// The deliberative training loop: single-goal subproblems first, then one
// extra goal at a time; repairs stored only when the replayed cases fail.

struct TrainOutcome {
  std::string problem;
  bool solved = false;
  size_t library_size_after = 0;
  int repairs_stored = 0;
};

struct TrainConfig {
  Strategy strategy = Strategy::BestFirst;
  SearchLimits limits;
  ReplayOptions replay;
  std::function<size_t(size_t)> step_bound_for_goals;  // optional per-size bound
};

// Attempts a problem through retrieval and adaptation, falling back to
// from-scratch search when the library offers nothing.
struct SolveResult {
  bool solved = false;
  bool sequenced = false;
  std::optional<AdaptOutcome> adapt_outcome;
  std::optional<SearchOutcome> search_outcome;
  RetrievalResult retrieval;
  double retrieval_s = 0;
  NodePtr leaf;
  std::vector<GroundAction> actions;
  long nodes = 0;
};

inline SolveResult solve_with_library(const Domain& domain,
                                      const Problem& problem,
                                      const CaseLibrary& library,
                                      RetrievalMode mode,
                                      const TrainConfig& cfg) {
  SolveResult r;
  SearchLimits limits = cfg.limits;
  if (cfg.step_bound_for_goals)
    limits.step_bound = cfg.step_bound_for_goals(problem.goals.size());
  auto t0 = std::chrono::steady_clock::now();
  r.retrieval = library.retrieve(problem, mode);
  r.retrieval_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (r.retrieval.instances.empty()) {
    r.search_outcome = search(domain, problem, cfg.strategy, limits);
    r.solved = r.search_outcome->solved();
    r.sequenced = false;
    if (r.solved) {
      r.leaf = r.search_outcome->leaf;
      r.actions = r.search_outcome->actions;
    }
    r.nodes = r.search_outcome->stats.expanded;
    return r;
  }
  std::vector<ReplayItem> items = library.to_items(r.retrieval);
  r.adapt_outcome =
      adapt(domain, problem, items, cfg.strategy, limits, cfg.replay);
  r.solved = r.adapt_outcome->solved();
  r.sequenced = r.adapt_outcome->status == AdaptOutcome::Status::Sequenced;
  if (r.solved) {
    r.leaf = r.adapt_outcome->leaf;
    r.actions = r.adapt_outcome->actions;
  }
  r.nodes = r.adapt_outcome->stats.expanded;
  return r;
}


inline TrainOutcome train_on_problem(const Domain& domain,
                                     const Problem& problem,
                                     CaseLibrary& library,
                                     const TrainConfig& cfg) {
  TrainOutcome out;
  out.problem = problem.name;
  out.solved = true;

  for (size_t upto = 1; upto <= problem.goals.size(); ++upto) {
    Problem sub = problem;
    sub.goals.assign(problem.goals.begin(), problem.goals.begin() + upto);
    SolveResult r =
        solve_with_library(domain, sub, library, RetrievalMode::Learning, cfg);
    if (!r.solved) {
      out.solved = false;
      break;
    }
    if (upto == 1) {
      // The case covering the first goal alone is stored when novel.
      library.store(extract_trace(r.leaf), domain);
      continue;
    }
    if (r.sequenced) continue;  // extension succeeded: store nothing
    if (r.adapt_outcome && r.adapt_outcome->failure_reason &&
        r.adapt_outcome->failing_item &&
        *r.adapt_outcome->failing_item < r.retrieval.instances.size()) {
      const RetrievedInstance& failing =
          r.retrieval.instances[*r.adapt_outcome->failing_item];
      StoreResult sr = library.store_repair(
          extract_trace(r.leaf), *r.adapt_outcome->failure_reason,
          r.adapt_outcome->reason_lift, failing.case_id, failing.subst,
          domain);
      if (sr.stored()) ++out.repairs_stored;
    }
  }
  out.library_size_after = library.size();
  return out;
}

}  // namespace replan

#endif  // REPLAN_CASE_LIBRARY_HPP
