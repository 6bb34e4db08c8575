// Acceptance suite: runs the property-based checks across the bundled
// domains and prints one line per criterion.

#include <cmath>
#include <deque>
#include <iostream>
#include <set>
#include <sstream>

#include "replan/bench.hpp"
#include "replan/case_library.hpp"
#include "replan/replay.hpp"
#include "replan/search.hpp"
#include "replan/trace.hpp"

using namespace replan;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": "
            << name;
  if (!detail.empty()) std::cout << " - " << detail;
  std::cout << std::endl;
  if (!pass) ++failures;
}

Literal lit(const std::string& pred, std::vector<std::string> args = {}) {
  std::vector<Term> terms;
  for (const auto& a : args) terms.push_back(Term::parse(a));
  return Literal(true, pred, std::move(terms));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string data(const std::string& rel) {
  return std::string(REPLAN_DATA_DIR) + "/" + rel;
}

DomainConfig logistics_cfg(int cities, int planes, int trucks, int packages) {
  DomainConfig cfg;
  cfg.kind = DomainConfig::Kind::Logistics;
  cfg.logistics.cities = cities;
  cfg.logistics.planes = planes;
  cfg.logistics.trucks = trucks;
  cfg.logistics.packages = packages;
  return cfg;
}

DomainConfig theta2_cfg(int m) {
  DomainConfig cfg;
  cfg.kind = DomainConfig::Kind::Theta2;
  cfg.theta2.m = m;
  return cfg;
}

DomainConfig blocks_cfg(int blocks) {
  DomainConfig cfg;
  cfg.kind = DomainConfig::Kind::Blocks;
  cfg.blocks.blocks = blocks;
  return cfg;
}

bool validate_plan(const Problem& p, const std::vector<GroundAction>& plan,
                   std::string* why) {
  State init(p.init.begin(), p.init.end());
  ExecutionResult r = execute(plan, init);
  if (!r.ok()) {
    *why = "execution failed: " + r.failure->reason;
    return false;
  }
  if (!entails(*r.final_state, p.goals)) {
    *why = "goals not entailed";
    return false;
  }
  return true;
}

// --------------------------------------------------------------------------
// 1. Soundness suite

void criterion_soundness() {
  struct Config {
    DomainConfig cfg;
    int count;
  };
  std::vector<Config> configs = {
      {logistics_cfg(3, 2, 3, 5), 70},
      {theta2_cfg(5), 70},
      {blocks_cfg(5), 60},
  };
  int checked = 0, violations = 0, solved = 0;
  std::string detail;
  std::uint64_t seed = 1000;
  for (const Config& c : configs) {
    Domain domain = build_domain(c.cfg);
    CaseLibrary library;
    TrainConfig cfg;
    cfg.limits.node_budget = 8000;
    cfg.step_bound_for_goals = [&](size_t goals) {
      return default_step_bound(c.cfg, goals);
    };
    int max_goals = c.cfg.kind == DomainConfig::Kind::Blocks ? 3 : 4;
    for (int i = 0; i < c.count; ++i) {
      int goals = 1 + static_cast<int>(seed % max_goals);
      Problem p = generate_problem(c.cfg, goals, seed++);
      ++checked;
      // A little training keeps the replay modes exercised.
      if (i % 7 == 0) train_on_problem(domain, p, library, cfg);
      for (const char* mode : {"scratch", "static", "learning"}) {
        std::vector<GroundAction> plan;
        bool ok = false;
        if (std::string(mode) == "scratch") {
          SearchLimits limits = cfg.limits;
          limits.step_bound = default_step_bound(c.cfg, p.goals.size());
          SearchOutcome out = search(domain, p, Strategy::BestFirst, limits);
          ok = out.solved();
          plan = out.actions;
        } else {
          RetrievalMode rm = std::string(mode) == "static"
                                 ? RetrievalMode::Static
                                 : RetrievalMode::Learning;
          SolveResult r = solve_with_library(domain, p, library, rm, cfg);
          ok = r.solved;
          plan = r.actions;
        }
        if (!ok) continue;
        ++solved;
        std::string why;
        if (!validate_plan(p, plan, &why)) {
          ++violations;
          if (detail.empty()) detail = p.name + " (" + mode + "): " + why;
        }
      }
    }
  }
  std::ostringstream ss;
  ss << checked << " problems, " << solved << " solutions validated, "
     << violations << " violations" << (detail.empty() ? "" : "; " + detail);
  report(1, "soundness suite", violations == 0 && checked >= 200, ss.str());
}

// --------------------------------------------------------------------------
// 2. Completeness against exhaustive breadth-first enumeration

bool bfs_solvable(const Domain& domain, const Problem& p, size_t bound,
                  size_t cap, bool* capped) {
  std::deque<PartialPlan> frontier{make_null_plan(p)};
  size_t visited = 0;
  while (!frontier.empty()) {
    if (++visited > cap) {
      *capped = true;
      return false;
    }
    PartialPlan plan = std::move(frontier.front());
    frontier.pop_front();
    std::vector<Flaw> flaws = detect_flaws(plan);
    if (flaws.empty()) return true;
    for (Child& c : refine(plan, domain, flaws.front())) {
      if (!c.consistency.ok()) continue;
      if (c.plan.real_step_count() > bound) continue;
      frontier.push_back(std::move(c.plan));
    }
  }
  return false;
}

void criterion_completeness() {
  struct Config {
    DomainConfig cfg;
    int count;
  };
  std::vector<Config> configs = {
      {theta2_cfg(3), 20},
      {blocks_cfg(3), 15},
      {logistics_cfg(2, 1, 0, 2), 15},
  };
  configs[2].cfg.logistics.plane_only = true;
  int disagreements = 0, compared = 0, capped_out = 0;
  std::uint64_t seed = 2000;
  for (const Config& c : configs) {
    Domain domain = build_domain(c.cfg);
    for (int i = 0; i < c.count; ++i) {
      int goals = 1 + static_cast<int>(seed % 2);
      Problem p = generate_problem(c.cfg, goals, seed++);
      SearchLimits limits;
      limits.step_bound = 6;
      limits.node_budget = 2000000;
      bool capped = false;
      bool oracle = bfs_solvable(domain, p, limits.step_bound, 400000,
                                 &capped);
      if (capped) {
        ++capped_out;
        continue;
      }
      ++compared;
      SearchOutcome out = search(domain, p, Strategy::BestFirst, limits);
      if (out.solved() != oracle) ++disagreements;
    }
  }
  std::ostringstream ss;
  ss << compared << " problems compared, " << disagreements
     << " disagreements";
  if (capped_out) ss << " (" << capped_out << " oracle runs skipped by cap)";
  report(2, "completeness matches breadth-first enumeration",
         disagreements == 0 && compared >= 50, ss.str());
}

// --------------------------------------------------------------------------
// 3. Systematicity

void criterion_systematicity() {
  struct Config {
    DomainConfig cfg;
    int count;
  };
  std::vector<Config> configs = {
      {theta2_cfg(5), 10},
      {blocks_cfg(4), 10},
      {logistics_cfg(2, 1, 2, 3), 10},
  };
  int duplicates = 0, problems = 0;
  std::uint64_t seed = 3000;
  for (const Config& c : configs) {
    Domain domain = build_domain(c.cfg);
    for (int i = 0; i < c.count; ++i) {
      int goals = 1 + static_cast<int>(seed % 3);
      Problem p = generate_problem(c.cfg, goals, seed++);
      ++problems;
      std::set<std::string> seen;
      bool dup = false;
      SearchLimits limits;
      limits.step_bound = default_step_bound(c.cfg, p.goals.size());
      limits.node_budget = 5000;
      SearchStats stats;
      long nodes = 0;
      Searcher searcher(domain, limits, Strategy::BestFirst,
                        RefineMode::Scratch, &nodes, &stats);
      searcher.set_expansion_hook([&](const Node& n) {
        if (!seen.insert(canonical_form(n.plan)).second) dup = true;
      });
      searcher.run({make_root(p)});
      if (dup) ++duplicates;
    }
  }
  std::ostringstream ss;
  ss << problems << " searches, " << duplicates
     << " with duplicate constraint sets";
  report(3, "systematicity", duplicates == 0 && problems >= 30, ss.str());
}

// --------------------------------------------------------------------------
// 4. Golden derivation trace

void criterion_golden_trace() {
  auto [domain, problem] = parse_domain_and_problem(
      read_file(data("domains/logistics.domain")),
      read_file(data("problems/fig-single-goal.problem")));
  SearchLimits limits;
  limits.step_bound = 6;
  SearchOutcome out = search(domain, problem, Strategy::BestFirst, limits);
  bool ok = out.solved() && out.actions.size() == 4;
  std::string detail;
  if (!ok) {
    detail = "expected a 4-step solution";
  } else {
    DerivationTrace t = extract_trace(out.leaf);
    int unload_steps = 0, fly_steps = 0, promotions = 0;
    for (const auto& r : t.records) {
      if (r.kind == DecisionKind::NewStep && r.schema == "UNLOAD-PLANE")
        ++unload_steps;
      if (r.kind == DecisionKind::NewStep && r.schema == "FLY-PLANE")
        ++fly_steps;
      if (r.kind == DecisionKind::Promotion) ++promotions;
    }
    ok = unload_steps == 1 && fly_steps == 2 && promotions == 1;
    DerivationTrace golden =
        deserialize_trace(read_file(data("traces/single-goal.trace")));
    ok = ok && golden == t;
    std::ostringstream ss;
    ss << "4-step plan; " << unload_steps << " unload / " << fly_steps
       << " fly additions, " << promotions
       << " promotion; matches the bundled trace";
    detail = ss.str();
  }
  report(4, "golden single-goal trace", ok, detail);
}

// --------------------------------------------------------------------------
// 5 & 6. Chain-domain replay reproduction and node ordering

void criteria_theta2(ExperimentResult* out_result) {
  ExperimentSpec spec =
      parse_experiment(read_file(data("experiments/theta2.exp")));
  ExperimentResult result = run_experiment(spec);
  *out_result = result;

  bool seq_ok = true, count_ok = true;
  std::ostringstream seq_ss, node_ss;
  for (int phase : spec.phases) {
    double learn_seq = -1, static_seq = -1;
    long learn = 0, stat = 0, scratch = 0;
    int learn_solved = 0, problems = 0;
    for (const PhaseAggregate& a : result.aggregates) {
      if (a.phase != phase) continue;
      if (a.mode == "learning") {
        learn_seq = a.seq_pct;
        learn = a.nodes;
        learn_solved = a.solved;
        problems = a.problems;
      } else if (a.mode == "static") {
        static_seq = a.seq_pct;
        stat = a.nodes;
      } else {
        scratch = a.nodes;
      }
    }
    if (problems != spec.test_problems || learn_solved != problems)
      seq_ok = false;
    if (learn_seq != 100.0 || static_seq != 0.0) seq_ok = false;
    seq_ss << " p" << phase << ":" << learn_seq << "/" << static_seq;
    if (!(learn <= stat && stat <= scratch)) count_ok = false;
    // Phases testing three and four goals carry the 2x floor.
    if (phase >= 2 && 2 * learn > scratch) count_ok = false;
    node_ss << " p" << phase << ":" << learn << "<=" << stat
            << "<=" << scratch;
  }
  report(5, "chain replay: learning 100% / static 0% sequenced", seq_ok,
         "seq%" + seq_ss.str());
  report(6, "node-count ordering with 2x floor", count_ok, node_ss.str());
}

// --------------------------------------------------------------------------
// 7. The off-route failure reason

void criterion_failure_reason() {
  LogisticsConfig air;
  air.plane_only = true;
  air.route_restricted = true;
  Domain domain = *parse_input(logistics_domain_text(air)).domain;

  Problem one;
  one.name = "one-package";
  one.init = {lit("IS-A", {"AIRPORT", "l_p"}), lit("IS-A", {"AIRPORT", "l_1"}),
              lit("IS-A", {"AIRPORT", "l_d"}), lit("IS-A", {"AIRPORT", "l_2"}),
              lit("AT-PL", {"PL1", "l_p"}), lit("AT-OB", {"OB1", "l_1"})};
  one.goals = {lit("AT-OB", {"OB1", "l_d"})};

  CaseLibrary library;
  TrainConfig cfg;
  cfg.limits.step_bound = 6;
  train_on_problem(domain, one, library, cfg);

  Problem two = one;
  two.name = "two-package";
  two.init.push_back(lit("AT-OB", {"OB2", "l_2"}));
  two.goals.push_back(lit("AT-OB", {"OB2", "l_d"}));

  // The previous case is replayed for the goal it covers; the extra package
  // is off the old route.
  Problem first_goal = two;
  first_goal.goals = {two.goals[0]};
  RetrievalResult r = library.retrieve(first_goal, RetrievalMode::Learning);
  bool ok = r.instances.size() == 1;
  std::string detail = "case not retrieved";
  if (ok) {
    SearchLimits limits;
    limits.step_bound = 7;
    AdaptOutcome out = adapt(domain, two, library.to_items(r),
                             Strategy::BestFirst, limits);
    ok = out.status == AdaptOutcome::Status::Recovered &&
         out.failure_reason.has_value();
    if (!ok) {
      detail = "expected a recovered outcome with a reason";
    } else {
      const CaseFailureReason& reason = *out.failure_reason;
      // C: both transport goals to one destination.
      bool c_ok = reason.goals.size() == 2 &&
                  reason.goals[0].pred_text() == "AT-OB" &&
                  reason.goals[1].pred_text() == "AT-OB" &&
                  reason.goals[0].args[1] == reason.goals[1].args[1] &&
                  reason.goals[0].args[0] != reason.goals[1].args[0];
      // E: not-at-destination and not-inside-a-plane for the extra package,
      // plus at most the two route positions.
      Term extra, dest = reason.goals[0].args[1];
      for (const Literal& e : reason.init_conds)
        if (e.pred_text() == "INSIDE-PL") extra = e.args[0];
      bool has_dest = false, has_inside = false, junk = false;
      int at_ob = 0;
      for (const Literal& e : reason.init_conds) {
        if (e.positive) junk = true;
        if (e.pred_text() == "INSIDE-PL" && e.args[0] == extra)
          has_inside = true;
        else if (e.pred_text() == "AT-OB" && e.args[0] == extra) {
          ++at_ob;
          if (e.args[1] == dest) has_dest = true;
        } else {
          junk = true;
        }
      }
      bool e_ok = has_dest && has_inside && !junk && at_ob <= 3 &&
                  reason.init_conds.size() <= 4;
      ok = c_ok && e_ok;
      std::ostringstream ss;
      ss << "C has both goals, E has " << reason.init_conds.size()
         << " negated conditions including not-at-destination and "
            "not-inside-plane";
      detail = ss.str();
    }
  }
  report(7, "off-route failure reason", ok, detail);
}

// --------------------------------------------------------------------------
// 8, 9 & 11. Library bound, censoring oracle, library invariants

Problem chain_problem(const std::vector<std::string>& init,
                      const std::vector<std::string>& goals) {
  Problem p;
  for (const auto& i : init) p.init.push_back(lit(i));
  for (const auto& g : goals) p.goals.push_back(lit(g));
  return p;
}

void criteria_library(bool* invariants_ok, std::string* invariant_detail) {
  const int m = 5;
  Domain domain = *parse_input(theta2_domain_text(m)).domain;
  CaseLibrary library;
  TrainConfig cfg;
  cfg.step_bound_for_goals = [](size_t goals) { return goals + 1; };

  auto check_invariants = [&](const char* where) {
    if (!library.prefix_free()) {
      *invariants_ok = false;
      if (invariant_detail->empty())
        *invariant_detail = std::string("prefix violation after ") + where;
    }
    if (!library.annotations_consistent()) {
      *invariants_ok = false;
      if (invariant_detail->empty())
        *invariant_detail = std::string("annotation violation after ") + where;
    }
  };

  // Single-goal seeding, then every 2- and 3-goal problem with the wipe goal.
  std::vector<std::string> full = {"I1", "I2", "I3", "I4", "I5", "PA", "PB"};
  for (int i = 1; i <= m; ++i) {
    train_on_problem(domain,
                     chain_problem({"I" + std::to_string(i), "PB"},
                                   {"G" + std::to_string(i)}),
                     library, cfg);
    check_invariants("single-goal training");
  }
  train_on_problem(domain, chain_problem({}, {"GA"}), library, cfg);
  for (int i = 1; i <= m; ++i) {
    train_on_problem(domain,
                     chain_problem(full, {"GA", "G" + std::to_string(i)}),
                     library, cfg);
    check_invariants("pair training");
  }
  for (int i = 1; i <= m; ++i) {
    for (int j = i + 1; j <= m; ++j) {
      train_on_problem(
          domain,
          chain_problem(full, {"GA", "G" + std::to_string(i),
                               "G" + std::to_string(j)}),
          library, cfg);
      check_invariants("triple training");
    }
  }
  std::ostringstream ss;
  ss << "library holds " << library.size() << " cases (bound "
     << 2 * m + 1 << ")";
  report(8, "library bound after exhaustive pair/triple training",
         library.size() <= static_cast<size_t>(2 * m + 1), ss.str());

  // Censoring oracle: sound reasons must predict replay failure.
  int holds_checked = 0, sequenced_anyway = 0;
  std::uint64_t seed = 4000;
  DomainConfig dcfg = theta2_cfg(m);
  while (holds_checked < 20 && seed < 4400) {
    Problem p = generate_problem(dcfg, 2 + static_cast<int>(seed % 2), seed);
    ++seed;
    for (const auto& [id, c] : library.cases()) {
      for (const CaseAnnotation& note : c.annotations) {
        if (!note.reason.sound) continue;
        // Instantiate the censored case for some goal of the problem.
        for (size_t gi = 0; gi < p.goals.size(); ++gi) {
          RetrievalResult probe;
          Problem sub = p;
          sub.goals = {p.goals[gi]};
          RetrievalResult rr = library.retrieve(sub, RetrievalMode::Static);
          if (rr.instances.size() != 1 || rr.instances[0].case_id != id)
            continue;
          Substitution base;
          for (const auto& [cvar, rvar] : note.bridge) {
            auto bound = rr.instances[0].subst.find(cvar);
            if (bound != rr.instances[0].subst.end())
              base[rvar] = bound->second;
          }
          if (!reason_holds(note.reason, p, base)) continue;
          ++holds_checked;
          std::vector<ReplayItem> items = library.to_items(rr);
          SearchLimits limits;
          limits.step_bound = p.goals.size() + 1;
          AdaptOutcome out =
              adapt(domain, p, items, Strategy::BestFirst, limits);
          if (out.status == AdaptOutcome::Status::Sequenced)
            ++sequenced_anyway;
        }
      }
    }
  }
  std::ostringstream ss9;
  ss9 << holds_checked << " holding reasons tested, " << sequenced_anyway
      << " sequenced anyway";
  report(9, "censoring oracle on sound reasons",
         holds_checked >= 20 && sequenced_anyway == 0, ss9.str());
}

// --------------------------------------------------------------------------
// 10. Merging quality

void criterion_merging() {
  // (a) Mean solution length with the skip rule vs without it.
  DomainConfig cfg = logistics_cfg(3, 2, 3, 6);
  cfg.logistics.same_destination = true;
  Domain domain = build_domain(cfg);

  CaseLibrary library;
  TrainConfig tcfg;
  tcfg.limits.node_budget = 20000;
  tcfg.step_bound_for_goals = [&](size_t goals) {
    return default_step_bound(cfg, goals);
  };
  std::uint64_t seed = 5000;
  for (int t = 0; t < 8; ++t) {
    Problem p = generate_problem(cfg, 1, seed++);
    p.name = "merge-train-" + std::to_string(t);
    train_on_problem(domain, p, library, tcfg);
  }

  double with_ij = 0, without_ij = 0;
  int solved_both = 0;
  for (int t = 0; t < 20; ++t) {
    Problem p = generate_problem(cfg, 3, seed++);
    p.name = "merge-test-" + std::to_string(t);
    RetrievalResult rr = library.retrieve(p, RetrievalMode::Learning);
    if (rr.instances.empty()) continue;
    SearchLimits limits = tcfg.limits;
    limits.step_bound = default_step_bound(cfg, p.goals.size());
    ReplayOptions ij_on, ij_off;
    ij_off.increased_justification = false;
    AdaptOutcome a = adapt(domain, p, library.to_items(rr),
                           Strategy::BestFirst, limits, ij_on);
    AdaptOutcome b = adapt(domain, p, library.to_items(rr),
                           Strategy::BestFirst, limits, ij_off);
    if (a.solved() && b.solved()) {
      ++solved_both;
      with_ij += static_cast<double>(a.actions.size());
      without_ij += static_cast<double>(b.actions.size());
    }
  }
  bool mean_ok = solved_both >= 10 && with_ij <= without_ij;

  // (b) The three-package scenario with the stored repairing case: the
  // merged plan flies each leg exactly once.
  LogisticsConfig air;
  air.plane_only = true;
  air.route_restricted = true;
  Domain route_domain = *parse_input(logistics_domain_text(air)).domain;
  CaseLibrary route_lib;
  TrainConfig rcfg;
  rcfg.step_bound_for_goals = [](size_t goals) { return 3 + 4 * goals; };
  Problem one;
  one.name = "route-one";
  one.init = {lit("IS-A", {"AIRPORT", "l_p"}), lit("IS-A", {"AIRPORT", "l_1"}),
              lit("IS-A", {"AIRPORT", "l_d"}), lit("IS-A", {"AIRPORT", "l_2"}),
              lit("AT-PL", {"PL1", "l_p"}), lit("AT-OB", {"OB1", "l_1"})};
  one.goals = {lit("AT-OB", {"OB1", "l_d"})};
  train_on_problem(route_domain, one, route_lib, rcfg);
  Problem two = one;
  two.name = "route-two";
  two.init.push_back(lit("AT-OB", {"OB2", "l_2"}));
  two.goals.push_back(lit("AT-OB", {"OB2", "l_d"}));
  train_on_problem(route_domain, two, route_lib, rcfg);

  Problem three = two;
  three.name = "route-three";
  three.init.push_back(lit("AT-OB", {"OB3", "l_1"}));
  three.goals.push_back(lit("AT-OB", {"OB3", "l_d"}));
  RetrievalResult rr = route_lib.retrieve(three, RetrievalMode::Learning);
  bool scenario_ok = rr.instances.size() == 2 &&
                     rr.instances[0].case_id == rr.instances[1].case_id &&
                     rr.instances[0].via_redirect;
  std::string detail;
  if (!scenario_ok) {
    detail = "expected two instances of the repairing case";
  } else {
    SearchLimits limits;
    limits.step_bound = 12;
    AdaptOutcome out = adapt(route_domain, three, route_lib.to_items(rr),
                             Strategy::BestFirst, limits);
    scenario_ok = out.solved();
    std::map<std::string, int> legs;
    for (const GroundAction& a : out.actions)
      if (a.name == "FLY-PLANE")
        legs[a.args[1].text() + ">" + a.args[2].text()]++;
    for (const auto& [leg, n] : legs) scenario_ok &= (n == 1);
    scenario_ok &= legs.size() == 3;  // l_p -> first stop -> second -> l_d
    std::ostringstream ss;
    ss << "mean length " << (solved_both ? with_ij / solved_both : 0)
       << " (skip rule) vs " << (solved_both ? without_ij / solved_both : 0)
       << " over " << solved_both << " problems; merged plan flies "
       << legs.size() << " legs once each";
    detail = ss.str();
  }
  report(10, "merging quality", mean_ok && scenario_ok, detail);
}

// --------------------------------------------------------------------------
// 11. Retrieval partition invariant (prefix-freeness is tracked during the
// library criterion's training run)

void criterion_invariants(bool training_invariants_ok,
                          const std::string& training_detail) {
  // Partition: covered plus uncovered goals equal the problem goals on a
  // spread of retrievals.
  const int m = 5;
  Domain domain = *parse_input(theta2_domain_text(m)).domain;
  CaseLibrary library;
  TrainConfig cfg;
  cfg.step_bound_for_goals = [](size_t goals) { return goals + 1; };
  for (int i = 1; i <= m; ++i)
    train_on_problem(domain,
                     chain_problem({"I" + std::to_string(i), "PB"},
                                   {"G" + std::to_string(i)}),
                     library, cfg);
  train_on_problem(domain, chain_problem({}, {"GA"}), library, cfg);

  bool partition_ok = true;
  DomainConfig dcfg = theta2_cfg(m);
  for (std::uint64_t seed = 6000; seed < 6040; ++seed) {
    Problem p = generate_problem(dcfg, 1 + static_cast<int>(seed % 4), seed);
    for (RetrievalMode mode : {RetrievalMode::Static,
                               RetrievalMode::Learning}) {
      RetrievalResult r = library.retrieve(p, mode);
      std::set<size_t> seen(r.uncovered.begin(), r.uncovered.end());
      for (const RetrievedInstance& inst : r.instances)
        for (size_t j : inst.covered) seen.insert(j);
      if (seen.size() != p.goals.size()) partition_ok = false;
    }
  }
  std::string detail = training_detail;
  if (detail.empty())
    detail = "prefix-freeness held across training; retrieval partitions "
             "exact on 80 retrievals";
  report(11, "library invariants", training_invariants_ok && partition_ok,
         detail);
}

// --------------------------------------------------------------------------
// 12. Scaling trend on the smaller logistics domain

void criterion_scaling() {
  ExperimentSpec spec =
      parse_experiment(read_file(data("experiments/logistics3.exp")));
  ExperimentResult result = run_experiment(spec);
  bool ok = true;
  int last_phase = spec.phases.back();
  std::ostringstream ss;
  for (int phase : spec.phases) {
    int learn = -1, scratch = -1;
    for (const PhaseAggregate& a : result.aggregates) {
      if (a.phase != phase) continue;
      if (a.mode == "learning") learn = a.solved;
      if (a.mode == "scratch") scratch = a.solved;
    }
    if (learn < scratch) ok = false;
    if (phase == last_phase && learn <= scratch) ok = false;
    ss << " p" << phase << ":" << learn << "/" << scratch;
  }
  report(12, "replay raises the solving horizon", ok,
         "solved learning/scratch" + ss.str());
}

}  // namespace

int main() {
  criterion_soundness();
  criterion_completeness();
  criterion_systematicity();
  criterion_golden_trace();
  ExperimentResult theta2_result;
  criteria_theta2(&theta2_result);
  criterion_failure_reason();
  bool invariants_ok = true;
  std::string invariant_detail;
  criteria_library(&invariants_ok, &invariant_detail);
  criterion_merging();
  criterion_invariants(invariants_ok, invariant_detail);
  criterion_scaling();
  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) +
                                    " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
