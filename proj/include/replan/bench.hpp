#ifndef REPLAN_BENCH_HPP
#define REPLAN_BENCH_HPP

// Benchmark harness: bundled domain generators, random problem generation,
// the scratch/static/learning experiment protocols and CSV emission.

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "replan/case_library.hpp"
#include "replan/domain.hpp"
#include "replan/replay.hpp"
#include "replan/search.hpp"

namespace replan {

// Deterministic splitmix64; problem generation must not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  size_t below(size_t n) { return n ? static_cast<size_t>(next() % n) : 0; }
  bool chance(int percent) { return below(100) < static_cast<size_t>(percent); }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Domain configurations

struct LogisticsConfig {
  int cities = 6;
  int planes = 6;
  int trucks = 6;
  int packages = 8;
  bool route_restricted = false;  // flights consume the airport token
  bool plane_only = false;        // no trucks or post offices
  bool same_destination = false;  // all goals target one airport
};

struct Theta2Config {
  int m = 5;
  bool force_wipe_goal = true;  // every generated goal set contains (GA)
};

struct BlocksConfig {
  int blocks = 6;
};

struct DomainConfig {
  enum class Kind { Logistics, Theta2, Blocks };
  Kind kind = Kind::Logistics;
  LogisticsConfig logistics;
  Theta2Config theta2;
  BlocksConfig blocks;
};

// ---------------------------------------------------------------------------
// Domain texts

inline std::string logistics_domain_text(const LogisticsConfig& cfg) {
  std::ostringstream os;
  os << "(define (domain logistics)\n";
  if (!cfg.plane_only) {
    os << "  (:action LOAD-TRUCK :parameters (?O ?T ?L)"
          " :precondition ((AT-OB ?O ?L) (AT-TR ?T ?L))"
          " :add ((INSIDE-TR ?O ?T)) :delete ((AT-OB ?O ?L)))\n";
  }
  os << "  (:action LOAD-PLANE :parameters (?O ?P ?L)"
        " :precondition ((AT-OB ?O ?L) (AT-PL ?P ?L))"
        " :add ((INSIDE-PL ?O ?P)) :delete ((AT-OB ?O ?L)))\n";
  if (!cfg.plane_only) {
    os << "  (:action UNLOAD-TRUCK :parameters (?O ?T ?L)"
          " :precondition ((INSIDE-TR ?O ?T) (AT-TR ?T ?L))"
          " :add ((AT-OB ?O ?L)) :delete ((INSIDE-TR ?O ?T)))\n";
  }
  os << "  (:action UNLOAD-PLANE :parameters (?O ?P ?L)"
        " :precondition ((INSIDE-PL ?O ?P) (AT-PL ?P ?L))"
        " :add ((AT-OB ?O ?L)) :delete ((INSIDE-PL ?O ?P)))\n";
  if (!cfg.plane_only) {
    os << "  (:action DRIVE-TRUCK :parameters (?T ?Li ?Lg)"
          " :precondition ((AT-TR ?T ?Li) (SAME-CITY ?Li ?Lg))"
          " :add ((AT-TR ?T ?Lg)) :delete ((AT-TR ?T ?Li))"
          " :equals ((not (?Li ?Lg))))\n";
  }
  os << "  (:action FLY-PLANE :parameters (?P ?Li ?Lg)"
        " :precondition ((IS-A AIRPORT ?Lg) (AT-PL ?P ?Li))"
        " :add ((AT-PL ?P ?Lg))"
        " :delete ((AT-PL ?P ?Li)";
  if (cfg.route_restricted) os << " (IS-A AIRPORT ?Lg)";
  os << ") :equals ((not (?Li ?Lg)))))\n";
  return os.str();
}

// The B-route achievers come first: an uninformed search tries the route
// that the wipe goal later invalidates before the safe one.
inline std::string theta2_domain_text(int m) {
  std::ostringstream os;
  os << "(define (domain theta2-m" << m << ")\n";
  for (int i = 1; i <= m; ++i) {
    for (const char* route : {"B", "A"}) {
      os << "  (:action A" << i << "-" << route << " :parameters ()"
         << " :precondition ((I" << i << ") (P" << route << "))"
         << " :add ((G" << i << ")) :delete (";
      for (int j = 1; j < i; ++j) os << (j > 1 ? " " : "") << "(I" << j << ")";
      os << "))\n";
    }
  }
  os << "  (:action AA :parameters () :precondition () :add ((GA))"
     << " :delete ((PB)";
  for (int i = 1; i <= m; ++i) os << " (G" << i << ")";
  os << ")))\n";
  return os.str();
}

inline std::string blocks_domain_text() {
  return "(define (domain blocksworld)\n"
         "  (:action Put-On :parameters (?X ?Y ?Z)"
         " :precondition ((On ?X ?Z) (Clear ?X) (Clear ?Y))"
         " :add ((On ?X ?Y) (Clear ?Z)) :delete ((On ?X ?Z) (Clear ?Y)))\n"
         "  (:action New-Tower :parameters (?X ?Z)"
         " :precondition ((On ?X ?Z) (Clear ?X))"
         " :add ((On ?X Table) (Clear ?Z)) :delete ((On ?X ?Z))))\n";
}

inline Domain build_domain(const DomainConfig& cfg) {
  switch (cfg.kind) {
    case DomainConfig::Kind::Logistics:
      return *parse_input(logistics_domain_text(cfg.logistics)).domain;
    case DomainConfig::Kind::Theta2:
      return *parse_input(theta2_domain_text(cfg.theta2.m)).domain;
    case DomainConfig::Kind::Blocks:
      return *parse_input(blocks_domain_text()).domain;
  }
  throw std::logic_error("unknown domain kind");
}

// ---------------------------------------------------------------------------
// Problem generation

namespace detail {

inline Literal glit(const std::string& pred,
                    std::vector<std::string> args = {}) {
  std::vector<Term> terms;
  for (const auto& a : args) terms.push_back(Term::constant(a));
  return Literal(true, pred, std::move(terms));
}

}  // namespace detail

// Random logistics problem.  The city layout is fixed filter structure; each
// package, plane and truck gets exactly one location (trucks stay in their
// home city); goals are achievable package positions.
inline Problem generate_logistics(const LogisticsConfig& cfg, int n_goals,
                                  Rng& rng) {
  using detail::glit;
  Problem p;
  std::vector<std::string> airports, offices, locations;
  for (int c = 1; c <= cfg.cities; ++c) {
    std::string ap = "AP" + std::to_string(c);
    airports.push_back(ap);
    p.init.push_back(glit("IS-A", {"AIRPORT", ap}));
    locations.push_back(ap);
    if (!cfg.plane_only) {
      std::string po = "PO" + std::to_string(c);
      offices.push_back(po);
      locations.push_back(po);
      p.init.push_back(glit("SAME-CITY", {ap, po}));
      p.init.push_back(glit("SAME-CITY", {po, ap}));
    }
  }
  for (int k = 1; k <= cfg.planes; ++k)
    p.init.push_back(glit(
        "AT-PL", {"PL" + std::to_string(k), airports[rng.below(airports.size())]}));
  if (!cfg.plane_only) {
    for (int k = 1; k <= cfg.trucks; ++k) {
      int city = (k - 1) % cfg.cities;
      std::string loc = rng.chance(50) ? airports[city] : offices[city];
      p.init.push_back(glit("AT-TR", {"TR" + std::to_string(k), loc}));
    }
  }
  std::vector<std::string> origin(cfg.packages);
  for (int k = 1; k <= cfg.packages; ++k) {
    origin[k - 1] = locations[rng.below(locations.size())];
    p.init.push_back(glit("AT-OB", {"OB" + std::to_string(k), origin[k - 1]}));
  }
  if (n_goals > cfg.packages)
    throw std::invalid_argument("more goals than packages");
  // Distinct packages, random targets distinct from their origins.
  std::vector<int> order(cfg.packages);
  for (int i = 0; i < cfg.packages; ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);
  std::string shared_dest = airports[rng.below(airports.size())];
  for (int g = 0; g < n_goals; ++g) {
    int pkg = order[g];
    std::string dest;
    if (cfg.same_destination) {
      dest = shared_dest;
    } else {
      const auto& pool = cfg.plane_only ? airports : locations;
      do {
        dest = pool[rng.below(pool.size())];
      } while (dest == origin[pkg]);
    }
    p.goals.push_back(glit("AT-OB", {"OB" + std::to_string(pkg + 1), dest}));
  }
  return p;
}

// Random chain problem.  Initial tokens cover the chosen goals so that each
// is achievable; the wipe goal forces the PA token.
inline Problem generate_theta2(const Theta2Config& cfg, int n_goals, Rng& rng,
                               bool force_wipe, bool full_tokens) {
  using detail::glit;
  if (n_goals > cfg.m + (force_wipe ? 1 : 0))
    throw std::invalid_argument("more goals than the domain offers");
  Problem p;
  std::vector<int> order(cfg.m);
  for (int i = 0; i < cfg.m; ++i) order[i] = i + 1;
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.below(i)]);

  int chain_goals = force_wipe ? n_goals - 1 : n_goals;
  std::vector<int> chosen(order.begin(), order.begin() + chain_goals);
  std::sort(chosen.begin(), chosen.end());
  // The wipe goal leads the list: retrieval covers it first, while the
  // planner's newest-first flaw selection reaches it last from scratch.
  if (force_wipe) p.goals.push_back(glit("GA"));
  for (int i : chosen) p.goals.push_back(glit("G" + std::to_string(i)));

  std::set<int> tokens(chosen.begin(), chosen.end());
  if (full_tokens)
    for (int i = 1; i <= cfg.m; ++i) tokens.insert(i);
  else
    for (int i = 1; i <= cfg.m; ++i)
      if (rng.chance(30)) tokens.insert(i);
  for (int i : tokens) p.init.push_back(glit("I" + std::to_string(i)));
  bool pa = force_wipe || full_tokens || rng.chance(50);
  bool pb = full_tokens || !pa || rng.chance(50);
  if (pa) p.init.push_back(glit("PA"));
  if (pb) p.init.push_back(glit("PB"));
  return p;
}

// Random blocks problem: a consistent tower configuration plus goal facts
// drawn from a second configuration over the same blocks.
inline Problem generate_blocks(const BlocksConfig& cfg, int n_goals,
                               Rng& rng) {
  using detail::glit;
  auto towers = [&](std::vector<std::string> blocks) {
    std::vector<Literal> facts;
    std::vector<std::string> tops;
    for (size_t i = blocks.size(); i > 1; --i)
      std::swap(blocks[i - 1], blocks[rng.below(i)]);
    std::string below = "Table";
    for (size_t i = 0; i < blocks.size(); ++i) {
      bool start_new = below == "Table" ? true : rng.chance(40);
      if (start_new && below != "Table") {
        tops.push_back(below);
        below = "Table";
      }
      facts.push_back(glit("On", {blocks[i], below}));
      below = blocks[i];
    }
    tops.push_back(below);
    for (const auto& t : tops) facts.push_back(glit("Clear", {t}));
    return facts;
  };
  std::vector<std::string> names;
  for (int i = 0; i < cfg.blocks; ++i)
    names.push_back(std::string(1, static_cast<char>('A' + i)));
  Problem p;
  p.init = towers(names);
  // Redraw the target configuration until it differs enough from the
  // initial towers to supply the requested goals.
  std::vector<Literal> candidates;
  for (int attempt = 0; attempt < 50; ++attempt) {
    candidates.clear();
    std::vector<Literal> target = towers(names);
    for (const Literal& f : target) {
      if (f.pred_text() != "On") continue;
      bool already = false;
      for (const Literal& i : p.init) already |= (i == f);
      if (!already) candidates.push_back(f);
    }
    if (static_cast<size_t>(n_goals) <= candidates.size()) break;
  }
  if (static_cast<size_t>(n_goals) > candidates.size())
    throw std::invalid_argument("not enough achievable block goals");
  for (int g = 0; g < n_goals; ++g) p.goals.push_back(candidates[g]);
  return p;
}

inline Problem generate_problem(const DomainConfig& cfg, int n_goals,
                                std::uint64_t seed) {
  Rng rng(seed);
  switch (cfg.kind) {
    case DomainConfig::Kind::Logistics:
      return generate_logistics(cfg.logistics, n_goals, rng);
    case DomainConfig::Kind::Theta2:
      return generate_theta2(cfg.theta2, n_goals, rng,
                             cfg.theta2.force_wipe_goal, true);
    case DomainConfig::Kind::Blocks:
      return generate_blocks(cfg.blocks, n_goals, rng);
  }
  throw std::logic_error("unknown domain kind");
}

// Default step bounds per domain family.
inline size_t default_step_bound(const DomainConfig& cfg, size_t goals) {
  switch (cfg.kind) {
    case DomainConfig::Kind::Logistics: return 3 + 4 * goals;
    case DomainConfig::Kind::Theta2: return goals + 1;
    case DomainConfig::Kind::Blocks:
      return 2 * static_cast<size_t>(cfg.blocks.blocks);
  }
  return 30;
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentSpec {
  std::string name = "experiment";
  DomainConfig domain;
  enum class Protocol { Cumulative, Reset } protocol = Protocol::Cumulative;
  std::vector<int> phases = {1, 2, 3};  // training sizes per phase
  int test_problems = 10;
  int training_problems = 10;
  std::vector<RetrievalMode> replay_modes = {RetrievalMode::Learning,
                                             RetrievalMode::Static};
  bool scratch_mode = true;
  SearchLimits limits;
  std::uint64_t seed = 7;
};

struct MetricsRow {
  int phase = 0;
  std::string mode;
  std::string problem;
  bool solved = false;
  size_t length = 0;
  long nodes = 0;
  double wall_s = 0;
  double retrieval_s = 0;
  int seq = -1;  // -1: not a replay episode
  double der = 0;
  double rep = 0;
  size_t library_size = 0;
};

struct PhaseAggregate {
  int phase = 0;
  std::string mode;
  int problems = 0;
  int solved = 0;
  long nodes = 0;
  double wall_s = 0;
  double retrieval_s = 0;
  double seq_pct = 0;
  double der_pct = 0;
  double rep_pct = 0;
  double mean_length = 0;
  size_t library_size = 0;
};

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::vector<PhaseAggregate> aggregates;
};

inline const char* mode_name(RetrievalMode m) {
  return m == RetrievalMode::Learning ? "learning" : "static";
}

inline std::string metrics_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "phase,mode,problem,solved,length,nodes,wall_s,retrieval_s,seq,der,"
        "rep,library_size\n";
  os << std::fixed;
  for (const MetricsRow& r : result.rows) {
    os << r.phase << ',' << r.mode << ',' << r.problem << ','
       << (r.solved ? 1 : 0) << ',' << r.length << ',' << r.nodes << ','
       << std::setprecision(3) << r.wall_s << ',' << r.retrieval_s << ',';
    if (r.seq < 0)
      os << ",,";
    else
      os << r.seq << ',' << std::setprecision(3) << r.der << ','
         << std::setprecision(3) << r.rep << ',';
    if (r.seq < 0) os << ',';
    os << r.library_size << '\n';
  }
  os << "# aggregates\n";
  os << "phase,mode,problems,solved,nodes,wall_s,retrieval_s,seq_pct,der_pct,"
        "rep_pct,mean_length,library_size\n";
  for (const PhaseAggregate& a : result.aggregates) {
    os << a.phase << ',' << a.mode << ',' << a.problems << ',' << a.solved
       << ',' << a.nodes << ',' << std::setprecision(3) << a.wall_s << ','
       << a.retrieval_s << ',' << std::setprecision(1) << a.seq_pct << ','
       << a.der_pct << ',' << a.rep_pct << ',' << std::setprecision(2)
       << a.mean_length << ',' << a.library_size << '\n';
  }
  return os.str();
}

namespace detail {

inline PhaseAggregate aggregate(const std::vector<MetricsRow>& rows, int phase,
                                const std::string& mode) {
  PhaseAggregate a;
  a.phase = phase;
  a.mode = mode;
  int replay_rows = 0, seq_rows = 0;
  double der_sum = 0, rep_sum = 0, len_sum = 0;
  for (const MetricsRow& r : rows) {
    if (r.phase != phase || r.mode != mode) continue;
    ++a.problems;
    a.solved += r.solved ? 1 : 0;
    a.nodes += r.nodes;
    a.wall_s += r.wall_s;
    a.retrieval_s += r.retrieval_s;
    a.library_size = r.library_size;
    if (r.solved) len_sum += static_cast<double>(r.length);
    if (r.seq >= 0) {
      ++replay_rows;
      seq_rows += r.seq;
      der_sum += r.der;
      rep_sum += r.rep;
    }
  }
  if (replay_rows > 0) {
    a.seq_pct = 100.0 * seq_rows / replay_rows;
    a.der_pct = 100.0 * der_sum / replay_rows;
    a.rep_pct = 100.0 * rep_sum / replay_rows;
  }
  if (a.solved > 0) a.mean_length = len_sum / a.solved;
  return a;
}

// One test problem solved in one mode.
inline MetricsRow run_mode(const Domain& domain, const Problem& problem,
                           CaseLibrary* library, const std::string& mode,
                           const ExperimentSpec& spec, int phase) {
  MetricsRow row;
  row.phase = phase;
  row.mode = mode;
  row.problem = problem.name;
  SearchLimits limits = spec.limits;
  limits.step_bound = default_step_bound(spec.domain, problem.goals.size());
  if (mode == "scratch") {
    SearchOutcome out = search(domain, problem, Strategy::BestFirst, limits);
    row.solved = out.solved();
    row.length = out.actions.size();
    row.nodes = out.stats.expanded;
    row.wall_s = out.stats.wall_s;
  } else {
    TrainConfig cfg;
    cfg.limits = limits;
    RetrievalMode rmode =
        mode == "learning" ? RetrievalMode::Learning : RetrievalMode::Static;
    SolveResult r = solve_with_library(domain, problem, *library, rmode, cfg);
    row.solved = r.solved;
    row.length = r.actions.size();
    row.nodes = r.nodes;
    row.retrieval_s = r.retrieval_s;
    row.nodes = r.nodes;
    if (r.adapt_outcome) {
      row.seq = r.adapt_outcome->metrics.seq ? 1 : 0;
      row.der = r.adapt_outcome->metrics.der;
      row.rep = r.adapt_outcome->metrics.rep;
      row.wall_s = r.adapt_outcome->stats.wall_s;
    } else if (r.search_outcome) {
      row.wall_s = r.search_outcome->stats.wall_s;
      row.seq = 0;
    }
  }
  if (library) row.library_size = library->size();
  return row;
}

}  // namespace detail

// The cumulative chain protocol: the library persists across phases.  Each
// phase trains on problems of the phase size, then tests on problems one
// goal larger; a test problem counts only when retrieval finds a case with a
// failure reason that holds (the mis-retrieval condition under study), and
// skipped candidates still feed the library as training experience.
inline ExperimentResult run_theta2_experiment(const ExperimentSpec& spec) {
  ExperimentResult result;
  Domain domain = build_domain(spec.domain);
  CaseLibrary library;
  const int m = spec.domain.theta2.m;
  TrainConfig train_cfg;
  train_cfg.limits = spec.limits;
  train_cfg.step_bound_for_goals = [&](size_t goals) {
    return default_step_bound(spec.domain, goals);
  };
  std::uint64_t seed = spec.seed;

  for (size_t pi = 0; pi < spec.phases.size(); ++pi) {
    int phase = spec.phases[pi];

    // Training.
    if (pi == 0) {
      // Single-goal session: each chain goal from a state offering only the
      // B-route, plus the wipe goal alone.
      for (int i = 1; i <= m; ++i) {
        Problem p;
        p.name = "train1-G" + std::to_string(i);
        p.init = {detail::glit("I" + std::to_string(i)), detail::glit("PB")};
        p.goals = {detail::glit("G" + std::to_string(i))};
        train_on_problem(domain, p, library, train_cfg);
      }
      Problem pa;
      pa.name = "train1-GA";
      pa.goals = {detail::glit("GA")};
      train_on_problem(domain, pa, library, train_cfg);
    }
    if (phase >= 2) {
      for (int t = 0; t < spec.training_problems; ++t) {
        Problem p = generate_problem(spec.domain, phase, seed++);
        p.name = "train" + std::to_string(phase) + "-" + std::to_string(t);
        train_on_problem(domain, p, library, train_cfg);
      }
    }

    // Testing: problems one goal larger, admitted when a previously failed
    // case is retrieved.
    int admitted = 0;
    int attempts = 0;
    while (admitted < spec.test_problems && attempts < 500) {
      ++attempts;
      Problem p = generate_problem(spec.domain, phase + 1, seed++);
      p.name = "ph" + std::to_string(phase) + "-t" + std::to_string(admitted);
      RetrievalResult probe = library.retrieve(p, RetrievalMode::Learning);
      bool eligible = false;
      for (const RetrievedInstance& inst : probe.instances)
        eligible |= inst.via_redirect;
      if (!eligible) {
        // Not a mis-retrieval situation yet: treat it as further training.
        train_on_problem(domain, p, library, train_cfg);
        continue;
      }
      ++admitted;
      if (spec.scratch_mode)
        result.rows.push_back(
            detail::run_mode(domain, p, &library, "scratch", spec, phase));
      for (RetrievalMode mode : spec.replay_modes)
        result.rows.push_back(detail::run_mode(domain, p, &library,
                                               mode_name(mode), spec, phase));
    }

    for (RetrievalMode mode : spec.replay_modes)
      result.aggregates.push_back(
          detail::aggregate(result.rows, phase, mode_name(mode)));
    if (spec.scratch_mode)
      result.aggregates.push_back(
          detail::aggregate(result.rows, phase, "scratch"));
  }
  return result;
}

// The reset protocol: each phase retrains an empty library on problems of
// the phase size and tests on fresh problems of the same size.
inline ExperimentResult run_reset_experiment(const ExperimentSpec& spec) {
  ExperimentResult result;
  Domain domain = build_domain(spec.domain);
  std::uint64_t seed = spec.seed;

  for (int phase : spec.phases) {
    CaseLibrary library;
    TrainConfig train_cfg;
    train_cfg.limits = spec.limits;
    train_cfg.step_bound_for_goals = [&](size_t goals) {
      return default_step_bound(spec.domain, goals);
    };
    for (int t = 0; t < spec.training_problems; ++t) {
      Problem p = generate_problem(spec.domain, phase, seed++);
      p.name = "train" + std::to_string(phase) + "-" + std::to_string(t);
      train_on_problem(domain, p, library, train_cfg);
    }
    for (int t = 0; t < spec.test_problems; ++t) {
      Problem p = generate_problem(spec.domain, phase, seed++);
      p.name = "ph" + std::to_string(phase) + "-t" + std::to_string(t);
      if (spec.scratch_mode)
        result.rows.push_back(
            detail::run_mode(domain, p, &library, "scratch", spec, phase));
      for (RetrievalMode mode : spec.replay_modes)
        result.rows.push_back(detail::run_mode(domain, p, &library,
                                               mode_name(mode), spec, phase));
    }
    for (RetrievalMode mode : spec.replay_modes)
      result.aggregates.push_back(
          detail::aggregate(result.rows, phase, mode_name(mode)));
    if (spec.scratch_mode)
      result.aggregates.push_back(
          detail::aggregate(result.rows, phase, "scratch"));
  }
  return result;
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.domain.kind == DomainConfig::Kind::Theta2 &&
      spec.protocol == ExperimentSpec::Protocol::Cumulative)
    return run_theta2_experiment(spec);
  return run_reset_experiment(spec);
}

// ---------------------------------------------------------------------------
// Experiment spec files

inline ExperimentSpec parse_experiment(const std::string& text) {
  ExperimentSpec spec;
  std::vector<Sexpr> forms = parse_sexprs(text);
  if (forms.empty()) throw ParseError(1, 1, "empty experiment file");
  const Sexpr& form = forms.front();
  if (!form.is_list() || form.size() < 2 || form[0].as_atom() != "define")
    throw ParseError(form.line, form.column, "(define (experiment ...)) expected");
  spec.name = form[1][1].as_atom();
  for (size_t i = 2; i < form.size(); ++i) {
    const Sexpr& e = form[i];
    const std::string& key = e[0].as_atom();
    if (key == ":domain") {
      const std::string& kind = e[1].as_atom();
      if (kind == "logistics")
        spec.domain.kind = DomainConfig::Kind::Logistics;
      else if (kind == "theta2")
        spec.domain.kind = DomainConfig::Kind::Theta2;
      else if (kind == "blocks")
        spec.domain.kind = DomainConfig::Kind::Blocks;
      else
        throw ParseError(e.line, e.column, "unknown domain " + kind);
      for (size_t k = 2; k + 1 < e.size(); k += 2) {
        const std::string& opt = e[k].as_atom();
        int value = std::stoi(e[k + 1].as_atom());
        if (opt == ":m") spec.domain.theta2.m = value;
        else if (opt == ":cities") spec.domain.logistics.cities = value;
        else if (opt == ":planes") spec.domain.logistics.planes = value;
        else if (opt == ":trucks") spec.domain.logistics.trucks = value;
        else if (opt == ":packages") spec.domain.logistics.packages = value;
        else if (opt == ":blocks") spec.domain.blocks.blocks = value;
        else if (opt == ":route-restricted")
          spec.domain.logistics.route_restricted = value != 0;
        else if (opt == ":plane-only")
          spec.domain.logistics.plane_only = value != 0;
        else if (opt == ":same-destination")
          spec.domain.logistics.same_destination = value != 0;
        else
          throw ParseError(e[k].line, e[k].column, "unknown option " + opt);
      }
    } else if (key == ":protocol") {
      const std::string& proto = e[1].as_atom();
      spec.protocol = proto == "reset" ? ExperimentSpec::Protocol::Reset
                                       : ExperimentSpec::Protocol::Cumulative;
    } else if (key == ":phases") {
      spec.phases.clear();
      for (size_t k = 1; k < e.size(); ++k)
        spec.phases.push_back(std::stoi(e[k].as_atom()));
    } else if (key == ":test-problems") {
      spec.test_problems = std::stoi(e[1].as_atom());
    } else if (key == ":training-problems") {
      spec.training_problems = std::stoi(e[1].as_atom());
    } else if (key == ":modes") {
      spec.replay_modes.clear();
      spec.scratch_mode = false;
      for (size_t k = 1; k < e.size(); ++k) {
        const std::string& mode = e[k].as_atom();
        if (mode == "scratch") spec.scratch_mode = true;
        else if (mode == "learning")
          spec.replay_modes.push_back(RetrievalMode::Learning);
        else if (mode == "static")
          spec.replay_modes.push_back(RetrievalMode::Static);
        else
          throw ParseError(e[k].line, e[k].column, "unknown mode " + mode);
      }
    } else if (key == ":node-budget") {
      spec.limits.node_budget = std::stol(e[1].as_atom());
    } else if (key == ":time-budget") {
      spec.limits.time_budget_s = std::stod(e[1].as_atom());
    } else if (key == ":seed") {
      spec.seed = std::stoull(e[1].as_atom());
    } else {
      throw ParseError(e.line, e.column, "unknown experiment key " + key);
    }
  }
  return spec;
}

}  // namespace replan

#endif  // REPLAN_BENCH_HPP
