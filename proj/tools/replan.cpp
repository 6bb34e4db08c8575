// Command-line front end: solve single problems, build and inspect case
// libraries, and run benchmark experiments.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "replan/bench.hpp"
#include "replan/case_library.hpp"
#include "replan/replay.hpp"
#include "replan/search.hpp"
#include "replan/trace.hpp"

using namespace replan;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonOpts {
  std::string domain_file;
  std::string problem_file;
  std::string library_dir;
  std::string mode = "scratch";
  std::string strategy = "best-first";
  long step_bound = 0;  // 0: per-domain default
  long node_budget = 50000;
  double time_budget = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_problem) {
  cmd->add_option("--domain", opts.domain_file, "domain file")->required();
  auto* prob = cmd->add_option("--problem", opts.problem_file, "problem file");
  if (needs_problem) prob->required();
  cmd->add_option("--library", opts.library_dir, "case library directory");
  cmd->add_option("--mode", opts.mode, "scratch|static|learning")
      ->check(CLI::IsMember({"scratch", "static", "learning"}));
  cmd->add_option("--strategy", opts.strategy, "best-first|dfs|iddfs")
      ->check(CLI::IsMember({"best-first", "dfs", "iddfs"}));
  cmd->add_option("--step-bound", opts.step_bound, "max real steps in a plan");
  cmd->add_option("--node-budget", opts.node_budget, "max refinements");
  cmd->add_option("--time-budget", opts.time_budget, "seconds");
}

SearchLimits make_limits(const CommonOpts& opts, size_t goals) {
  SearchLimits limits;
  limits.step_bound = opts.step_bound > 0
                          ? static_cast<size_t>(opts.step_bound)
                          : 3 + 4 * goals;
  limits.node_budget = opts.node_budget;
  limits.time_budget_s = opts.time_budget;
  return limits;
}

void print_plan(const std::vector<GroundAction>& actions) {
  if (actions.empty()) {
    std::cout << "plan: (empty)\n";
    return;
  }
  std::cout << "plan (" << actions.size() << " steps):\n";
  for (size_t i = 0; i < actions.size(); ++i)
    std::cout << "  " << i + 1 << ". " << actions[i].signature() << "\n";
}

void print_reason(const CaseFailureReason& reason) {
  std::cout << "failure reason (" << (reason.sound ? "sound" : "unsound")
            << "):\n  interacting goals:";
  for (const Literal& g : reason.goals) std::cout << ' ' << g;
  std::cout << "\n  initial-state conditions:";
  if (reason.init_conds.empty()) std::cout << " (none)";
  for (const Literal& e : reason.init_conds) std::cout << ' ' << e;
  std::cout << "\n";
}

int cmd_solve(const CommonOpts& opts, const std::string& trace_out) {
  auto [domain, problem] =
      parse_domain_and_problem(slurp(opts.domain_file), slurp(opts.problem_file));
  SearchLimits limits = make_limits(opts, problem.goals.size());
  Strategy strategy = *strategy_from_name(opts.strategy);

  if (opts.mode == "scratch") {
    SearchOutcome out = search(domain, problem, strategy, limits);
    if (!out.solved()) {
      std::cout << (out.status == SearchOutcome::Status::Exhausted
                        ? "exhausted without a solution\n"
                        : "budget exceeded\n");
      return 2;
    }
    print_plan(out.actions);
    std::cout << "nodes visited: " << out.stats.expanded
              << "  refinements: " << out.stats.nodes << "\n";
    if (!trace_out.empty()) {
      std::ofstream f(trace_out);
      f << serialize(extract_trace(out.leaf));
      std::cout << "trace written to " << trace_out << "\n";
    }
    return 0;
  }

  if (opts.library_dir.empty())
    throw std::runtime_error("--library is required for replay modes");
  CaseLibrary library = CaseLibrary::load(opts.library_dir);
  TrainConfig cfg;
  cfg.strategy = strategy;
  cfg.limits = limits;
  RetrievalMode mode = opts.mode == "learning" ? RetrievalMode::Learning
                                               : RetrievalMode::Static;
  SolveResult r = solve_with_library(domain, problem, library, mode, cfg);
  if (!r.solved) {
    std::cout << "unsolved within budget\n";
    return 2;
  }
  print_plan(r.actions);
  std::cout << "nodes visited: " << r.nodes;
  if (r.adapt_outcome) {
    const char* kind =
        r.adapt_outcome->status == AdaptOutcome::Status::Sequenced
            ? "sequenced"
            : "recovered";
    std::cout << "  replay: " << kind << "  der=" << std::fixed
              << std::setprecision(2) << r.adapt_outcome->metrics.der
              << " rep=" << r.adapt_outcome->metrics.rep;
  }
  std::cout << "\n";
  return 0;
}

int cmd_train(const CommonOpts& opts,
              const std::vector<std::string>& problem_files) {
  ParsedInput parsed = parse_input(slurp(opts.domain_file));
  if (!parsed.domain) throw std::runtime_error("no domain definition found");
  Domain domain = *parsed.domain;
  if (opts.library_dir.empty())
    throw std::runtime_error("--library is required");

  CaseLibrary library = std::filesystem::exists(opts.library_dir +
                                                "/manifest.rcl")
                            ? CaseLibrary::load(opts.library_dir)
                            : CaseLibrary();
  TrainConfig cfg;
  cfg.strategy = *strategy_from_name(opts.strategy);
  cfg.limits.node_budget = opts.node_budget;
  cfg.limits.time_budget_s = opts.time_budget;
  if (opts.step_bound > 0) {
    cfg.limits.step_bound = static_cast<size_t>(opts.step_bound);
  } else {
    cfg.step_bound_for_goals = [](size_t goals) { return 3 + 4 * goals; };
  }

  int solved = 0, total = 0;
  for (const std::string& file : problem_files) {
    ParsedInput batch = parse_input(slurp(file));
    for (Problem& p : batch.problems) {
      ++total;
      TrainOutcome out = train_on_problem(domain, p, library, cfg);
      solved += out.solved ? 1 : 0;
      std::cout << (p.name.empty() ? file : p.name) << ": "
                << (out.solved ? "solved" : "unsolved") << ", repairs stored "
                << out.repairs_stored << ", library size "
                << out.library_size_after << "\n";
    }
  }
  library.save(opts.library_dir);
  std::cout << "trained on " << total << " problems (" << solved
            << " solved); library saved to " << opts.library_dir << "\n";
  return 0;
}

int cmd_retrieve(const CommonOpts& opts) {
  auto [domain, problem] =
      parse_domain_and_problem(slurp(opts.domain_file), slurp(opts.problem_file));
  if (opts.library_dir.empty())
    throw std::runtime_error("--library is required");
  CaseLibrary library = CaseLibrary::load(opts.library_dir);
  RetrievalMode mode = opts.mode == "static" ? RetrievalMode::Static
                                             : RetrievalMode::Learning;
  RetrievalResult r = library.retrieve(problem, mode);
  std::cout << "retrieved " << r.instances.size() << " case instance(s)\n";
  for (const RetrievedInstance& inst : r.instances) {
    const Case* c = library.find(inst.case_id);
    std::cout << "  " << inst.case_id
              << (inst.via_redirect ? " (via failure redirect)" : "")
              << " goals";
    for (const Literal& g : c->goals())
      std::cout << ' ' << substitute(inst.subst, g);
    std::cout << "\n";
  }
  std::cout << "uncovered goals:";
  if (r.uncovered.empty()) std::cout << " (none)";
  for (size_t j : r.uncovered) std::cout << ' ' << problem.goals[j];
  std::cout << "\n";
  return 0;
}

int cmd_explain(const CommonOpts& opts) {
  auto [domain, problem] =
      parse_domain_and_problem(slurp(opts.domain_file), slurp(opts.problem_file));
  if (opts.library_dir.empty())
    throw std::runtime_error("--library is required");
  CaseLibrary library = CaseLibrary::load(opts.library_dir);
  TrainConfig cfg;
  cfg.strategy = *strategy_from_name(opts.strategy);
  cfg.limits = make_limits(opts, problem.goals.size());
  RetrievalMode mode = opts.mode == "static" ? RetrievalMode::Static
                                             : RetrievalMode::Learning;
  SolveResult r = solve_with_library(domain, problem, library, mode, cfg);
  if (!r.adapt_outcome) {
    std::cout << "no case applied; nothing to explain\n";
    return 0;
  }
  if (r.adapt_outcome->status == AdaptOutcome::Status::Sequenced) {
    std::cout << "replay sequenced; no retrieval failure\n";
    return 0;
  }
  if (r.adapt_outcome->failure_reason) {
    print_reason(*r.adapt_outcome->failure_reason);
    if (r.adapt_outcome->failing_item &&
        *r.adapt_outcome->failing_item < r.retrieval.instances.size())
      std::cout << "failing case: "
                << r.retrieval.instances[*r.adapt_outcome->failing_item]
                       .case_id
                << "\n";
  } else {
    std::cout << "replay failed without an analytical explanation\n";
  }
  return 0;
}

int cmd_bench(const std::string& spec_file, const std::string& csv_file,
              long seed_override) {
  ExperimentSpec spec = parse_experiment(slurp(spec_file));
  if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
  ExperimentResult result = run_experiment(spec);
  std::string csv = metrics_csv(result);
  if (csv_file.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(csv_file);
    f << csv;
    std::cout << "wrote " << result.rows.size() << " rows to " << csv_file
              << "\n";
  }
  for (const PhaseAggregate& a : result.aggregates) {
    std::cout << "phase " << a.phase << " " << a.mode << ": solved "
              << a.solved << "/" << a.problems << ", nodes " << a.nodes;
    if (a.mode != "scratch") std::cout << ", seq " << a.seq_pct << "%";
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partial-order causal-link planner with derivational replay "
               "and failure-driven case learning"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string trace_out;
  std::vector<std::string> problem_files;
  std::string spec_file, csv_file;
  long seed_override = -1;

  CLI::App* solve = app.add_subcommand("solve", "solve one problem");
  add_common(solve, opts, true);
  solve->add_option("--trace-out", trace_out, "write the derivation trace");

  CLI::App* train = app.add_subcommand("train", "build a case library");
  add_common(train, opts, false);
  train->add_option("problems", problem_files, "problem files")->required();

  CLI::App* retrieve = app.add_subcommand("retrieve", "show case retrieval");
  add_common(retrieve, opts, true);

  CLI::App* explain =
      app.add_subcommand("explain",
                         "dump the failure reason of a failed adaptation");
  add_common(explain, opts, true);

  CLI::App* bench = app.add_subcommand("bench", "run an experiment spec");
  bench->add_option("--spec", spec_file, "experiment file")->required();
  bench->add_option("--csv", csv_file, "output CSV path");
  bench->add_option("--seed", seed_override, "override the spec's seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(opts, trace_out);
    if (train->parsed()) return cmd_train(opts, problem_files);
    if (retrieve->parsed()) return cmd_retrieve(opts);
    if (explain->parsed()) return cmd_explain(opts);
    if (bench->parsed()) return cmd_bench(spec_file, csv_file, seed_override);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
