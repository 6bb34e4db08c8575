#ifndef REPLAN_EXECUTOR_HPP
#define REPLAN_EXECUTOR_HPP

// Ground plan execution: STRIPS semantics over a closed-world state of
// ground positive atoms.  Deletes are applied before adds.

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "replan/terms.hpp"

namespace replan {

using State = std::set<Literal>;

struct GroundAction {
  std::string name;
  std::vector<Term> args;
  std::vector<Literal> preconds;  // signed; negatives hold by absence
  std::vector<Literal> adds;
  std::vector<Literal> deletes;
  std::vector<std::pair<Term, Term>> must_differ;  // compiled equals (NOT ..)

  std::string signature() const {
    std::ostringstream ss;
    ss << '(' << name;
    for (const Term& t : args) ss << ' ' << t;
    ss << ')';
    return ss.str();
  }
};

inline bool holds(const State& state, const Literal& lit) {
  Literal pos = lit;
  pos.positive = true;
  bool present = state.count(pos) > 0;
  return lit.positive ? present : !present;
}

struct ExecutionFailure {
  size_t step_index = 0;  // first failing step, 0-based
  std::string reason;
};

struct ExecutionResult {
  std::optional<State> final_state;
  std::optional<ExecutionFailure> failure;
  bool ok() const { return final_state.has_value(); }
};

inline ExecutionResult execute(const std::vector<GroundAction>& seq,
                               const State& init) {
  State state = init;
  for (size_t i = 0; i < seq.size(); ++i) {
    const GroundAction& a = seq[i];
    for (const auto& [x, y] : a.must_differ) {
      if (x == y) {
        ExecutionResult r;
        r.failure = ExecutionFailure{
            i, a.signature() + " violates inequality constraint on " + x.text()};
        return r;
      }
    }
    for (const Literal& p : a.preconds) {
      if (!holds(state, p)) {
        ExecutionResult r;
        r.failure = ExecutionFailure{
            i, a.signature() + " precondition not satisfied: " + to_string(p)};
        return r;
      }
    }
    for (const Literal& d : a.deletes) {
      Literal pos = d;
      pos.positive = true;
      state.erase(pos);
    }
    for (const Literal& ad : a.adds) state.insert(ad);
  }
  ExecutionResult r;
  r.final_state = std::move(state);
  return r;
}

inline bool entails(const State& state, const std::vector<Literal>& goals) {
  for (const Literal& g : goals)
    if (!holds(state, g)) return false;
  return true;
}

}  // namespace replan

#endif  // REPLAN_EXECUTOR_HPP
