#ifndef REPLAN_SUBST_HPP
#define REPLAN_SUBST_HPP

// Ground substitutions: variable -> term maps used by retrieval, replay and
// failure-reason evaluation.

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "replan/terms.hpp"

namespace replan {

using Substitution = std::map<Term, Term>;

inline Term substitute(const Substitution& s, const Term& t) {
  if (!t.variable) return t;
  auto it = s.find(t);
  return it == s.end() ? t : it->second;
}

inline Literal substitute(const Substitution& s, const Literal& l) {
  Literal out = l;
  for (Term& t : out.args) t = substitute(s, t);
  return out;
}

// Extends s so that pattern matches target argument-wise; target is ground.
// Returns nothing when impossible.
inline std::optional<Substitution> match(const Literal& pattern,
                                         const Literal& target,
                                         const Substitution& s) {
  if (pattern.positive != target.positive || pattern.pred != target.pred ||
      pattern.args.size() != target.args.size())
    return std::nullopt;
  Substitution out = s;
  for (size_t i = 0; i < pattern.args.size(); ++i) {
    Term p = substitute(out, pattern.args[i]);
    const Term& t = target.args[i];
    if (p.variable) {
      out[p] = t;
    } else if (p != t) {
      return std::nullopt;
    }
  }
  return out;
}

// Matches every pattern against some member of `targets` (conjunctively,
// with backtracking).  Calls `accept` on each complete extension; stops and
// returns true as soon as accept does.
inline bool match_all(const std::vector<Literal>& patterns, size_t index,
                      const std::vector<Literal>& targets,
                      const Substitution& s,
                      const std::function<bool(const Substitution&)>& accept) {
  if (index == patterns.size()) return accept(s);
  for (const Literal& t : targets) {
    if (auto next = match(patterns[index], t, s)) {
      if (match_all(patterns, index + 1, targets, *next, accept)) return true;
    }
  }
  return false;
}

namespace detail {
inline bool match_distinct_rec(
    const std::vector<Literal>& patterns, size_t index,
    const std::vector<Literal>& targets, std::vector<bool>& used,
    const Substitution& s,
    const std::function<bool(const Substitution&)>& accept) {
  if (index == patterns.size()) return accept(s);
  for (size_t j = 0; j < targets.size(); ++j) {
    if (used[j]) continue;
    if (auto next = match(patterns[index], targets[j], s)) {
      used[j] = true;
      if (match_distinct_rec(patterns, index + 1, targets, used, *next,
                             accept))
        return true;
      used[j] = false;
    }
  }
  return false;
}
}  // namespace detail

// As match_all, but each pattern must take a distinct target.
inline bool match_all_distinct(
    const std::vector<Literal>& patterns,
    const std::vector<Literal>& targets, const Substitution& s,
    const std::function<bool(const Substitution&)>& accept) {
  std::vector<bool> used(targets.size(), false);
  return detail::match_distinct_rec(patterns, 0, targets, used, s, accept);
}

}  // namespace replan

#endif  // REPLAN_SUBST_HPP
