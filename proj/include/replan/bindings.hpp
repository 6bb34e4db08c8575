#ifndef REPLAN_BINDINGS_HPP
#define REPLAN_BINDINGS_HPP

// Codesignation (binding) and non-codesignation (prohibited binding)
// constraints over variables and constants.  A class never contains two
// distinct constants, and no prohibited pair may fall inside one class.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "replan/terms.hpp"

namespace replan {

struct BindingViolation {
  enum class Kind { None, ConstantClash, ProhibitedPair };
  Kind kind = Kind::None;
  // For ProhibitedPair: the prohibited pair that the merge violated.
  Term a;
  Term b;
  explicit operator bool() const { return kind != Kind::None; }
};

class BindingSet {
 public:
  // Representative of t's codesignation class; constants win over variables.
  Term find(const Term& t) const {
    Term cur = t;
    auto it = parent_.find(cur);
    while (it != parent_.end()) {
      cur = it->second;
      it = parent_.find(cur);
    }
    return cur;
  }

  bool necessarily_equal(const Term& a, const Term& b) const {
    return find(a) == find(b);
  }

  // True when a and b could still be bound together.
  bool can_unify(const Term& a, const Term& b) const {
    Term ra = find(a), rb = find(b);
    if (ra == rb) return true;
    if (!ra.variable && !rb.variable) return false;
    return !prohibited(ra, rb);
  }

  // Merges the classes of a and b.  Returns a violation (leaving the set
  // unchanged in that case is not guaranteed; callers work on copies).
  BindingViolation unify_terms(const Term& a, const Term& b) {
    Term ra = find(a), rb = find(b);
    if (ra == rb) return {};
    if (!ra.variable && !rb.variable)
      return {BindingViolation::Kind::ConstantClash, ra, rb};
    if (prohibited(ra, rb)) {
      auto p = prohibited_pair(ra, rb);
      return {BindingViolation::Kind::ProhibitedPair, p.first, p.second};
    }
    // Point the variable at the other representative.
    if (ra.variable) {
      parent_[ra] = rb;
    } else {
      parent_[rb] = ra;
    }
    return {};
  }

  // Records a ≠ b.  Fails if they already codesignate.
  BindingViolation add_distinct(const Term& a, const Term& b) {
    Term ra = find(a), rb = find(b);
    if (ra == rb) return {BindingViolation::Kind::ProhibitedPair, a, b};
    distinct_.emplace_back(a, b);
    return {};
  }

  bool prohibited(const Term& a, const Term& b) const {
    Term ra = find(a), rb = find(b);
    for (const auto& [x, y] : distinct_) {
      Term rx = find(x), ry = find(y);
      if ((rx == ra && ry == rb) || (rx == rb && ry == ra)) return true;
    }
    // Distinct constants never codesignate.
    return !ra.variable && !rb.variable && ra != rb;
  }

  Term resolve(const Term& t) const { return find(t); }

  Literal resolve(const Literal& l) const {
    Literal out = l;
    for (Term& t : out.args) t = find(t);
    return out;
  }

  const std::vector<std::pair<Term, Term>>& distinct_pairs() const {
    return distinct_;
  }

  // The prohibited pair witnessing that a and b may not merge.
  std::pair<Term, Term> prohibited_pair(const Term& ra, const Term& rb) const {
    for (const auto& [x, y] : distinct_) {
      Term rx = find(x), ry = find(y);
      if ((rx == ra && ry == rb) || (rx == rb && ry == ra)) return {x, y};
    }
    return {ra, rb};
  }

  bool operator==(const BindingSet& o) const {
    return parent_ == o.parent_ && distinct_ == o.distinct_;
  }

 private:
  std::map<Term, Term> parent_;
  std::vector<std::pair<Term, Term>> distinct_;
};

// Literal unification under an existing binding set.  Returns the minimal
// extension making p and q codesignate argument-wise, or nothing.  p and q
// must carry the same sign.
inline std::optional<BindingSet> unify(const Literal& p, const Literal& q,
                                       const BindingSet& b) {
  if (p.positive != q.positive) return std::nullopt;
  if (p.pred != q.pred || p.args.size() != q.args.size()) return std::nullopt;
  BindingSet out = b;
  for (size_t i = 0; i < p.args.size(); ++i)
    if (out.unify_terms(p.args[i], q.args[i])) return std::nullopt;
  return out;
}

// True when p and q refer to the same proposition in every ground completion
// of b (same predicate, pairwise necessarily-codesignating arguments).
// Sign is ignored; callers compare signs themselves.
inline bool necessarily_codesignate(const Literal& p, const Literal& q,
                                    const BindingSet& b) {
  if (p.pred != q.pred || p.args.size() != q.args.size()) return false;
  for (size_t i = 0; i < p.args.size(); ++i)
    if (!b.necessarily_equal(p.args[i], q.args[i])) return false;
  return true;
}

}  // namespace replan

#endif  // REPLAN_BINDINGS_HPP
