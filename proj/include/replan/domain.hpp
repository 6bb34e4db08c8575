#ifndef REPLAN_DOMAIN_HPP
#define REPLAN_DOMAIN_HPP

// STRIPS-style domain and problem representation plus the text format
// parser.  See docs/FORMATS.md for the grammar.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "replan/sexpr.hpp"
#include "replan/terms.hpp"

namespace replan {

// An equality or inequality constraint between two schema parameters (or a
// parameter and a constant).
struct EqualsConstraint {
  bool equal = false;  // false means "must not codesignate"
  Term a;
  Term b;
  bool operator==(const EqualsConstraint& o) const {
    return equal == o.equal && a == o.a && b == o.b;
  }
};

struct OperatorSchema {
  std::string name;
  std::vector<Term> params;  // variables
  std::vector<Literal> preconds;  // may be signed; bundled domains use positive
  std::vector<Literal> adds;      // positive
  std::vector<Literal> deletes;   // positive, interpreted delete-then-add
  std::vector<EqualsConstraint> equals;
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<Literal> init;   // ground positive atoms, closed world
  std::vector<Literal> goals;  // ground positive atoms
};

struct Domain {
  std::string name;
  std::vector<OperatorSchema> schemas;
  std::map<std::uint32_t, size_t> arity;  // predicate -> arity

  // Predicates never added or deleted by any operator.  These act as static
  // filter conditions (IS-A, SAME-CITY and the like).
  std::set<std::uint32_t> filter_predicates() const {
    std::set<std::uint32_t> dynamic;
    for (const auto& s : schemas) {
      for (const auto& l : s.adds) dynamic.insert(l.pred);
      for (const auto& l : s.deletes) dynamic.insert(l.pred);
    }
    std::set<std::uint32_t> filters;
    for (const auto& [pred, _] : arity)
      if (!dynamic.count(pred)) filters.insert(pred);
    return filters;
  }

  const OperatorSchema* find_schema(const std::string& name) const {
    for (const auto& s : schemas)
      if (s.name == name) return &s;
    return nullptr;
  }
};

namespace detail {

inline Literal parse_literal(const Sexpr& e, bool positive_only,
                             std::map<std::uint32_t, size_t>* arity) {
  if (!e.is_list() || e.size() == 0)
    throw ParseError(e.line, e.column, "expected literal");
  if (e[0].is_atom() && (e[0].atom == "not" || e[0].atom == "NOT")) {
    if (positive_only)
      throw ParseError(e.line, e.column, "negative literal not allowed here");
    if (e.size() != 2)
      throw ParseError(e.line, e.column, "malformed (not ...)");
    Literal inner = parse_literal(e[1], true, arity);
    return inner.negated();
  }
  Literal lit;
  lit.positive = true;
  lit.pred = SymbolTable::instance().intern(e[0].as_atom());
  for (size_t i = 1; i < e.size(); ++i)
    lit.args.push_back(Term::parse(e[i].as_atom()));
  if (arity) {
    auto it = arity->find(lit.pred);
    if (it == arity->end()) {
      arity->emplace(lit.pred, lit.args.size());
    } else if (it->second != lit.args.size()) {
      throw ParseError(e.line, e.column,
                       "predicate " + lit.pred_text() + " used with arity " +
                           std::to_string(lit.args.size()) + ", previously " +
                           std::to_string(it->second));
    }
  }
  return lit;
}

inline std::vector<Literal> parse_literal_list(
    const Sexpr& e, std::map<std::uint32_t, size_t>* arity) {
  if (!e.is_list())
    throw ParseError(e.line, e.column, "expected list of literals");
  std::vector<Literal> out;
  for (const auto& item : e.items) out.push_back(parse_literal(item, false, arity));
  return out;
}

inline OperatorSchema parse_action(const Sexpr& e,
                                   std::map<std::uint32_t, size_t>* arity) {
  OperatorSchema schema;
  if (e.size() < 2 || !e[1].is_atom())
    throw ParseError(e.line, e.column, "(:action NAME ...) expected");
  schema.name = e[1].as_atom();
  for (size_t i = 2; i + 1 < e.size(); i += 2) {
    const std::string& key = e[i].as_atom();
    const Sexpr& val = e[i + 1];
    if (key == ":parameters") {
      for (const auto& p : val.items) {
        Term t = Term::parse(p.as_atom());
        if (!t.variable)
          throw ParseError(p.line, p.column, "parameter must be a variable");
        schema.params.push_back(t);
      }
    } else if (key == ":precondition") {
      schema.preconds = parse_literal_list(val, arity);
    } else if (key == ":add") {
      schema.adds = parse_literal_list(val, arity);
    } else if (key == ":delete") {
      schema.deletes = parse_literal_list(val, arity);
    } else if (key == ":equals") {
      for (const auto& pair : val.items) {
        EqualsConstraint c;
        const Sexpr* terms = &pair;
        c.equal = true;
        if (pair.is_list() && pair.size() == 2 && pair[0].is_atom() &&
            (pair[0].atom == "not" || pair[0].atom == "NOT")) {
          c.equal = false;
          terms = &pair[1];
        }
        if (!terms->is_list() || terms->size() != 2)
          throw ParseError(pair.line, pair.column, "equals entry needs 2 terms");
        c.a = Term::parse((*terms)[0].as_atom());
        c.b = Term::parse((*terms)[1].as_atom());
        schema.equals.push_back(c);
      }
    } else {
      throw ParseError(e[i].line, e[i].column, "unknown action key " + key);
    }
  }
  auto is_param = [&](const Term& t) {
    return std::find(schema.params.begin(), schema.params.end(), t) !=
           schema.params.end();
  };
  auto check_vars = [&](const std::vector<Literal>& lits, const char* where,
                        const Sexpr& at) {
    for (const auto& l : lits)
      for (const auto& t : l.args)
        if (t.variable && !is_param(t))
          throw ParseError(at.line, at.column,
                           "variable " + t.text() + " in " + where +
                               " of " + schema.name + " is not a parameter");
  };
  check_vars(schema.adds, "add list", e);
  check_vars(schema.deletes, "delete list", e);
  check_vars(schema.preconds, "precondition", e);
  for (const auto& c : schema.equals) {
    if (c.a.variable && !is_param(c.a))
      throw ParseError(e.line, e.column, "equals variable not a parameter");
    if (c.b.variable && !is_param(c.b))
      throw ParseError(e.line, e.column, "equals variable not a parameter");
  }
  return schema;
}

}  // namespace detail

inline Domain parse_domain(const Sexpr& form) {
  if (!form.is_list() || form.size() < 2 || !form[0].is_atom() ||
      form[0].atom != "define")
    throw ParseError(form.line, form.column, "(define (domain ...) ...) expected");
  const Sexpr& head = form[1];
  if (!head.is_list() || head.size() != 2 || head[0].as_atom() != "domain")
    throw ParseError(head.line, head.column, "(domain NAME) expected");
  Domain d;
  d.name = head[1].as_atom();
  for (size_t i = 2; i < form.size(); ++i) {
    const Sexpr& e = form[i];
    if (!e.is_list() || e.size() == 0 || !e[0].is_atom() ||
        e[0].atom != ":action")
      throw ParseError(e.line, e.column, "(:action ...) expected");
    d.schemas.push_back(detail::parse_action(e, &d.arity));
  }
  return d;
}

inline Problem parse_problem(const Sexpr& form, Domain* domain) {
  if (!form.is_list() || form.size() < 2 || !form[0].is_atom() ||
      form[0].atom != "define")
    throw ParseError(form.line, form.column,
                     "(define (problem ...) ...) expected");
  const Sexpr& head = form[1];
  if (!head.is_list() || head.size() != 2 || head[0].as_atom() != "problem")
    throw ParseError(head.line, head.column, "(problem NAME) expected");
  Problem p;
  p.name = head[1].as_atom();
  for (size_t i = 2; i < form.size(); ++i) {
    const Sexpr& e = form[i];
    if (!e.is_list() || e.size() == 0)
      throw ParseError(e.line, e.column, "problem clause expected");
    const std::string& key = e[0].as_atom();
    if (key == ":domain") {
      p.domain_name = e[1].as_atom();
    } else if (key == ":init") {
      for (size_t j = 1; j < e.size(); ++j) {
        Literal l = detail::parse_literal(e[j], true,
                                          domain ? &domain->arity : nullptr);
        if (!l.ground())
          throw ParseError(e[j].line, e[j].column,
                           "initial condition must be ground");
        p.init.push_back(l);
      }
    } else if (key == ":goal") {
      for (size_t j = 1; j < e.size(); ++j) {
        Literal l = detail::parse_literal(e[j], true,
                                          domain ? &domain->arity : nullptr);
        if (!l.ground())
          throw ParseError(e[j].line, e[j].column, "goal must be ground");
        p.goals.push_back(l);
      }
    } else {
      throw ParseError(e[0].line, e[0].column, "unknown problem clause " + key);
    }
  }
  return p;
}

// Parses a source containing a domain definition and optionally problem
// definitions.  Arities are checked across the whole input.
struct ParsedInput {
  std::optional<Domain> domain;
  std::vector<Problem> problems;
};

inline ParsedInput parse_input(const std::string& text) {
  ParsedInput out;
  for (const Sexpr& form : parse_sexprs(text)) {
    if (form.is_list() && form.size() >= 2 && form[1].is_list() &&
        form[1].size() >= 1 && form[1][0].is_atom() &&
        form[1][0].atom == "domain") {
      out.domain = parse_domain(form);
    } else {
      out.problems.push_back(
          parse_problem(form, out.domain ? &*out.domain : nullptr));
    }
  }
  return out;
}

inline std::pair<Domain, Problem> parse_domain_and_problem(
    const std::string& domain_text, const std::string& problem_text) {
  ParsedInput d = parse_input(domain_text);
  if (!d.domain) throw ParseError(1, 1, "no domain definition found");
  Domain dom = *d.domain;
  ParsedInput p = parse_input(problem_text);
  if (p.problems.empty()) throw ParseError(1, 1, "no problem definition found");
  return {dom, p.problems.front()};
}

}  // namespace replan

#endif  // REPLAN_DOMAIN_HPP
