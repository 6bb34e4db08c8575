#ifndef REPLAN_TERMS_HPP
#define REPLAN_TERMS_HPP

// Symbols, terms and literals.  Symbols are interned process-wide so that
// plans can be copied and compared cheaply; variables are written with a
// leading '?'.

#include <cstdint>
#include <mutex>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

namespace replan {

class SymbolTable {
 public:
  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }

  std::uint32_t intern(const std::string& text) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = ids_.find(text);
    if (it != ids_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(texts_.size());
    texts_.push_back(text);
    ids_.emplace(text, id);
    return id;
  }

  const std::string& text(std::uint32_t id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return texts_[id];
  }

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> texts_;
};

// A constant or variable symbol.  Variables carry a leading '?'.
struct Term {
  std::uint32_t id = 0;
  bool variable = false;

  Term() = default;

  static Term constant(const std::string& name) {
    Term t;
    t.id = SymbolTable::instance().intern(name);
    t.variable = false;
    return t;
  }
  static Term var(const std::string& name) {
    Term t;
    t.id = SymbolTable::instance().intern(name);
    t.variable = true;
    return t;
  }
  // Classifies by the leading '?' convention.
  static Term parse(const std::string& name) {
    return (!name.empty() && name[0] == '?') ? var(name) : constant(name);
  }

  const std::string& text() const { return SymbolTable::instance().text(id); }

  bool operator==(const Term& o) const {
    return id == o.id && variable == o.variable;
  }
  bool operator!=(const Term& o) const { return !(*this == o); }
  bool operator<(const Term& o) const {
    if (variable != o.variable) return variable < o.variable;
    return id < o.id;
  }
};

inline std::ostream& operator<<(std::ostream& os, const Term& t) {
  return os << t.text();
}

// A signed predicate application.
struct Literal {
  bool positive = true;
  std::uint32_t pred = 0;
  std::vector<Term> args;

  Literal() = default;
  Literal(bool positive_, const std::string& pred_, std::vector<Term> args_)
      : positive(positive_),
        pred(SymbolTable::instance().intern(pred_)),
        args(std::move(args_)) {}

  const std::string& pred_text() const {
    return SymbolTable::instance().text(pred);
  }

  Literal negated() const {
    Literal l = *this;
    l.positive = !l.positive;
    return l;
  }

  bool operator==(const Literal& o) const {
    return positive == o.positive && pred == o.pred && args == o.args;
  }
  bool operator!=(const Literal& o) const { return !(*this == o); }
  bool operator<(const Literal& o) const {
    if (positive != o.positive) return positive < o.positive;
    if (pred != o.pred) return pred < o.pred;
    return args < o.args;
  }

  bool ground() const {
    for (const Term& t : args)
      if (t.variable) return false;
    return true;
  }
};

inline std::ostream& operator<<(std::ostream& os, const Literal& l) {
  if (!l.positive) os << "(not ";
  os << '(' << l.pred_text();
  for (const Term& t : l.args) os << ' ' << t;
  os << ')';
  if (!l.positive) os << ')';
  return os;
}

inline std::string to_string(const Literal& l) {
  std::ostringstream ss;
  ss << l;
  return ss.str();
}

}  // namespace replan

#endif  // REPLAN_TERMS_HPP
