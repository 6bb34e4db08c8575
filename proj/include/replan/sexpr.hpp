#ifndef REPLAN_SEXPR_HPP
#define REPLAN_SEXPR_HPP

// Minimal s-expression reader/writer used by the domain/problem/trace/case
// file formats.  Atoms are bare symbols; parentheses build lists.  Comments
// run from ';' to end of line.

#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace replan {

struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(int line_, int col_, const std::string& what_)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + what_),
        line(line_),
        column(col_) {}
};

struct Sexpr {
  enum class Kind { Atom, List };
  Kind kind = Kind::List;
  std::string atom;
  std::vector<Sexpr> items;
  int line = 0;
  int column = 0;

  bool is_atom() const { return kind == Kind::Atom; }
  bool is_list() const { return kind == Kind::List; }
  size_t size() const { return items.size(); }
  const Sexpr& operator[](size_t i) const { return items[i]; }

  static Sexpr make_atom(std::string s) {
    Sexpr e;
    e.kind = Kind::Atom;
    e.atom = std::move(s);
    return e;
  }
  static Sexpr make_list(std::vector<Sexpr> xs = {}) {
    Sexpr e;
    e.kind = Kind::List;
    e.items = std::move(xs);
    return e;
  }

  // Requires an atom; error otherwise.
  const std::string& as_atom() const {
    if (!is_atom()) throw ParseError(line, column, "expected atom, got list");
    return atom;
  }

  void print(std::ostream& os) const {
    if (is_atom()) {
      os << atom;
      return;
    }
    os << '(';
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) os << ' ';
      items[i].print(os);
    }
    os << ')';
  }

  std::string str() const {
    std::ostringstream ss;
    print(ss);
    return ss.str();
  }
};

class SexprReader {
 public:
  explicit SexprReader(std::string text) : text_(std::move(text)) {}

  // Reads every top-level form in the input.
  std::vector<Sexpr> read_all() {
    std::vector<Sexpr> out;
    skip_ws();
    while (!eof()) {
      out.push_back(read_form());
      skip_ws();
    }
    return out;
  }

  Sexpr read_form() {
    skip_ws();
    if (eof()) throw ParseError(line_, col_, "unexpected end of input");
    int l = line_, c = col_;
    char ch = peek();
    if (ch == '(') {
      get();
      Sexpr list = Sexpr::make_list();
      list.line = l;
      list.column = c;
      skip_ws();
      while (!eof() && peek() != ')') {
        list.items.push_back(read_form());
        skip_ws();
      }
      if (eof()) throw ParseError(l, c, "unterminated list");
      get();  // ')'
      return list;
    }
    if (ch == ')') throw ParseError(line_, col_, "unexpected ')'");
    std::string atom;
    while (!eof() && !is_delim(peek())) atom.push_back(get());
    Sexpr e = Sexpr::make_atom(std::move(atom));
    e.line = l;
    e.column = c;
    return e;
  }

 private:
  static bool is_delim(char c) {
    return c == '(' || c == ')' || c == ';' || std::isspace(
        static_cast<unsigned char>(c));
  }
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char get() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == ';') {
        while (!eof() && peek() != '\n') get();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        get();
      } else {
        break;
      }
    }
  }

  std::string text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline std::vector<Sexpr> parse_sexprs(const std::string& text) {
  return SexprReader(text).read_all();
}

}  // namespace replan

#endif  // REPLAN_SEXPR_HPP
