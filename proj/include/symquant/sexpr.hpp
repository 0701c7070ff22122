// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace symquant {

struct SexprError : std::runtime_error {
  int line, col;
  SexprError(int line_, int col_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

// One node of an s-expression tree. Atoms keep their token text verbatim;
// lists keep children in order. line/col point at the first token of the node.
struct Sexpr {
  bool atom = false;
  std::string text;
  std::vector<Sexpr> kids;
  int line = 0, col = 0;

  bool is_list() const { return !atom; }
  size_t size() const { return kids.size(); }
  const Sexpr& operator[](size_t i) const { return kids[i]; }

  // True for a list whose first element is the given atom.
  bool head_is(const std::string& s) const {
    return !atom && !kids.empty() && kids[0].atom && kids[0].text == s;
  }

  std::string to_string() const;
};

// Parses a buffer of zero or more top-level forms. ';' starts a comment that
// runs to end of line. Throws SexprError on lexical or bracket errors.
std::vector<Sexpr> parse_sexprs(const std::string& text);

}  // namespace symquant
