// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/sexpr.hpp"

namespace symquant {

namespace {

bool atom_char(char c) {
  return c != '(' && c != ')' && c != ';' && !isspace(static_cast<unsigned char>(c));
}

struct Lexer {
  const std::string& text;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& t) : text(t) {}

  void bump(char c) {
    if (c == '\n') {
      line++;
      col = 1;
    } else {
      col++;
    }
    pos++;
  }

  void skip_blank() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {
        while (pos < text.size() && text[pos] != '\n') bump(text[pos]);
      } else if (isspace(static_cast<unsigned char>(c))) {
        bump(c);
      } else {
        return;
      }
    }
  }

  bool done() {
    skip_blank();
    return pos >= text.size();
  }
};

Sexpr parse_one(Lexer& lx) {
  lx.skip_blank();
  if (lx.pos >= lx.text.size())
    throw SexprError(lx.line, lx.col, "unexpected end of input");
  Sexpr node;
  node.line = lx.line;
  node.col = lx.col;
  char c = lx.text[lx.pos];
  if (c == '(') {
    lx.bump(c);
    for (;;) {
      lx.skip_blank();
      if (lx.pos >= lx.text.size())
        throw SexprError(node.line, node.col, "unclosed '('");
      if (lx.text[lx.pos] == ')') {
        lx.bump(')');
        return node;
      }
      node.kids.push_back(parse_one(lx));
    }
  }
  if (c == ')') throw SexprError(lx.line, lx.col, "unmatched ')'");
  node.atom = true;
  if (c == '"') {
    // String literal; "" escapes a quote. The text keeps its delimiters.
    node.text.push_back('"');
    lx.bump(c);
    for (;;) {
      if (lx.pos >= lx.text.size())
        throw SexprError(node.line, node.col, "unclosed string literal");
      char d = lx.text[lx.pos];
      node.text.push_back(d);
      lx.bump(d);
      if (d == '"') {
        if (lx.pos < lx.text.size() && lx.text[lx.pos] == '"') {
          lx.bump('"');
          continue;
        }
        return node;
      }
    }
  }
  while (lx.pos < lx.text.size() && atom_char(lx.text[lx.pos])) {
    node.text.push_back(lx.text[lx.pos]);
    lx.bump(lx.text[lx.pos]);
  }
  return node;
}

}  // namespace

std::vector<Sexpr> parse_sexprs(const std::string& text) {
  Lexer lx(text);
  std::vector<Sexpr> out;
  while (!lx.done()) out.push_back(parse_one(lx));
  return out;
}

std::string Sexpr::to_string() const {
  if (atom) return text;
  std::string s = "(";
  for (size_t i = 0; i < kids.size(); i++) {
    if (i) s += ' ';
    s += kids[i].to_string();
  }
  s += ')';
  return s;
}

}  // namespace symquant
