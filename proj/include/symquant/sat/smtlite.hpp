// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// A small SMT-LIB2 front end for the quantifier-free Boolean fragment,
// backed by the bundled CDCL solver. Ships as the `smtlite` binary so the
// verifier always has a conforming solver process to talk to; any external
// solver speaking the same subset (z3, cvc5) is a drop-in replacement.
//
// Supported commands: set-option, set-logic, set-info, declare-const,
// declare-fun (nullary), define-fun (nullary), assert, push, pop,
// check-sat, check-sat-assuming, get-model, get-unsat-core, echo, exit.
// All sorts must be Bool. Unsat cores are reported over the literals
// passed to check-sat-assuming, matching how z3 treats assumptions.

#pragma once

#include <iostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "symquant/sat/cdcl.hpp"
#include "symquant/sexpr.hpp"

namespace symquant::smtlite {

class Session {
 public:
  explicit Session(std::ostream& out) : out_(out) {}

  // Executes one command; returns false once (exit) is seen.
  bool command(const Sexpr& sx);

  // Reads commands until EOF or (exit). Returns the process exit code.
  int run(std::istream& in);

 private:
  sat::Lit translate(const Sexpr& sx);
  sat::Lit lookup(const std::string& name, const Sexpr& at);
  sat::Lit fresh_gate();
  void bind(const std::string& name, sat::Lit lit, bool declared);
  void reply_success();
  void error(const std::string& msg);

  std::ostream& out_;
  sat::Solver solver_;
  std::unordered_map<std::string, sat::Lit> symbols_;

  struct Binding {
    std::string name;
    bool declared;  // declare-const/declare-fun as opposed to define-fun
  };
  struct Scope {
    sat::Lit guard;
    size_t bindings_mark;
  };
  std::vector<Binding> bindings_;  // in declaration order, for get-model
  std::vector<Scope> scopes_;

  bool print_success_ = false;
  int last_status_ = 0;  // 1 sat, -1 unsat, 0 none
  std::vector<std::pair<sat::Lit, std::string>> last_assumed_;
};

}  // namespace symquant::smtlite
