// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Client for an external SMT-LIB2 solver process. All reasoning happens in
// the quantifier-free Boolean fragment: state variables become Bool
// constants (current and next phase), definitions become define-fun
// macros, and the transition relation, initial condition, and safety
// property are asserted behind selector literals so individual queries can
// enable exactly the parts they need with check-sat-assuming.

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "symquant/ground.hpp"

namespace symquant {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SMT symbol naming. Every ground state variable and auxiliary definition
// instance gets a stable name; the next-phase copy carries a __p suffix.
std::string smt_name(const FiniteInstance& inst, VarId v, Phase ph);
std::string smt_aux_name(const FiniteInstance& inst, int rel,
                         const std::vector<uint32_t>& args, Phase ph);
std::string lit_text(const FiniteInstance& inst, const GroundLit& lit,
                     Phase ph);
std::string clause_text(const FiniteInstance& inst, const GroundClause& c,
                        Phase ph);
std::string cube_text(const FiniteInstance& inst, const GroundCube& c,
                      Phase ph);
// Renders a grounded formula; Var and Aux leaves carry their own phase.
std::string render_smt(const FiniteInstance& inst, const GRef& g);

// Line-oriented conversation with a solver subprocess. The command line is
// split on whitespace and spawned directly without a shell.
class SmtProcess {
 public:
  SmtProcess(const std::string& cmdline, const std::string& log_path = "");
  ~SmtProcess();
  SmtProcess(const SmtProcess&) = delete;
  SmtProcess& operator=(const SmtProcess&) = delete;

  void send(const std::string& text);
  std::string read_line();
  // Reads one s-expression response (possibly spanning lines).
  std::string read_balanced();
  bool logging() const { return log_.is_open(); }
  void log_note(const std::string& note);

 private:
  int pid_ = -1;
  FILE* to_ = nullptr;
  FILE* from_ = nullptr;
  std::ofstream log_;
};

struct QueryResult {
  bool sat = false;
  // Current and next state extracted from the model (when requested).
  std::vector<int8_t> state;
  std::vector<int8_t> next_state;
  std::map<std::string, bool> model;
  // Failed assumptions, textually as they were passed in (when requested).
  std::vector<std::string> core;
};

class SolverClient {
 public:
  struct Config {
    std::string cmd;
    uint32_t seed = 1;
    std::string log_path;
  };

  SolverClient(std::shared_ptr<const FiniteInstance> inst,
               const Config& config);

  const FiniteInstance& inst() const { return *inst_; }

  // Base selectors installed at construction.
  const std::string& init_sel() const { return init_sel_; }
  const std::string& trans_sel() const { return trans_sel_; }
  const std::string& safety_sel() const { return safety_sel_; }
  const std::string& safety_next_sel() const { return safety_next_sel_; }

  // Declares a fresh selector s and asserts (=> s formula). The formula is
  // SMT text over already-declared symbols.
  std::string add_selector(const std::string& formula_text);

  // One solver query under push/pop: temporary assertions plus assumption
  // literals. Model extraction fills state/next_state; core extraction
  // returns the failed subset of `assumptions`.
  QueryResult check(const std::vector<std::string>& assumptions,
                    const std::vector<std::string>& asserts, bool want_model,
                    bool want_core);

  uint64_t num_checks() const { return checks_; }
  void comment(const std::string& text);

 private:
  void expect_success();
  void command(const std::string& text);  // send + expect success

  std::shared_ptr<const FiniteInstance> inst_;
  SmtProcess proc_;
  std::string init_sel_, trans_sel_, safety_sel_, safety_next_sel_;
  int next_sel_ = 0;
  uint64_t checks_ = 0;
};

}  // namespace symquant
