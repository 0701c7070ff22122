// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Top-level verification loop. Proves the protocol on a finite instance,
// then decides whether the invariant transcends that instance: every
// independent sort is grown by one and the invariant must stay inductive
// on each enlarged instance. Passing all checks establishes the cutoff and
// the quantified invariant is emitted as a certificate, together with the
// unbounded induction goals for an off-line quantified solver. A failed
// check names the sort whose size was hiding behavior; the loop grows it,
// reseeds the engine with the predicates that survive, and reruns.

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "symquant/engine.hpp"
#include "symquant/ground.hpp"
#include "symquant/quantinfer.hpp"
#include "symquant/spec.hpp"

namespace symquant {

struct ConvergeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Outcome : uint8_t { Safe, Violated, ResourcesExhausted };

// Status of the two quantified induction goals (initiation, consecution).
enum class UnboundedStatus : uint8_t {
  NotRun,        // goals were not handed to a solver
  Confirmed,     // both goals answered unsat
  NotConfirmed,  // solver timed out, errored, or answered unknown
  Refuted,       // a goal answered sat: the invariant is size-specific
};

const char* to_string(Outcome o);
const char* to_string(UnboundedStatus s);

struct ConvergeOptions {
  // Per-instance engine configuration (solver command, budgets, orbit
  // checks). The seeds field is managed by the loop itself.
  SymIC3::Config engine;
  uint64_t max_vars = 1000000;  // ground state variable cap per instance
  double timeout_seconds = 0;   // whole-run wall budget; 0 disables
  std::string emit_unbounded;   // path for the quantified goals; "" skips
  bool check_unbounded = false; // also run the goals through a solver
  // Command for the quantified goals; empty reuses the engine solver. The
  // goals carry quantifiers, so a quantifier-free solver will answer with
  // errors and the status stays NotConfirmed.
  std::string unbounded_solver_cmd;
  double unbounded_timeout_seconds = 30;
  bool oracle_check = false;    // exhaustively re-verify small instances
  bool antecedent_reduction = false;
  bool epr_reduction = false;
};

struct CutoffOutcome {
  bool pass = false;
  int failed_sort = -1;      // independent sort that broke a check
  bool non_compact = false;  // invariant cannot expand on other instances
  uint64_t smt_checks = 0;
};

// Finite convergence checks: for each independent sort, builds the
// instance with that sort grown by one (dependent sorts recomputed),
// expands the invariant there, and requires initiation and consecution.
// Two queries per sort; stops at the first failure.
CutoffOutcome check_cutoff(std::shared_ptr<const ProtocolSpec> spec,
                           const SizeAssignment& sizes,
                           const std::vector<QuantifiedPredicate>& inv,
                           const SolverClient::Config& solver,
                           uint64_t max_vars = 1000000);

struct ConvergeResult {
  Outcome outcome = Outcome::Safe;
  SizeAssignment base_sizes;
  SizeAssignment sizes;             // where the verdict was reached
  std::vector<std::string> growth;  // sort grown at each iteration
  // Safe: strengthening assertions in learned order; with the safety
  // property they form the inductive invariant at `sizes` and, when the
  // cutoff checks passed, at every larger size.
  std::vector<QuantifiedPredicate> invariant;
  // Violated: one total state-variable assignment per step, at `sizes`.
  std::vector<std::vector<int8_t>> trace;
  std::vector<std::string> trace_vars;  // variable names, index-aligned
  std::string reason;                   // ResourcesExhausted
  UnboundedStatus unbounded = UnboundedStatus::NotRun;
  EngineStats stats;  // accumulated; frames is from the last iteration
  uint32_t iterations = 0;
  double wall_seconds = 0;
};

// The loop described at the top of this header.
ConvergeResult run_converge(std::shared_ptr<const ProtocolSpec> spec,
                            const SizeAssignment& base,
                            const ConvergeOptions& opts);

// Base sizes when the caller gives none: two constants per independent
// sort, one when the safety property binds exactly one variable of the
// sort. A convention, not an analysis.
SizeAssignment default_base_sizes(const ProtocolSpec& spec);

// Writes the two induction goals over uninterpreted sorts as a standalone
// SMT-LIB2 file: sorts, membership axioms for dependent sorts, both-phase
// relation and definition symbols, then one (check-sat) per goal behind an
// (echo "goal:...") marker. Both goals are expected unsat.
void emit_unbounded_check(const ProtocolSpec& spec,
                          const std::vector<QuantifiedPredicate>& inv,
                          const std::string& path);

// Certificate: verdict, sizes, safety, and the strengthening assertions
// printed in the spec formula grammar, one s-expression per line. The
// bytes are a pure function of the result, so identical runs write
// identical files.
std::string certificate_text(const ProtocolSpec& spec,
                             const ConvergeResult& r);

// Run summary as JSON: verdict, sizes, growth history, statistics,
// timing, and the assertion texts.
std::string result_json(const ProtocolSpec& spec, const ConvergeResult& r);

}  // namespace symquant
