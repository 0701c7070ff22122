// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Property-directed reachability with symmetry boosting. The engine runs
// standard IC3 on a finite instance, except that every clause learned from
// a generalized counterexample-to-induction is closed under the instance's
// symmetry group and stored as one quantified predicate covering the whole
// orbit. Frames are predicate sets tagged with levels: frame k is the
// safety property plus every predicate of level k or higher, so pushing a
// predicate forward is a level bump and convergence is an empty level.

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "symquant/ground.hpp"
#include "symquant/quantinfer.hpp"
#include "symquant/solver.hpp"
#include "symquant/symmetry.hpp"

namespace symquant {

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TimeoutError : EngineError {
  using EngineError::EngineError;
};

enum class Verdict : uint8_t { Safe, Violated };

struct EngineStats {
  uint64_t smt_checks = 0;      // total solver queries issued
  uint64_t ctis = 0;            // states extracted from sat queries
  uint64_t clauses_learned = 0; // generalized cubes turned into predicates
  uint64_t orbit_checks = 0;    // debug-mode permuted blocking queries
  uint32_t seeds_installed = 0; // transferred predicates accepted at level 1
  uint32_t frames = 0;          // highest frame reached
};

struct EngineResult {
  Verdict verdict = Verdict::Safe;
  // Safe: the inductive invariant is the safety property plus these
  // predicates, in the order they were learned (pruned of redundancy).
  std::vector<QuantifiedPredicate> invariant;
  // Violated: initial state through to a safety violation, one total
  // assignment of the state variables per step.
  std::vector<std::vector<int8_t>> trace;
  EngineStats stats;
};

class SymIC3 {
 public:
  struct Config {
    SolverClient::Config solver;
    // Predicates carried over from another instance of the same protocol;
    // each is re-expanded here and installed at level 1 when it holds
    // initially and after one step. Non-compact entries are ignored.
    std::vector<QuantifiedPredicate> seeds;
    // When positive, each learned clause is re-checked under this many
    // random group elements: the permuted blocking query must be unsat.
    uint32_t orbit_check_samples = 0;
    uint32_t orbit_check_seed = 1;
    double timeout_seconds = 0;    // 0 disables the deadline
    uint64_t max_checks = 0;       // 0 disables the query budget
    uint32_t max_frames = 10000;
    uint64_t max_group = 1000000;  // symmetry enumeration budget
  };

  SymIC3(std::shared_ptr<const FiniteInstance> inst, Config config);
  EngineResult run();

  const SymmetryGroup& group() const { return group_; }

 private:
  struct Learned {
    QuantifiedPredicate pred;
    uint32_t level = 0;
    std::string sel;
    std::string curr_text;                // conjunction of ground clauses
    std::vector<std::string> next_texts;  // per-clause next-phase rendering
    bool dropped = false;
  };

  std::vector<std::string> frame_assumptions(uint32_t level) const;
  GroundCube extended_cube(const std::vector<int8_t>& state) const;
  bool cube_intersects_init(const GroundCube& cube);
  bool state_in_init(const std::vector<int8_t>& state);
  bool block(const GroundCube& cube, const std::vector<int8_t>& state,
             uint32_t level);
  GroundCube generalize(GroundCube cube, const GroundCube& full,
                        uint32_t level);
  void learn(const GroundCube& cube, uint32_t level);
  void install_seeds();
  bool propagate(uint32_t max_level, uint32_t* converged_at);
  void finalize_invariant(uint32_t converged_at, EngineResult* out);
  void validate_invariant();
  void prune_invariant();
  void orbit_debug_checks(const GroundCube& cube, uint32_t level);
  QueryResult query(const std::vector<std::string>& assumptions,
                    const std::vector<std::string>& asserts, bool want_model,
                    bool want_core);
  void check_limits();

  std::shared_ptr<const FiniteInstance> inst_;
  Config config_;
  SolverClient client_;
  SymmetryGroup group_;
  std::vector<Learned> preds_;
  std::string safety_curr_;     // rendered ground safety, both phases
  std::string safety_next_;
  // Fast initial-state test when the ground initial condition is a cube:
  // value per variable, -1 when unconstrained; empty when not a cube.
  std::vector<int8_t> init_cube_;
  bool init_is_cube_ = false;
  std::vector<std::vector<int8_t>> path_;  // states along the blocking stack
  std::vector<std::vector<int8_t>> trace_;
  std::vector<int8_t> bad_state_;          // successor violating safety
  EngineStats stats_;
  double deadline_ = 0;
};

}  // namespace symquant
