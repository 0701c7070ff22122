// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Explicit-state reference checker. Enumerates reachable states by breadth
// first search with packed bit-vector states and checks candidate
// invariants by direct evaluation, sharing no reasoning machinery with the
// SAT-based engine. Intended for cross-validation on small instances.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "symquant/ground.hpp"

namespace symquant {

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReachResult {
  bool safe = true;
  uint64_t num_reachable = 0;
  // When unsafe: an initial state, one state per step, ending in a state
  // that violates the safety property.
  std::vector<uint64_t> trace;
};

// All states satisfying a current-phase condition, in increasing order.
std::vector<uint64_t> enumerate_states(const FiniteInstance& inst,
                                       const GRef& cond);

// All one-step successors of a state, in increasing order.
std::vector<uint64_t> successors(const FiniteInstance& inst, uint64_t state);

// Breadth-first reachability; throws OracleError when the instance has
// more state bits than max_vars allows.
ReachResult bfs_reach(const FiniteInstance& inst, uint32_t max_vars = 24);

struct InvariantCheck {
  bool init_ok = true;         // every initial state satisfies inv
  bool consecution_ok = true;  // inv is closed under transitions
  bool safety_ok = true;       // inv implies the safety property
  std::optional<uint64_t> witness_state;
  std::optional<uint64_t> witness_next;
  bool holds() const { return init_ok && consecution_ok && safety_ok; }
};

// Checks the inductive-invariant conditions for safety-conjoined-with-
// clauses: an empty clause set checks the safety property by itself.
InvariantCheck check_invariant_explicit(const FiniteInstance& inst,
                                        const std::vector<GroundClause>& inv,
                                        uint32_t max_vars = 24);

// Validates a counterexample trace independently: the first state must be
// initial, adjacent states must be transitions, and the last state must
// violate safety. On failure `why` explains the first broken link.
bool replay_trace(const FiniteInstance& inst,
                  const std::vector<std::vector<int8_t>>& states,
                  std::string* why = nullptr);

}  // namespace symquant
