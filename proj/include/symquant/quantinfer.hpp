// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Quantifier inference: lifts the orbit of a learned ground clause to a
// quantified predicate over the protocol sorts. Each sort is handled by a
// case analysis on how many of its constants the clause uses and how they
// partition into interchangeable cells:
//
//   - fewer constants than the sort has: fresh universal variables with a
//     pairwise-distinct guard;
//   - all constants in one interchangeable cell: collapse to a single
//     existential variable;
//   - singleton cells plus one interchangeable cell: universals for the
//     singletons, an existential for the cell, kept distinct from them;
//   - anything else: universals over all constants (exact for independent
//     sorts, where distinct assignments enumerate precisely the orbit).
//
// The construction is validated by expanding the candidate back to ground
// clauses and comparing against the enumerated orbit. On mismatch the
// predicate keeps the orbit as an explicit conjunction and is marked
// non-compact; non-compact predicates cannot justify unbounded claims.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symquant/symmetry.hpp"

namespace symquant {

struct QVar {
  std::string name;
  int sort;
  bool operator==(const QVar&) const = default;
};

struct QLit {
  int rel;
  std::vector<std::string> args;
  bool positive;
  bool operator==(const QLit&) const = default;
};

// One disjunct of the matrix. With an existential variable the branch
// reads: exists E of exist_sort, distinct from the listed universals,
// such that some literal holds.
struct QBranch {
  std::string exist_var;  // empty when the branch is purely universal
  int exist_sort = -1;
  std::vector<std::string> exist_distinct_from;
  std::vector<QLit> lits;
  bool operator==(const QBranch&) const = default;
};

struct QuantifiedPredicate {
  std::vector<QVar> universals;
  // Pairwise-distinct guards, one group per sort with several universals.
  std::vector<std::vector<std::string>> distinct_groups;
  std::vector<QBranch> branches;
  bool compact = true;
  // The ground expansion on the instance the predicate was inferred on;
  // for non-compact predicates this is the literal orbit.
  std::vector<GroundClause> ground_clauses;
};

struct ExpandStats {
  uint64_t assignments = 0;  // universal tuples enumerated
  uint64_t vacuous = 0;      // tuples failing a distinct guard
  uint64_t emitted = 0;      // clause instances produced (before dedup)
  uint64_t tautologies = 0;  // instances dropped as trivially true
};

// Lifts a ground clause to a quantified predicate via its orbit.
QuantifiedPredicate sym_boost(const FiniteInstance& inst,
                              const SymmetryGroup& group,
                              const GroundClause& clause);

// Grounds the predicate on an instance (any size assignment over the same
// protocol). Non-compact predicates only expand on their home instance.
std::vector<GroundClause> expand(const FiniteInstance& inst,
                                 const QuantifiedPredicate& pred,
                                 ExpandStats* stats = nullptr);

// Compact predicates mention no instance constants and carry over to
// other instance sizes; non-compact ones are tied to their home instance.
inline bool transferable(const QuantifiedPredicate& pred) {
  return pred.compact;
}

// Drops distinct guards whose removal adds no new ground clauses (the new
// instantiations are tautological or already present). Off by default.
void antecedent_reduction(const FiniteInstance& inst,
                          QuantifiedPredicate& pred);

// Quantifier alternation over sorts across a set of predicates. An edge
// s -> t means some predicate puts a universal of s in scope over an
// existential of t; a cycle breaks stratification (the invariant then
// falls outside the decidable forall-exists fragment).
struct EprReport {
  bool stratified = true;
  std::vector<int> cycle_sorts;
};
EprReport epr_check(const ProtocolSpec& spec,
                    const std::vector<QuantifiedPredicate>& preds);

// Restores stratification by demoting the offending existential branches
// to their ground expansion (the predicate becomes non-compact).
void epr_reduction(const FiniteInstance& inst,
                   std::vector<QuantifiedPredicate>& preds);

// Renders the predicate with the protocol formula grammar, so certificate
// entries parse back as formulas.
std::string print_predicate(const ProtocolSpec& spec,
                            const QuantifiedPredicate& pred);
std::string print_predicate_ground(const FiniteInstance& inst,
                                   const QuantifiedPredicate& pred);

}  // namespace symquant
