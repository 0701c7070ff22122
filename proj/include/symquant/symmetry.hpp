// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// The symmetry group of a finite instance: the product of the full
// symmetric groups over the independent sorts. Constants of dependent
// sorts move along: permuting the base constants maps each member set to
// another member set, and the image constant is found by canonicalizing
// the permuted set. Orbits of ground clauses under this action are the
// raw material for quantifier inference.

#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "symquant/ground.hpp"

namespace symquant {

struct SymmetryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Total action on constants: maps[sort][i] is the image of constant i.
// Dependent sort rows are derived from the base rows at construction.
struct Permutation {
  std::vector<std::vector<uint32_t>> maps;
};

// Builds the action from images of the independent sorts only (missing
// entries mean identity). Dependent rows are computed via member sets.
Permutation make_permutation(
    const FiniteInstance& inst,
    const std::map<int, std::vector<uint32_t>>& independent);

// The full induced action that swaps two constants of an independent sort.
Permutation make_transposition(const FiniteInstance& inst, int sort,
                               uint32_t a, uint32_t b);

GroundLit apply_lit(const FiniteInstance& inst, const Permutation& p,
                    const GroundLit& lit);
GroundClause apply_clause(const FiniteInstance& inst, const Permutation& p,
                          const GroundClause& c);
GroundCube apply_cube(const FiniteInstance& inst, const Permutation& p,
                      const GroundCube& c);
uint64_t apply_state(const FiniteInstance& inst, const Permutation& p,
                     uint64_t state);

class SymmetryGroup {
 public:
  // Enumerates the whole group; throws SymmetryError past max_elements.
  static SymmetryGroup build(const FiniteInstance& inst,
                             uint64_t max_elements = 1000000);
  size_t size() const { return elements_.size(); }
  const Permutation& operator[](size_t i) const { return elements_[i]; }
  auto begin() const { return elements_.begin(); }
  auto end() const { return elements_.end(); }

 private:
  std::vector<Permutation> elements_;
};

// Constants occurring in direct argument positions of the clause, per
// sort, sorted. Members of dependent constants do not count as occurring.
std::map<int, std::vector<uint32_t>> occurring_constants(
    const FiniteInstance& inst, const GroundClause& c);

// Partition of the occurring constants of one sort into interchangeable
// cells: two constants share a cell when swapping them leaves the clause
// unchanged. For independent sorts the swap is the full induced action;
// for dependent sorts it exchanges the two constants positionally.
std::vector<std::vector<uint32_t>> interchangeable_cells(
    const FiniteInstance& inst, const GroundClause& c, int sort);

// All distinct images of the clause under the group, sorted. The serial
// form is the reference implementation; the parallel form splits the
// group across OpenMP threads and produces the same sorted result.
std::vector<GroundClause> logical_orbit_serial(const FiniteInstance& inst,
                                               const SymmetryGroup& g,
                                               const GroundClause& c);
std::vector<GroundClause> logical_orbit_parallel(const FiniteInstance& inst,
                                                 const SymmetryGroup& g,
                                                 const GroundClause& c);
// Dispatches to the parallel form for large groups when built with OpenMP.
std::vector<GroundClause> logical_orbit(const FiniteInstance& inst,
                                        const SymmetryGroup& g,
                                        const GroundClause& c);

}  // namespace symquant
