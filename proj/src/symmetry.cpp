// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/symmetry.hpp"

#include <algorithm>

#include "symquant/spec.hpp"

namespace symquant {

namespace {

// Fills the rows of dependent sorts from the (already filled) base rows.
void derive_dependent_rows(const FiniteInstance& inst, Permutation& p) {
  const ProtocolSpec& spec = *inst.spec;
  for (size_t s = 0; s < spec.sorts.size(); s++) {
    if (spec.sorts[s].kind != SortKind::DependentMajority) continue;
    int base = spec.sorts[s].base;
    auto& row = p.maps[s];
    row.resize(inst.consts[s].size());
    for (size_t i = 0; i < inst.consts[s].size(); i++) {
      std::vector<uint32_t> image;
      for (uint32_t m : inst.consts[s][i].members)
        image.push_back(p.maps[base][m]);
      std::sort(image.begin(), image.end());
      auto it = inst.member_index[s].find(image);
      if (it == inst.member_index[s].end())
        throw SymmetryError("permuted member set has no constant");
      row[i] = it->second;
    }
  }
}

}  // namespace

Permutation make_permutation(
    const FiniteInstance& inst,
    const std::map<int, std::vector<uint32_t>>& independent) {
  const ProtocolSpec& spec = *inst.spec;
  Permutation p;
  p.maps.resize(spec.sorts.size());
  for (size_t s = 0; s < spec.sorts.size(); s++) {
    if (spec.sorts[s].kind == SortKind::DependentMajority) continue;
    auto it = independent.find(static_cast<int>(s));
    if (it != independent.end()) {
      if (it->second.size() != inst.consts[s].size())
        throw SymmetryError("permutation size mismatch");
      p.maps[s] = it->second;
    } else {
      p.maps[s].resize(inst.consts[s].size());
      for (uint32_t i = 0; i < p.maps[s].size(); i++) p.maps[s][i] = i;
    }
  }
  derive_dependent_rows(inst, p);
  return p;
}

Permutation make_transposition(const FiniteInstance& inst, int sort,
                               uint32_t a, uint32_t b) {
  std::vector<uint32_t> row(inst.consts[sort].size());
  for (uint32_t i = 0; i < row.size(); i++) row[i] = i;
  std::swap(row[a], row[b]);
  return make_permutation(inst, {{sort, row}});
}

GroundLit apply_lit(const FiniteInstance& inst, const Permutation& p,
                    const GroundLit& lit) {
  const auto& sorts = inst.spec->relations[lit.rel].arg_sorts;
  GroundLit out = lit;
  for (size_t i = 0; i < out.args.size(); i++)
    out.args[i] = p.maps[sorts[i]][out.args[i]];
  return out;
}

GroundClause apply_clause(const FiniteInstance& inst, const Permutation& p,
                          const GroundClause& c) {
  std::vector<GroundLit> lits;
  lits.reserve(c.lits.size());
  for (const auto& l : c.lits) lits.push_back(apply_lit(inst, p, l));
  return make_clause(std::move(lits));
}

GroundCube apply_cube(const FiniteInstance& inst, const Permutation& p,
                      const GroundCube& c) {
  std::vector<GroundLit> lits;
  lits.reserve(c.lits.size());
  for (const auto& l : c.lits) lits.push_back(apply_lit(inst, p, l));
  return make_cube(std::move(lits));
}

uint64_t apply_state(const FiniteInstance& inst, const Permutation& p,
                     uint64_t state) {
  uint64_t out = 0;
  for (VarId v = 0; v < inst.num_state_vars; v++) {
    if (!((state >> v) & 1)) continue;
    const auto& info = inst.var_info(v);
    std::vector<uint32_t> args = info.args;
    const auto& sorts = inst.spec->relations[info.rel].arg_sorts;
    for (size_t i = 0; i < args.size(); i++)
      args[i] = p.maps[sorts[i]][args[i]];
    out |= 1ull << inst.state_var(info.rel, args);
  }
  return out;
}

SymmetryGroup SymmetryGroup::build(const FiniteInstance& inst,
                                   uint64_t max_elements) {
  const ProtocolSpec& spec = *inst.spec;
  std::vector<int> sorts;
  std::vector<std::vector<std::vector<uint32_t>>> perms_by_sort;
  uint64_t total = 1;
  for (size_t s = 0; s < spec.sorts.size(); s++) {
    if (spec.sorts[s].kind == SortKind::DependentMajority) continue;
    std::vector<uint32_t> row(inst.consts[s].size());
    for (uint32_t i = 0; i < row.size(); i++) row[i] = i;
    std::vector<std::vector<uint32_t>> perms;
    do {
      perms.push_back(row);
      if (total * perms.size() > max_elements)
        throw SymmetryError("symmetry group exceeds the element budget");
    } while (std::next_permutation(row.begin(), row.end()));
    sorts.push_back(static_cast<int>(s));
    perms_by_sort.push_back(std::move(perms));
    total *= perms_by_sort.back().size();
  }

  SymmetryGroup g;
  g.elements_.reserve(total);
  std::vector<size_t> idx(sorts.size(), 0);
  for (;;) {
    std::map<int, std::vector<uint32_t>> chosen;
    for (size_t k = 0; k < sorts.size(); k++)
      chosen[sorts[k]] = perms_by_sort[k][idx[k]];
    g.elements_.push_back(make_permutation(inst, chosen));
    size_t k = sorts.size();
    while (k > 0) {
      k--;
      if (++idx[k] < perms_by_sort[k].size()) break;
      idx[k] = 0;
      if (k == 0) return g;
    }
    if (sorts.empty()) return g;
  }
}

std::map<int, std::vector<uint32_t>> occurring_constants(
    const FiniteInstance& inst, const GroundClause& c) {
  std::map<int, std::vector<uint32_t>> occ;
  for (const auto& lit : c.lits) {
    const auto& sorts = inst.spec->relations[lit.rel].arg_sorts;
    for (size_t i = 0; i < lit.args.size(); i++)
      occ[sorts[i]].push_back(lit.args[i]);
  }
  for (auto& [s, v] : occ) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return occ;
}

std::vector<std::vector<uint32_t>> interchangeable_cells(
    const FiniteInstance& inst, const GroundClause& c, int sort) {
  auto occ = occurring_constants(inst, c);
  auto it = occ.find(sort);
  if (it == occ.end()) return {};
  const std::vector<uint32_t>& consts = it->second;
  bool dependent =
      inst.spec->sorts[sort].kind == SortKind::DependentMajority;

  // Union-find over the occurring constants. Swap-stability is transitive
  // here because the stabilizer of the clause is a group.
  std::vector<size_t> parent(consts.size());
  for (size_t i = 0; i < parent.size(); i++) parent[i] = i;
  auto find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (size_t i = 0; i < consts.size(); i++) {
    for (size_t j = i + 1; j < consts.size(); j++) {
      if (find(i) == find(j)) continue;
      GroundClause swapped;
      if (dependent) {
        // Positional exchange of the two dependent constants.
        std::vector<GroundLit> lits;
        for (const auto& l : c.lits) {
          GroundLit m = l;
          const auto& sorts = inst.spec->relations[l.rel].arg_sorts;
          for (size_t k = 0; k < m.args.size(); k++) {
            if (sorts[k] != sort) continue;
            if (m.args[k] == consts[i])
              m.args[k] = consts[j];
            else if (m.args[k] == consts[j])
              m.args[k] = consts[i];
          }
          lits.push_back(m);
        }
        swapped = make_clause(std::move(lits));
      } else {
        swapped = apply_clause(
            inst, make_transposition(inst, sort, consts[i], consts[j]), c);
      }
      if (swapped.lits == c.lits) parent[find(i)] = find(j);
    }
  }

  std::map<size_t, std::vector<uint32_t>> cells;
  for (size_t i = 0; i < consts.size(); i++)
    cells[find(i)].push_back(consts[i]);
  std::vector<std::vector<uint32_t>> out;
  for (auto& [root, cell] : cells) out.push_back(std::move(cell));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GroundClause> logical_orbit_serial(const FiniteInstance& inst,
                                               const SymmetryGroup& g,
                                               const GroundClause& c) {
  std::vector<GroundClause> out;
  out.reserve(g.size());
  for (const Permutation& p : g) out.push_back(apply_clause(inst, p, c));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<GroundClause> logical_orbit_parallel(const FiniteInstance& inst,
                                                 const SymmetryGroup& g,
                                                 const GroundClause& c) {
#ifdef SYMQUANT_HAS_OPENMP
  std::vector<GroundClause> out(g.size());
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < g.size(); i++)
    out[i] = apply_clause(inst, g[i], c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
#else
  return logical_orbit_serial(inst, g, c);
#endif
}

std::vector<GroundClause> logical_orbit(const FiniteInstance& inst,
                                        const SymmetryGroup& g,
                                        const GroundClause& c) {
  if (g.size() >= 4096) return logical_orbit_parallel(inst, g, c);
  return logical_orbit_serial(inst, g, c);
}

}  // namespace symquant
