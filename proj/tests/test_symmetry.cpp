// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "symquant/symmetry.hpp"
#include "symquant/spec.hpp"

using namespace symquant;

namespace {

std::shared_ptr<const FiniteInstance> toy_instance(uint32_t n, uint32_t v) {
  const char* dir = std::getenv("SYMQUANT_BENCH_DIR");
  REQUIRE(dir != nullptr);
  std::ifstream in(std::string(dir) + "/toy_consensus.spec");
  std::ostringstream os;
  os << in.rdbuf();
  auto spec = std::make_shared<ProtocolSpec>(parse_spec(os.str()));
  REQUIRE(typecheck(*spec).empty());
  return std::make_shared<FiniteInstance>(
      build_instance(spec, {{"node", n}, {"value", v}}));
}

GroundLit lit(const FiniteInstance& inst, const std::string& rel,
              std::vector<uint32_t> args, bool positive) {
  return GroundLit{inst.spec->relation_index(rel), std::move(args), positive};
}

}  // namespace

TEST_CASE("group order is the product of the independent factorials") {
  CHECK(SymmetryGroup::build(*toy_instance(3, 3)).size() == 36);
  CHECK(SymmetryGroup::build(*toy_instance(2, 2)).size() == 4);
  CHECK(SymmetryGroup::build(*toy_instance(4, 2)).size() == 48);
  CHECK_THROWS_AS(SymmetryGroup::build(*toy_instance(3, 3), 10),
                  SymmetryError);
}

TEST_CASE("node transpositions act on quorums through their members") {
  auto inst = toy_instance(3, 3);
  int node = inst->spec->sort_index("node");
  int quorum = inst->spec->sort_index("quorum");
  // Swapping node1 and node2 fixes {1,2} and exchanges {1,3} with {2,3}.
  Permutation p = make_transposition(*inst, node, 0, 1);
  CHECK(p.maps[quorum] == std::vector<uint32_t>{0, 2, 1});
  // Swapping node1 and node3 exchanges {1,2} with {2,3} and fixes {1,3}.
  Permutation q = make_transposition(*inst, node, 0, 2);
  CHECK(q.maps[quorum] == std::vector<uint32_t>{2, 1, 0});

  GroundLit l = lit(*inst, "vote", {0, 1}, true);
  GroundLit img = apply_lit(*inst, p, l);
  CHECK(img.args == std::vector<uint32_t>{1, 1});
  GroundLit cs = lit(*inst, "chosenAt", {1, 0}, true);  // quorum13
  CHECK(apply_lit(*inst, p, cs).args == std::vector<uint32_t>{2, 0});
}

TEST_CASE("the protocol is invariant under every group element") {
  auto inst = toy_instance(3, 3);
  SymmetryGroup g = SymmetryGroup::build(*inst);
  std::mt19937_64 rng(5);
  uint64_t mask = (1ull << inst->num_state_vars) - 1;
  for (int round = 0; round < 40; round++) {
    uint64_t s = rng() & mask, t = rng() & mask;
    bool init_s = eval_ground(*inst, inst->init, s);
    bool safe_s = eval_ground(*inst, inst->safety, s);
    bool step = eval_ground(*inst, inst->trans_all, s, t);
    for (const Permutation& p : g) {
      uint64_t ps = apply_state(*inst, p, s);
      uint64_t pt = apply_state(*inst, p, t);
      REQUIRE(eval_ground(*inst, inst->init, ps) == init_s);
      REQUIRE(eval_ground(*inst, inst->safety, ps) == safe_s);
      REQUIRE(eval_ground(*inst, inst->trans_all, ps, pt) == step);
    }
  }
}

TEST_CASE("state permutation composes and inverts") {
  auto inst = toy_instance(3, 2);
  SymmetryGroup g = SymmetryGroup::build(*inst);
  std::mt19937_64 rng(11);
  uint64_t mask = (1ull << inst->num_state_vars) - 1;
  for (const Permutation& p : g) {
    uint64_t s = rng() & mask;
    uint64_t image = apply_state(*inst, p, s);
    CHECK(__builtin_popcountll(image) == __builtin_popcountll(s));
    // Some group element maps the image back.
    bool inverted = false;
    for (const Permutation& q : g)
      inverted |= apply_state(*inst, q, image) == s;
    CHECK(inverted);
  }
}

TEST_CASE("occurring constants count direct argument positions only") {
  auto inst = toy_instance(3, 3);
  GroundClause c = make_clause({lit(*inst, "vote", {0, 0}, true),
                                lit(*inst, "chosenAt", {0, 0}, true)});
  auto occ = occurring_constants(*inst, c);
  int node = inst->spec->sort_index("node");
  int value = inst->spec->sort_index("value");
  int quorum = inst->spec->sort_index("quorum");
  CHECK(occ[node] == std::vector<uint32_t>{0});  // members of quorum12 hidden
  CHECK(occ[value] == std::vector<uint32_t>{0});
  CHECK(occ[quorum] == std::vector<uint32_t>{0});
}

TEST_CASE("interchangeable cells split by clause structure") {
  auto inst = toy_instance(3, 3);
  int node = inst->spec->sort_index("node");
  int value = inst->spec->sort_index("value");
  int quorum = inst->spec->sort_index("quorum");

  // One node votes for two values: the two values are interchangeable.
  GroundClause atmost = make_clause({lit(*inst, "vote", {0, 0}, false),
                                     lit(*inst, "vote", {0, 1}, false)});
  auto cells = interchangeable_cells(*inst, atmost, value);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0] == std::vector<uint32_t>{0, 1});
  CHECK(interchangeable_cells(*inst, atmost, node) ==
        std::vector<std::vector<uint32_t>>{{0}});
  CHECK(interchangeable_cells(*inst, atmost, quorum).empty());

  // Asymmetric occurrences split into singleton cells.
  GroundClause asym = make_clause({lit(*inst, "vote", {0, 0}, false),
                                   lit(*inst, "vote", {0, 1}, true),
                                   lit(*inst, "decision", {1}, true)});
  cells = interchangeable_cells(*inst, asym, value);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0] == std::vector<uint32_t>{0});
  CHECK(cells[1] == std::vector<uint32_t>{1});

  // All three quorums appearing symmetrically form one cell.
  GroundClause decided = make_clause({lit(*inst, "decision", {0}, false),
                                      lit(*inst, "chosenAt", {0, 0}, true),
                                      lit(*inst, "chosenAt", {1, 0}, true),
                                      lit(*inst, "chosenAt", {2, 0}, true)});
  cells = interchangeable_cells(*inst, decided, quorum);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0] == std::vector<uint32_t>{0, 1, 2});
}

TEST_CASE("orbits are closed, deduplicated, and sorted") {
  auto inst = toy_instance(3, 3);
  SymmetryGroup g = SymmetryGroup::build(*inst);

  GroundClause atmost = make_clause({lit(*inst, "vote", {0, 0}, false),
                                     lit(*inst, "vote", {0, 1}, false)});
  auto orbit = logical_orbit_serial(*inst, g, atmost);
  // 3 nodes times 3 unordered value pairs.
  CHECK(orbit.size() == 9);
  CHECK(std::is_sorted(orbit.begin(), orbit.end()));

  // Every image generates the same orbit.
  for (const auto& c : orbit) {
    auto again = logical_orbit_serial(*inst, g, c);
    REQUIRE(again == orbit);
  }

  auto unit = logical_orbit_serial(
      *inst, g, make_clause({lit(*inst, "vote", {0, 0}, true)}));
  CHECK(unit.size() == 9);

  // A clause mixing a quorum and an unrelated node constant: images pair
  // every quorum with both member and non-member nodes.
  GroundClause mixed = make_clause({lit(*inst, "vote", {0, 0}, true),
                                    lit(*inst, "chosenAt", {2, 0}, true)});
  auto morbit = logical_orbit_serial(*inst, g, mixed);
  // node1 is not in quorum23: 3 values x 3 quorums x 1 outside node, plus
  // membership-preserving images never appear.
  CHECK(morbit.size() == 9);
}

TEST_CASE("parallel orbit enumeration matches the serial reference") {
  auto inst = toy_instance(4, 3);
  SymmetryGroup g = SymmetryGroup::build(*inst);
  CHECK(g.size() == 144);
  std::mt19937 rng(3);
  int vote = inst->spec->relation_index("vote");
  int chosen = inst->spec->relation_index("chosenAt");
  auto draw = [&](uint32_t n) { return static_cast<uint32_t>(rng() % n); };
  uint32_t nq = static_cast<uint32_t>(inst->consts[2].size());
  for (int round = 0; round < 50; round++) {
    std::vector<GroundLit> lits;
    int len = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < len; i++) {
      if (rng() & 1)
        lits.push_back(GroundLit{vote, {draw(4), draw(3)}, (rng() & 2) != 0});
      else
        lits.push_back(
            GroundLit{chosen, {draw(nq), draw(3)}, (rng() & 2) != 0});
    }
    GroundClause c;
    try {
      c = make_clause(std::move(lits));
    } catch (const GroundError&) {
      continue;  // tautological draw
    }
    auto serial = logical_orbit_serial(*inst, g, c);
    auto parallel = logical_orbit_parallel(*inst, g, c);
    auto dispatched = logical_orbit(*inst, g, c);
    REQUIRE(serial == parallel);
    REQUIRE(serial == dispatched);
  }
}
