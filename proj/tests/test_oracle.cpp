// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "symquant/ground.hpp"
#include "symquant/oracle.hpp"
#include "symquant/spec.hpp"

using namespace symquant;

namespace {

std::string slurp_bench(const std::string& name) {
  const char* dir = std::getenv("SYMQUANT_BENCH_DIR");
  REQUIRE(dir != nullptr);
  std::ifstream in(std::string(dir) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::shared_ptr<const ProtocolSpec> toy() {
  auto spec = std::make_shared<ProtocolSpec>(
      parse_spec(slurp_bench("toy_consensus.spec")));
  REQUIRE(typecheck(*spec).empty());
  return spec;
}

FiniteInstance toy_at(uint32_t nodes, uint32_t values) {
  return build_instance(toy(), {{"node", nodes}, {"value", values}});
}

std::vector<int8_t> unpack(const FiniteInstance& inst, uint64_t s) {
  std::vector<int8_t> bits(inst.num_state_vars);
  for (uint32_t i = 0; i < inst.num_state_vars; ++i)
    bits[i] = static_cast<int8_t>((s >> i) & 1);
  return bits;
}

std::vector<std::vector<int8_t>> unpack_trace(
    const FiniteInstance& inst, const std::vector<uint64_t>& trace) {
  std::vector<std::vector<int8_t>> out;
  for (uint64_t s : trace) out.push_back(unpack(inst, s));
  return out;
}

// Consensus variant with an unguarded Decide: any value can be decided at
// any time, so two decisions are reachable in two steps.
const char* kUnguarded = R"((sort node)
(sort value)
(dependent-sort quorum (majority node))
(relation vote (node value))
(relation decision (value))
(definition (didNotVote (n node))
  (forall ((V value)) (not (vote n V))))
(init (and (forall ((N node) (V value)) (not (vote N V)))
           (forall ((V value)) (not (decision V)))))
(action CastVote ((n node) (v value))
  :guard (didNotVote n)
  :update ((vote (forall ((N node) (V value))
                   (= (vote' N V) (or (vote N V) (and (= N n) (= V v))))))))
(action Decide ((v value))
  :guard (= v v)
  :update ((decision (forall ((V value))
                       (= (decision' V) (or (decision V) (= V v)))))))
(safety (forall ((V1 value) (V2 value))
          (=> (and (decision V1) (decision V2)) (= V1 V2))))
)";

// Variant whose initial condition leaves the decision bits unconstrained,
// so some initial states already violate safety.
const char* kLooseInit = R"((sort node)
(sort value)
(relation vote (node value))
(relation decision (value))
(init (forall ((N node) (V value)) (not (vote N V))))
(action Skip ((n node))
  :guard (= n n)
  :update ())
(safety (forall ((V1 value) (V2 value))
          (=> (and (decision V1) (decision V2)) (= V1 V2))))
)";

FiniteInstance variant_at(const char* text, uint32_t nodes, uint32_t values) {
  auto spec = std::make_shared<ProtocolSpec>(parse_spec(text));
  REQUIRE(typecheck(*spec).empty());
  return build_instance(spec, {{"node", nodes}, {"value", values}});
}

}  // namespace

TEST_CASE("successor sets at (2,1) match the hand enumeration") {
  FiniteInstance inst = toy_at(2, 1);
  REQUIRE(inst.num_state_vars == 3);
  // Variable order: vote(n1,v1)=0, vote(n2,v1)=1, decision(v1)=2.
  CHECK(successors(inst, 0b000) == std::vector<uint64_t>{0b001, 0b010});
  CHECK(successors(inst, 0b001) == std::vector<uint64_t>{0b011});
  CHECK(successors(inst, 0b011) == std::vector<uint64_t>{0b111});
  CHECK(successors(inst, 0b111) == std::vector<uint64_t>{0b111});
}

TEST_CASE("deadlock states have no successors") {
  FiniteInstance inst = toy_at(2, 2);
  // n1 voted v1, n2 voted v2: nobody may vote again and no quorum agrees.
  uint64_t s = (1ull << inst.state_var(inst.spec->relation_index("vote"),
                                       {0, 0})) |
               (1ull << inst.state_var(inst.spec->relation_index("vote"),
                                       {1, 1}));
  CHECK(successors(inst, s).empty());
}

TEST_CASE("reachable-state counts match hand-derived values") {
  // (2,1): {empty, n1 voted, n2 voted, both voted, both voted + decided}.
  CHECK(bfs_reach(toy_at(2, 1)).num_reachable == 5);
  CHECK(bfs_reach(toy_at(2, 1)).safe);
  // (2,2): 9 vote configurations (each node abstains or votes one value),
  // plus one decided extension per unanimous configuration.
  CHECK(bfs_reach(toy_at(2, 2)).num_reachable == 11);
  // (3,2): 27 vote configurations, 7 per value with a two-node quorum in
  // agreement, decisions only on top of those: 27 + 7 + 7.
  ReachResult r32 = bfs_reach(toy_at(3, 2));
  CHECK(r32.num_reachable == 41);
  CHECK(r32.safe);
  CHECK(r32.trace.empty());
}

TEST_CASE("initial-state enumeration") {
  FiniteInstance inst = toy_at(2, 2);
  CHECK(enumerate_states(inst, inst.init) == std::vector<uint64_t>{0});

  FiniteInstance loose = variant_at(kLooseInit, 2, 2);
  // Votes pinned to false, two decision bits free.
  REQUIRE(loose.num_state_vars == 6);
  CHECK(enumerate_states(loose, loose.init) ==
        std::vector<uint64_t>{0, 16, 32, 48});
}

TEST_CASE("unguarded decisions reach a violation and the trace replays") {
  FiniteInstance inst = variant_at(kUnguarded, 2, 2);
  ReachResult res = bfs_reach(inst);
  REQUIRE_FALSE(res.safe);
  // Shortest violation: decide v1, then decide v2.
  REQUIRE(res.trace.size() == 3);
  CHECK(eval_ground(inst, inst.init, res.trace.front()));
  CHECK_FALSE(eval_ground(inst, inst.safety, res.trace.back()));

  auto states = unpack_trace(inst, res.trace);
  std::string why;
  CHECK(replay_trace(inst, states, &why));

  SUBCASE("corrupted first state is rejected") {
    states[0][0] = 1;
    CHECK_FALSE(replay_trace(inst, states, &why));
    CHECK(why == "state 0 is not an initial state");
  }
  SUBCASE("broken transition link is rejected") {
    auto broken = states;
    broken[1] = states[2];
    // Jumping straight to the two-decision state is not a single step.
    CHECK_FALSE(replay_trace(inst, broken, &why));
    CHECK(why == "no transition from state 0 to state 1");
  }
  SUBCASE("truncated trace ends in a safe state") {
    states.pop_back();
    CHECK_FALSE(replay_trace(inst, states, &why));
    CHECK(why == "final state satisfies the safety property");
  }
  SUBCASE("wrong state width is rejected") {
    states[1].pop_back();
    CHECK_FALSE(replay_trace(inst, states, &why));
    CHECK(why == "state 1 has 5 bits, expected 6");
  }
  SUBCASE("empty trace is rejected") {
    CHECK_FALSE(replay_trace(inst, {}, &why));
    CHECK(why == "trace is empty");
  }
}

TEST_CASE("an unsafe initial state yields a single-state trace") {
  FiniteInstance inst = variant_at(kLooseInit, 2, 2);
  ReachResult res = bfs_reach(inst);
  REQUIRE_FALSE(res.safe);
  REQUIRE(res.trace.size() == 1);
  CHECK(res.trace[0] == 48);  // both decision bits set from the start
  CHECK(replay_trace(inst, unpack_trace(inst, res.trace)));
}

TEST_CASE("invariant checking separates inductive from non-inductive") {
  FiniteInstance inst = toy_at(2, 2);
  int vote = inst.spec->relation_index("vote");
  int decision = inst.spec->relation_index("decision");
  int chosen = inst.spec->relation_index("chosenAt");

  SUBCASE("the safety property alone is not closed under transitions") {
    InvariantCheck c = check_invariant_explicit(inst, {});
    CHECK(c.init_ok);
    CHECK_FALSE(c.consecution_ok);
    REQUIRE(c.witness_state.has_value());
    REQUIRE(c.witness_next.has_value());
    CHECK(eval_ground(inst, inst.safety, *c.witness_state));
    CHECK_FALSE(eval_ground(inst, inst.safety, *c.witness_next));
    auto succ = successors(inst, *c.witness_state);
    CHECK(std::find(succ.begin(), succ.end(), *c.witness_next) != succ.end());
  }

  SUBCASE("one vote per node plus quorum support is inductive") {
    std::vector<GroundClause> inv;
    for (uint32_t n = 0; n < 2; ++n)
      inv.push_back(make_clause({{vote, {n, 0}, false},
                                 {vote, {n, 1}, false}}));
    for (uint32_t v = 0; v < 2; ++v)
      inv.push_back(make_clause({{decision, {v}, false},
                                 {chosen, {0, v}, true}}));
    InvariantCheck c = check_invariant_explicit(inst, inv);
    CHECK(c.holds());
  }

  SUBCASE("dropping the quorum-support half breaks consecution") {
    std::vector<GroundClause> inv;
    for (uint32_t n = 0; n < 2; ++n)
      inv.push_back(make_clause({{vote, {n, 0}, false},
                                 {vote, {n, 1}, false}}));
    InvariantCheck c = check_invariant_explicit(inst, inv);
    CHECK_FALSE(c.consecution_ok);
  }
}

TEST_CASE("width guard") {
  FiniteInstance inst = toy_at(3, 3);  // 12 state variables
  CHECK_THROWS_AS(bfs_reach(inst, 10), OracleError);
  CHECK_NOTHROW(bfs_reach(inst, 12));
}
