// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "symquant/ground.hpp"
#include "symquant/solver.hpp"
#include "symquant/spec.hpp"

using namespace symquant;

namespace {

std::string solver_bin() {
  const char* bin = std::getenv("SMTLITE_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

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

}  // namespace

TEST_CASE("naming scheme is stable and phase-tagged") {
  auto inst = toy_instance(3, 3);
  int vote = inst->spec->relation_index("vote");
  VarId v = inst->state_var(vote, {0, 1});
  CHECK(smt_name(*inst, v, Phase::Curr) == "vote__node1__value2");
  CHECK(smt_name(*inst, v, Phase::Next) == "vote__node1__value2__p");
  int chosen = inst->spec->relation_index("chosenAt");
  CHECK(smt_aux_name(*inst, chosen, {0, 2}, Phase::Curr) ==
        "chosenAt__quorum12__value3");
  GroundLit lit{vote, {0, 1}, false};
  CHECK(lit_text(*inst, lit, Phase::Curr) == "(not vote__node1__value2)");
}

TEST_CASE("initial states satisfy safety and violate nothing") {
  auto inst = toy_instance(2, 2);
  SolverClient client(inst, {solver_bin(), 1, ""});
  // Init is consistent, and a model of it is the all-false state.
  QueryResult r = client.check({client.init_sel()}, {}, true, false);
  REQUIRE(r.sat);
  for (VarId v = 0; v < inst->num_state_vars; v++) CHECK(r.state[v] == 0);
  // Init and the negated safety property conflict.
  r = client.check({client.init_sel()},
                   {"(not (and))", "(not " +
                                       render_smt(*inst, inst->safety) +
                                       ")"},
                   false, false);
  CHECK(!r.sat);
}

TEST_CASE("one-step reachability goes through the transition relation") {
  auto inst = toy_instance(2, 2);
  SolverClient client(inst, {solver_bin(), 1, ""});
  int vote = inst->spec->relation_index("vote");
  int dec = inst->spec->relation_index("decision");

  // From init, one step can set a single vote bit.
  std::string vote11 = smt_name(*inst, inst->state_var(vote, {0, 0}),
                                Phase::Next);
  QueryResult r = client.check({client.init_sel(), client.trans_sel()},
                               {vote11}, true, false);
  REQUIRE(r.sat);
  int vote_bits = 0, dec_bits = 0;
  for (VarId v = 0; v < inst->num_state_vars; v++) {
    if (!r.next_state[v]) continue;
    if (inst->var_info(v).rel == vote) vote_bits++;
    if (inst->var_info(v).rel == dec) dec_bits++;
  }
  CHECK(vote_bits == 1);
  CHECK(dec_bits == 0);

  // No single step from init reaches a decision: Decide needs a quorum.
  std::string dec1 = smt_name(*inst, inst->state_var(dec, {0}), Phase::Next);
  r = client.check({client.init_sel(), client.trans_sel()}, {dec1}, false,
                   false);
  CHECK(!r.sat);

  // A state where the quorum voted for value1 can decide value1.
  std::string quorum_votes =
      "(and vote__node1__value1 vote__node2__value1)";
  r = client.check({client.trans_sel()}, {quorum_votes, dec1}, true, false);
  CHECK(r.sat);
}

TEST_CASE("unsat cores point at the failed assumptions") {
  auto inst = toy_instance(2, 2);
  SolverClient client(inst, {solver_bin(), 1, ""});
  std::string a = client.add_selector("vote__node1__value1");
  std::string b = client.add_selector("(not vote__node1__value1)");
  std::string c = client.add_selector("decision__value2");
  QueryResult r = client.check({a, b, c}, {}, false, true);
  REQUIRE(!r.sat);
  bool has_a = false, has_b = false, has_c = false;
  for (const auto& s : r.core) {
    has_a |= s == a;
    has_b |= s == b;
    has_c |= s == c;
  }
  CHECK(has_a);
  CHECK(has_b);
  CHECK(!has_c);

  // Negated literal assumptions come back in their original spelling.
  r = client.check({a, "(not vote__node1__value1)"}, {}, false, true);
  REQUIRE(!r.sat);
  bool has_neg = false;
  for (const auto& s : r.core)
    has_neg |= s == "(not vote__node1__value1)";
  CHECK(has_neg);
}

TEST_CASE("queries are counted and scoped") {
  auto inst = toy_instance(2, 2);
  SolverClient client(inst, {solver_bin(), 7, ""});
  CHECK(client.num_checks() == 0);
  client.check({client.init_sel()}, {}, false, false);
  client.check({client.init_sel()}, {"vote__node1__value1"}, false, false);
  CHECK(client.num_checks() == 2);
  // The scoped assert from the previous query must not leak.
  QueryResult r = client.check({client.init_sel()}, {}, true, false);
  REQUIRE(r.sat);
  CHECK(r.state[inst->state_var(inst->spec->relation_index("vote"), {0, 0})] ==
        0);
}

TEST_CASE("transcript logs replay through the solver binary") {
  std::string log = "/tmp/symquant_test_solver.smt2";
  {
    auto inst = toy_instance(2, 2);
    SolverClient client(inst, {solver_bin(), 1, log});
    client.comment("replay check");
    client.check({client.init_sel()}, {}, false, false);
    client.check({client.init_sel(), client.trans_sel()},
                 {"decision__value1__p"}, false, false);
  }
  std::ifstream check_log(log);
  REQUIRE(check_log.good());

  SmtProcess replay(solver_bin() + " " + log);
  // print-success handshake, then every command response in order; the two
  // check-sat answers are sat then unsat.
  std::vector<std::string> answers;
  try {
    for (;;) {
      std::string line = replay.read_line();
      if (line == "sat" || line == "unsat") answers.push_back(line);
    }
  } catch (const SolverError&) {
    // EOF ends the replay.
  }
  REQUIRE(answers.size() == 2);
  CHECK(answers[0] == "sat");
  CHECK(answers[1] == "unsat");
  std::remove(log.c_str());
}

TEST_CASE("a missing solver binary raises a solver error") {
  auto inst = toy_instance(2, 2);
  CHECK_THROWS_AS(SolverClient(inst, {"/nonexistent/solver", 1, ""}),
                  SolverError);
}
