// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// End-to-end acceptance gate. Each numbered criterion prints exactly one
// PASS or FAIL line with the measured numbers; the process exits nonzero
// when any criterion fails. Requires SMTLITE_BIN and SYMQUANT_BENCH_DIR.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "symquant/converge.hpp"
#include "symquant/engine.hpp"
#include "symquant/oracle.hpp"
#include "symquant/quantinfer.hpp"
#include "symquant/solver.hpp"
#include "symquant/spec.hpp"
#include "symquant/symmetry.hpp"

using namespace symquant;

namespace {

std::string g_solver;
std::string g_bench;
int g_failures = 0;

const char* kCorpus[] = {"toy_consensus.spec", "lock_server.spec",
                         "two_phase_commit.spec", "decentralized_lock.spec",
                         "simple_election.spec"};

void report(int num, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %d (%s): %s%s%s\n", num, name, ok ? "PASS" : "FAIL",
              detail.empty() ? "" : ", ", detail.c_str());
  std::fflush(stdout);
  if (!ok) g_failures++;
}

std::shared_ptr<ProtocolSpec> load(const std::string& name) {
  std::ifstream in(g_bench + "/" + name, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  if (!in.good()) throw std::runtime_error("cannot read " + name);
  auto spec = std::make_shared<ProtocolSpec>(parse_spec(os.str()));
  if (!typecheck(*spec).empty())
    throw std::runtime_error(name + " failed typecheck");
  return spec;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Formula formula(const ProtocolSpec& spec, const std::string& text) {
  return parse_formula(spec, parse_sexprs(text).at(0));
}

GroundLit lit(const FiniteInstance& inst, const std::string& rel,
              std::vector<uint32_t> args, bool positive) {
  return GroundLit{inst.spec->relation_index(rel), std::move(args), positive};
}

GroundClause random_clause(const FiniteInstance& inst, std::mt19937_64& rng) {
  std::uniform_int_distribution<uint32_t> var_dist(0,
                                                   inst.num_state_vars - 1);
  std::uniform_int_distribution<int> len_dist(2, 5);
  std::map<uint32_t, bool> sign;  // keyed by variable: no contradictions
  int len = len_dist(rng);
  for (int i = 0; i < len; i++) sign.emplace(var_dist(rng), (rng() & 1) != 0);
  std::vector<GroundLit> lits;
  for (const auto& [v, pos] : sign) {
    const auto& info = inst.var_info(v);
    lits.push_back({info.rel, info.args, pos});
  }
  return make_clause(std::move(lits));
}

std::string conj_text(const FiniteInstance& inst,
                      const std::vector<GroundClause>& clauses) {
  std::string s = "(and true";
  for (const auto& c : clauses) s += " " + clause_text(inst, c, Phase::Curr);
  return s + ")";
}

// Logical equivalence of two clause sets by a pair of unsat queries.
bool equivalent_by_solver(SolverClient& client, const FiniteInstance& inst,
                          const std::vector<GroundClause>& a,
                          const std::vector<GroundClause>& b) {
  std::string ta = conj_text(inst, a), tb = conj_text(inst, b);
  bool fwd = !client.check({}, {ta, "(not " + tb + ")"}, false, false).sat;
  bool bwd = !client.check({}, {tb, "(not " + ta + ")"}, false, false).sat;
  return fwd && bwd;
}

// 1. ToyConsensus from (3,3): Safe at the (3,3,3) cutoff in under a minute,
//    with the certificate equivalent to the two published strengthening
//    assertions and both size+1 convergence checks passing.
// 2. The same run stays within 2000 solver calls and 130 CTIs.
void criteria_1_and_2() {
  bool ok = true;
  std::string detail;
  try {
    auto spec = load("toy_consensus.spec");
    ConvergeOptions opts;
    opts.engine.solver.cmd = g_solver;
    auto t0 = std::chrono::steady_clock::now();
    ConvergeResult r =
        run_converge(spec, {{"node", 3}, {"value", 3}}, opts);
    double wall = seconds_since(t0);

    ok &= r.outcome == Outcome::Safe;
    ok &= r.sizes == SizeAssignment{{"node", 3}, {"value", 3}};
    auto inst =
        std::make_shared<FiniteInstance>(build_instance(spec, r.sizes));
    ok &= inst->size_of(spec->sort_index("quorum")) == 3;
    ok &= wall < 60.0;

    // The node check grounds at (4,4,3) and the value check at (3,3,4).
    CutoffOutcome cut = check_cutoff(spec, r.sizes, r.invariant,
                                     {g_solver, 1, ""});
    ok &= cut.pass;

    Formula a1 = formula(
        *spec,
        "(forall ((N node) (V1 value) (V2 value)) (=> (distinct V1 V2) "
        "(or (not (vote N V1)) (not (vote N V2)))))");
    Formula a2 = formula(
        *spec,
        "(forall ((V value)) (exists ((Q quorum)) "
        "(or (not (decision V)) (chosenAt Q V))))");
    std::string published =
        "(and " + render_smt(*inst, ground_formula(*inst, a1, Phase::Curr)) +
        " " + render_smt(*inst, ground_formula(*inst, a2, Phase::Curr)) +
        ")";
    std::vector<GroundClause> cert_clauses;
    for (const auto& p : r.invariant)
      for (const auto& c : expand(*inst, p)) cert_clauses.push_back(c);
    std::string derived = conj_text(*inst, cert_clauses);
    SolverClient client(inst, {g_solver, 1, ""});
    bool equivalent =
        !client.check({}, {"(not (= " + derived + " " + published + "))"},
                      false, false)
             .sat;
    ok &= equivalent;

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "safe at (3,3,3), %zu assertions, equivalent=%s, "
                  "cutoff=%s, %.2fs",
                  r.invariant.size(), equivalent ? "yes" : "no",
                  cut.pass ? "pass" : "fail", wall);
    detail = buf;
    report(1, "toy consensus end to end", ok, detail);

    bool budget = r.stats.smt_checks <= 2000 && r.stats.ctis <= 130;
    std::snprintf(buf, sizeof(buf), "%llu smt checks <= 2000, %llu ctis <= 130",
                  (unsigned long long)r.stats.smt_checks,
                  (unsigned long long)r.stats.ctis);
    report(2, "query budget", budget, buf);
  } catch (const std::exception& e) {
    report(1, "toy consensus end to end", false,
           std::string("exception: ") + e.what());
    report(2, "query budget", false, "run failed");
  }
}

// 3. expand(sym_boost(c)) matches the conjunction of the logical orbit for
//    the four published clauses plus 500 random clauses per corpus entry.
void criterion_3() {
  try {
    uint64_t checked = 0, mismatches = 0, solver_confirmed = 0;
    for (const char* name : kCorpus) {
      auto spec = load(name);
      SizeAssignment sizes;
      for (const auto& s : spec->sorts)
        if (s.kind == SortKind::Independent) sizes[s.name] = 4;
      auto inst =
          std::make_shared<FiniteInstance>(build_instance(spec, sizes));
      SymmetryGroup group = SymmetryGroup::build(*inst);
      SolverClient client(inst, {g_solver, 1, ""});

      std::vector<GroundClause> clauses;
      if (std::string(name) == "toy_consensus.spec") {
        clauses.push_back(make_clause({lit(*inst, "vote", {0, 0}, true),
                                       lit(*inst, "vote", {0, 1}, true),
                                       lit(*inst, "vote", {0, 2}, true)}));
        clauses.push_back(make_clause({lit(*inst, "decision", {0}, false),
                                       lit(*inst, "decision", {1}, true)}));
        clauses.push_back(make_clause({lit(*inst, "decision", {0}, true),
                                       lit(*inst, "decision", {1}, true),
                                       lit(*inst, "decision", {2}, true)}));
        clauses.push_back(make_clause({lit(*inst, "decision", {0}, false),
                                       lit(*inst, "decision", {1}, true),
                                       lit(*inst, "decision", {2}, true)}));
      }
      std::mt19937_64 rng(2026);
      for (int i = 0; i < 500; i++) clauses.push_back(random_clause(*inst, rng));

      for (const auto& c : clauses) {
        std::vector<GroundClause> orbit = logical_orbit(*inst, group, c);
        QuantifiedPredicate pred = sym_boost(*inst, group, c);
        std::vector<GroundClause> expansion = expand(*inst, pred);
        checked++;
        if (expansion == orbit) continue;
        // Different clause sets can still denote the same function; the
        // paired queries settle it.
        if (equivalent_by_solver(client, *inst, expansion, orbit))
          solver_confirmed++;
        else
          mismatches++;
      }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%llu clauses over %zu protocols, %llu needed the solver, "
                  "%llu failures",
                  (unsigned long long)checked, std::size(kCorpus),
                  (unsigned long long)solver_confirmed,
                  (unsigned long long)mismatches);
    report(3, "orbit equivalence of inferred quantifiers", mismatches == 0,
           buf);
  } catch (const std::exception& e) {
    report(3, "orbit equivalence of inferred quantifiers", false,
           std::string("exception: ") + e.what());
  }
}

// 4. The mixed-sign decision clause at value size 3: nine instantiations,
//    three vacuous, and the six surviving instances are exactly the orbit.
void criterion_4() {
  try {
    auto spec = load("toy_consensus.spec");
    auto inst = std::make_shared<FiniteInstance>(
        build_instance(spec, {{"node", 3}, {"value", 3}}));
    SymmetryGroup group = SymmetryGroup::build(*inst);
    GroundClause c = make_clause({lit(*inst, "decision", {0}, false),
                                  lit(*inst, "decision", {1}, true)});
    std::vector<GroundClause> orbit = logical_orbit(*inst, group, c);
    QuantifiedPredicate pred = sym_boost(*inst, group, c);
    ExpandStats stats;
    std::vector<GroundClause> expansion = expand(*inst, pred, &stats);
    bool ok = stats.assignments == 9 && stats.vacuous == 3 &&
              stats.emitted == 6 && expansion == orbit &&
              orbit.size() == 6;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%llu instantiations, %llu vacuous, %llu emitted, "
                  "orbit rows %zu, expansion %s orbit",
                  (unsigned long long)stats.assignments,
                  (unsigned long long)stats.vacuous,
                  (unsigned long long)stats.emitted, orbit.size(),
                  expansion == orbit ? "==" : "!=");
    report(4, "instantiation table reproduction", ok, buf);
  } catch (const std::exception& e) {
    report(4, "instantiation table reproduction", false,
           std::string("exception: ") + e.what());
  }
}

// 5. Sampled permutations of every learned clause keep the blocking query
//    unsat during the toy consensus and lock server runs.
void criterion_5() {
  try {
    uint64_t samples = 0;
    auto probe = [&](const std::string& name, const SizeAssignment& sizes) {
      auto inst = std::make_shared<FiniteInstance>(
          build_instance(load(name), sizes));
      SymIC3::Config cfg;
      cfg.solver.cmd = g_solver;
      cfg.orbit_check_samples = 20;
      SymIC3 engine(inst, cfg);
      EngineResult r = engine.run();  // throws on any sat permuted query
      if (r.verdict != Verdict::Safe)
        throw std::runtime_error(name + " unexpectedly violated");
      samples += r.stats.orbit_checks;
    };
    probe("toy_consensus.spec", {{"node", 3}, {"value", 3}});
    probe("lock_server.spec", {{"client", 2}, {"server", 1}});
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%llu permuted blocking queries, all unsat",
                  (unsigned long long)samples);
    report(5, "permuted blocking queries stay unsat", samples > 0, buf);
  } catch (const std::exception& e) {
    report(5, "permuted blocking queries stay unsat", false,
           std::string("exception: ") + e.what());
  }
}

// 6. Explicit-state cross-validation at the base sizes: reachability is
//    safe, the engine invariant checks out exhaustively, and the safety
//    property alone is not inductive for toy consensus.
void criterion_6() {
  try {
    std::string covered;
    bool ok = true;
    for (const char* name : kCorpus) {
      auto spec = load(name);
      auto inst = std::make_shared<FiniteInstance>(
          build_instance(spec, default_base_sizes(*spec)));
      if (inst->num_state_vars > 16) continue;
      ReachResult reach = bfs_reach(*inst);
      ok &= reach.safe;

      SymIC3::Config cfg;
      cfg.solver.cmd = g_solver;
      SymIC3 engine(inst, cfg);
      EngineResult r = engine.run();
      ok &= r.verdict == Verdict::Safe;
      std::vector<GroundClause> clauses;
      for (const auto& p : r.invariant)
        for (const auto& c : p.ground_clauses) clauses.push_back(c);
      ok &= check_invariant_explicit(*inst, clauses).holds();

      if (!covered.empty()) covered += " ";
      covered += std::to_string(inst->num_state_vars) + "v";
    }
    InvariantCheck bare = check_invariant_explicit(
        build_instance(load("toy_consensus.spec"), {{"node", 2}, {"value", 2}}),
        {});
    bool bare_fails = !bare.consecution_ok;
    ok &= bare_fails;
    report(6, "explicit-state cross validation", ok,
           "instances " + covered + "; safety alone " +
               (bare_fails ? "fails" : "passes") + " closure");
  } catch (const std::exception& e) {
    report(6, "explicit-state cross validation", false,
           std::string("exception: ") + e.what());
  }
}

// 7. Dropping the vote guard produces a violation whose trace replays in
//    the oracle; the unmutated protocol stays safe across ten seeds.
void criterion_7() {
  try {
    auto mutated = load("toy_consensus.spec");
    for (auto& a : mutated->actions)
      if (a.name == "CastVote") a.guard = Formula::truth();
    auto inst = std::make_shared<FiniteInstance>(
        build_instance(mutated, {{"node", 3}, {"value", 3}}));
    SymIC3::Config cfg;
    cfg.solver.cmd = g_solver;
    SymIC3 engine(inst, cfg);
    EngineResult r = engine.run();
    std::string why;
    bool mutant_ok =
        r.verdict == Verdict::Violated && replay_trace(*inst, r.trace, &why);

    auto spec = load("toy_consensus.spec");
    auto clean = std::make_shared<FiniteInstance>(
        build_instance(spec, {{"node", 3}, {"value", 3}}));
    int safe_runs = 0;
    for (uint32_t seed = 1; seed <= 10; seed++) {
      SymIC3::Config scfg;
      scfg.solver.cmd = g_solver;
      scfg.solver.seed = seed;
      SymIC3 e2(clean, scfg);
      if (e2.run().verdict == Verdict::Safe) safe_runs++;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "mutant violated with %zu-step replayed trace%s%s, "
                  "unmutated safe in %d/10 seeds",
                  r.trace.size(), why.empty() ? "" : ": ", why.c_str(),
                  safe_runs);
    report(7, "counterexample path", mutant_ok && safe_runs == 10, buf);
  } catch (const std::exception& e) {
    report(7, "counterexample path", false,
           std::string("exception: ") + e.what());
  }
}

// 8. The lock server and two-phase commit analogues verify quickly with
//    certificates near the reference invariant sizes (2 and about 10).
void criterion_8() {
  try {
    bool ok = true;
    std::string detail;
    auto probe = [&](const std::string& name, size_t ref_lo, size_t ref_hi) {
      auto spec = load(name);
      ConvergeOptions opts;
      opts.engine.solver.cmd = g_solver;
      auto t0 = std::chrono::steady_clock::now();
      ConvergeResult r = run_converge(spec, default_base_sizes(*spec), opts);
      double wall = seconds_since(t0);
      size_t cert = 1 + r.invariant.size();  // safety plus strengthening
      bool good = r.outcome == Outcome::Safe && wall < 120.0 &&
                  cert >= ref_lo / 2 && cert <= ref_hi * 2;
      ok &= good;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s%s: %zu assertions in %.2fs",
                    detail.empty() ? "" : "; ", name.c_str(), cert, wall);
      detail += buf;
    };
    probe("lock_server.spec", 2, 2);
    probe("two_phase_commit.spec", 10, 11);
    report(8, "desk-scale corpus", ok, detail);
  } catch (const std::exception& e) {
    report(8, "desk-scale corpus", false,
           std::string("exception: ") + e.what());
  }
}

// 9. Identical configuration and seed give byte-identical certificates on
//    every corpus entry.
void criterion_9() {
  try {
    int identical = 0;
    for (const char* name : kCorpus) {
      auto spec = load(name);
      ConvergeOptions opts;
      opts.engine.solver.cmd = g_solver;
      opts.engine.solver.seed = 3;
      ConvergeResult a = run_converge(spec, default_base_sizes(*spec), opts);
      ConvergeResult b = run_converge(spec, default_base_sizes(*spec), opts);
      if (certificate_text(*spec, a) == certificate_text(*spec, b))
        identical++;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d/%zu byte-identical", identical,
                  std::size(kCorpus));
    report(9, "reproducible certificates", identical == 5, buf);
  } catch (const std::exception& e) {
    report(9, "reproducible certificates", false,
           std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  const char* solver = std::getenv("SMTLITE_BIN");
  const char* bench = std::getenv("SYMQUANT_BENCH_DIR");
  if (solver == nullptr || bench == nullptr) {
    std::fprintf(stderr,
                 "SMTLITE_BIN and SYMQUANT_BENCH_DIR must be set\n");
    return 2;
  }
  g_solver = solver;
  g_bench = bench;

  criteria_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();

  std::printf("%s\n", g_failures == 0 ? "all criteria passed"
                                      : "some criteria FAILED");
  return g_failures == 0 ? 0 : 1;
}
