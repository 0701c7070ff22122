// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/converge.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "symquant/oracle.hpp"
#include "symquant/solver.hpp"

namespace symquant {

namespace {

std::string conjunction(const std::vector<std::string>& parts) {
  if (parts.empty()) return "true";
  if (parts.size() == 1) return parts[0];
  std::string s = "(and";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::string disjunction(const std::vector<std::string>& parts) {
  if (parts.empty()) return "false";
  if (parts.size() == 1) return parts[0];
  std::string s = "(or";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::vector<int> independent_sorts(const ProtocolSpec& spec) {
  std::vector<int> out;
  for (size_t i = 0; i < spec.sorts.size(); i++)
    if (spec.sorts[i].kind == SortKind::Independent)
      out.push_back(static_cast<int>(i));
  return out;
}

// --- Unbounded rendering -------------------------------------------------
//
// The quantified goals use one symbol per relation and phase: the next
// phase carries a __p suffix, mirroring the ground encoding. Definitions
// get a primed copy whose body reads the primed relations, and membership
// in a dependent sort is a rigid (phase-free) predicate per sort.

std::string member_fun(const ProtocolSpec& spec, int dep_sort) {
  return "member__" + spec.sorts[dep_sort].name;
}

std::string rel_fun(const ProtocolSpec& spec, int rel, bool next) {
  return next ? spec.relations[rel].name + "__p" : spec.relations[rel].name;
}

// Renders a spec formula as unbounded SMT. `env` maps bound variables to
// sorts (needed to pick the member predicate); `next_copy` renames every
// state relation and definition to its primed copy.
std::string render_fo(const ProtocolSpec& spec, const Formula& f,
                      std::map<std::string, int> env, bool next_copy) {
  auto rec = [&](const Formula& g) { return render_fo(spec, g, env, next_copy); };
  switch (f.kind) {
    case FKind::And: {
      std::vector<std::string> parts;
      for (const auto& k : f.kids) parts.push_back(rec(k));
      return conjunction(parts);
    }
    case FKind::Or: {
      std::vector<std::string> parts;
      for (const auto& k : f.kids) parts.push_back(rec(k));
      return disjunction(parts);
    }
    case FKind::Not:
      return "(not " + rec(f.kids[0]) + ")";
    case FKind::Implies:
      return "(=> " + rec(f.kids[0]) + " " + rec(f.kids[1]) + ")";
    case FKind::Iff:
      return "(= " + rec(f.kids[0]) + " " + rec(f.kids[1]) + ")";
    case FKind::Eq:
      return "(= " + f.terms[0] + " " + f.terms[1] + ")";
    case FKind::Distinct: {
      if (f.terms.size() < 2) return "true";
      std::string s = "(distinct";
      for (const auto& t : f.terms) s += " " + t;
      return s + ")";
    }
    case FKind::Forall:
    case FKind::Exists: {
      std::string binders;
      std::map<std::string, int> inner = env;
      for (const auto& [v, s] : f.binders) {
        if (!binders.empty()) binders += " ";
        binders += "(" + v + " " + spec.sorts[s].name + ")";
        inner[v] = s;
      }
      std::string body = render_fo(spec, f.kids[0], inner, next_copy);
      return std::string(f.kind == FKind::Forall ? "(forall (" : "(exists (") +
             binders + ") " + body + ")";
    }
    case FKind::Apply: {
      std::string name = rel_fun(spec, f.rel, f.primed || next_copy);
      if (f.terms.empty()) return name;
      std::string s = "(" + name;
      for (const auto& t : f.terms) s += " " + t;
      return s + ")";
    }
    case FKind::Member: {
      auto it = env.find(f.terms[1]);
      if (it == env.end())
        throw ConvergeError("unbound member argument '" + f.terms[1] + "'");
      return "(" + member_fun(spec, it->second) + " " + f.terms[0] + " " +
             f.terms[1] + ")";
    }
  }
  throw ConvergeError("unreachable formula kind");
}

// Predicate rendering with the same shape as print_predicate, but with
// phase-suffixed relation symbols for the primed copy.
std::string render_pred_fo(const ProtocolSpec& spec,
                           const QuantifiedPredicate& pred, bool next_copy) {
  auto lit_str = [&](const QLit& l) {
    std::string body = rel_fun(spec, l.rel, next_copy);
    if (!l.args.empty()) {
      body = "(" + body;
      for (const auto& a : l.args) body += " " + a;
      body += ")";
    }
    return l.positive ? body : "(not " + body + ")";
  };

  std::vector<std::string> disjuncts;
  for (const auto& b : pred.branches) {
    std::vector<std::string> lits;
    for (const auto& l : b.lits) lits.push_back(lit_str(l));
    if (b.exist_var.empty()) {
      for (auto& l : lits) disjuncts.push_back(std::move(l));
      continue;
    }
    std::string body = disjunction(lits);
    if (!b.exist_distinct_from.empty()) {
      std::string guard = "(and";
      for (const auto& g : b.exist_distinct_from)
        guard += " (distinct " + b.exist_var + " " + g + ")";
      body = guard + " " + body + ")";
    }
    disjuncts.push_back("(exists ((" + b.exist_var + " " +
                        spec.sorts[b.exist_sort].name + ")) " + body + ")");
  }
  std::string matrix = disjunction(disjuncts);

  if (!pred.distinct_groups.empty()) {
    std::vector<std::string> guards;
    for (const auto& g : pred.distinct_groups) {
      std::string d = "(distinct";
      for (const auto& v : g) d += " " + v;
      guards.push_back(d + ")");
    }
    matrix = "(=> " + conjunction(guards) + " " + matrix + ")";
  }

  if (pred.universals.empty()) return matrix;
  std::string binders;
  for (const auto& u : pred.universals) {
    if (!binders.empty()) binders += " ";
    binders += "(" + u.name + " " + spec.sorts[u.sort].name + ")";
  }
  return "(forall (" + binders + ") " + matrix + ")";
}

std::string invariant_fo(const ProtocolSpec& spec,
                         const std::vector<QuantifiedPredicate>& inv,
                         bool next_copy) {
  std::vector<std::string> parts;
  parts.push_back(render_fo(spec, *spec.safety, {}, next_copy));
  for (const auto& p : inv) parts.push_back(render_pred_fo(spec, p, next_copy));
  return conjunction(parts);
}

// One transition: some action fires with some parameters; relations the
// action does not update keep their value.
std::string transition_fo(const ProtocolSpec& spec) {
  std::vector<std::string> disjuncts;
  for (const auto& act : spec.actions) {
    std::map<std::string, int> env;
    for (const auto& [v, s] : act.params) env[v] = s;

    std::vector<std::string> parts;
    parts.push_back(render_fo(spec, act.guard, env, false));
    for (const auto& [rel, upd] : act.updates)
      parts.push_back(render_fo(spec, upd, env, false));
    for (size_t rel = 0; rel < spec.relations.size(); rel++) {
      const RelationDecl& decl = spec.relations[rel];
      if (decl.role != RelRole::State) continue;
      bool updated = false;
      for (const auto& [urel, upd] : act.updates) updated |= urel == (int)rel;
      if (updated) continue;
      std::string args, binders;
      for (size_t i = 0; i < decl.arg_sorts.size(); i++) {
        std::string v = "FV" + std::to_string(i + 1);
        args += " " + v;
        if (!binders.empty()) binders += " ";
        binders += "(" + v + " " + spec.sorts[decl.arg_sorts[i]].name + ")";
      }
      std::string eq = decl.arg_sorts.empty()
                           ? "(= " + decl.name + "__p " + decl.name + ")"
                           : "(forall (" + binders + ") (= (" + decl.name +
                                 "__p" + args + ") (" + decl.name + args +
                                 ")))";
      parts.push_back(eq);
    }

    std::string body = conjunction(parts);
    if (!act.params.empty()) {
      std::string binders;
      for (const auto& [v, s] : act.params) {
        if (!binders.empty()) binders += " ";
        binders += "(" + v + " " + spec.sorts[s].name + ")";
      }
      body = "(exists (" + binders + ") " + body + ")";
    }
    disjuncts.push_back(body);
  }
  return disjunction(disjuncts);
}

// --- Unbounded solver launch ---------------------------------------------

UnboundedStatus classify_unbounded_output(const std::string& out,
                                          int exit_code) {
  if (exit_code != 0) return UnboundedStatus::NotConfirmed;
  std::istringstream is(out);
  std::string line;
  std::vector<std::string> answers;
  bool noise = false;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty() || line == "success") continue;
    if (line == "goal:init" || line == "goal:consecution") continue;
    if (line == "sat" || line == "unsat" || line == "unknown") {
      answers.push_back(line);
      continue;
    }
    noise = true;  // error output or an unrecognized banner
  }
  if (noise || answers.size() != 2) return UnboundedStatus::NotConfirmed;
  if (answers[0] == "unsat" && answers[1] == "unsat")
    return UnboundedStatus::Confirmed;
  if (answers[0] == "sat" || answers[1] == "sat")
    return UnboundedStatus::Refuted;
  return UnboundedStatus::NotConfirmed;
}

UnboundedStatus run_unbounded_solver(const std::string& cmd,
                                     const std::string& path,
                                     double timeout_seconds) {
  std::string quoted = "'";
  for (char ch : path)
    quoted += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  quoted += "'";
  std::string full;
  if (timeout_seconds > 0)
    full = "timeout " +
           std::to_string(static_cast<uint64_t>(std::ceil(timeout_seconds))) +
           "s ";
  full += cmd + " < " + quoted + " 2>&1";

  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return UnboundedStatus::NotConfirmed;
  std::string out;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return classify_unbounded_output(out, exit_code);
}

std::string grown_log(const std::string& base, const std::string& tag) {
  return base.empty() ? base : base + "." + tag + ".smt2";
}

}  // namespace

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Safe: return "safe";
    case Outcome::Violated: return "violated";
    case Outcome::ResourcesExhausted: return "resources-exhausted";
  }
  return "unknown";
}

const char* to_string(UnboundedStatus s) {
  switch (s) {
    case UnboundedStatus::NotRun: return "not-run";
    case UnboundedStatus::Confirmed: return "confirmed";
    case UnboundedStatus::NotConfirmed: return "not-confirmed";
    case UnboundedStatus::Refuted: return "refuted";
  }
  return "unknown";
}

SizeAssignment default_base_sizes(const ProtocolSpec& spec) {
  std::map<int, uint32_t> binder_count;
  auto walk = [&](auto&& self, const Formula& f) -> void {
    for (const auto& [v, s] : f.binders) binder_count[s]++;
    for (const auto& k : f.kids) self(self, k);
  };
  if (spec.safety) walk(walk, *spec.safety);
  SizeAssignment out;
  for (int s : independent_sorts(spec))
    out[spec.sorts[s].name] = binder_count[s] == 1 ? 1 : 2;
  return out;
}

CutoffOutcome check_cutoff(std::shared_ptr<const ProtocolSpec> spec,
                           const SizeAssignment& sizes,
                           const std::vector<QuantifiedPredicate>& inv,
                           const SolverClient::Config& solver,
                           uint64_t max_vars) {
  CutoffOutcome out;
  for (const auto& p : inv)
    if (!transferable(p)) {
      out.non_compact = true;
      return out;
    }

  for (int s : independent_sorts(*spec)) {
    const std::string& name = spec->sorts[s].name;
    SizeAssignment grown = sizes;
    grown[name]++;
    auto inst = std::make_shared<FiniteInstance>(
        build_instance(spec, grown, max_vars));

    std::vector<std::string> curr = {render_smt(*inst, inst->safety)};
    std::vector<std::string> next = {
        render_smt(*inst, ground_formula(*inst, *spec->safety, Phase::Next))};
    for (const auto& p : inv)
      for (const auto& c : expand(*inst, p)) {
        curr.push_back(clause_text(*inst, c, Phase::Curr));
        next.push_back(clause_text(*inst, c, Phase::Next));
      }

    SolverClient::Config cfg = solver;
    cfg.log_path = grown_log(solver.log_path, name);
    SolverClient client(inst, cfg);

    // Initiation on the grown instance.
    QueryResult a = client.check({client.init_sel()},
                                 {"(not " + conjunction(curr) + ")"}, false,
                                 false);
    out.smt_checks++;
    if (a.sat) {
      out.failed_sort = s;
      return out;
    }

    // Consecution on the grown instance.
    std::vector<std::string> asserts = curr;
    asserts.push_back("(not " + conjunction(next) + ")");
    QueryResult b =
        client.check({client.trans_sel()}, asserts, false, false);
    out.smt_checks++;
    if (b.sat) {
      out.failed_sort = s;
      return out;
    }
  }
  out.pass = true;
  return out;
}

void emit_unbounded_check(const ProtocolSpec& spec,
                          const std::vector<QuantifiedPredicate>& inv,
                          const std::string& path) {
  std::ostringstream os;
  os << "; Unbounded induction goals for the derived invariant. Goal\n"
     << "; \"init\" checks initiation, goal \"consecution\" checks one-step\n"
     << "; closure; both are expected unsat.\n"
     << "(set-logic UF)\n";

  for (const auto& sd : spec.sorts)
    os << "(declare-sort " << sd.name << " 0)\n";
  for (size_t i = 0; i < spec.sorts.size(); i++) {
    const SortDecl& sd = spec.sorts[i];
    if (sd.kind != SortKind::DependentMajority) continue;
    const std::string base = spec.sorts[sd.base].name;
    const std::string mem = member_fun(spec, static_cast<int>(i));
    os << "(declare-fun " << mem << " (" << base << " " << sd.name
       << ") Bool)\n";
    // Majority subsets pairwise intersect; this is the only property of
    // the constructor the protocol logic relies on.
    os << "(assert (forall ((Q1 " << sd.name << ") (Q2 " << sd.name
       << ")) (exists ((N " << base << ")) (and (" << mem << " N Q1) ("
       << mem << " N Q2)))))\n";
  }
  for (const auto& ax : spec.axioms)
    os << "(assert " << render_fo(spec, ax, {}, false) << ")\n";

  for (const auto& rd : spec.relations) {
    if (rd.role != RelRole::State) continue;
    std::string args;
    for (size_t i = 0; i < rd.arg_sorts.size(); i++)
      args += (i ? " " : "") + spec.sorts[rd.arg_sorts[i]].name;
    os << "(declare-fun " << rd.name << " (" << args << ") Bool)\n";
    os << "(declare-fun " << rd.name << "__p (" << args << ") Bool)\n";
  }
  for (const auto& def : spec.definitions) {
    for (bool next : {false, true}) {
      std::string binders;
      std::map<std::string, int> env;
      for (const auto& [v, s] : def.params) {
        if (!binders.empty()) binders += " ";
        binders += "(" + v + " " + spec.sorts[s].name + ")";
        env[v] = s;
      }
      os << "(define-fun " << rel_fun(spec, def.rel, next) << " (" << binders
         << ") Bool " << render_fo(spec, def.body, env, next) << ")\n";
    }
  }

  std::string inv_curr = invariant_fo(spec, inv, false);
  std::string inv_next = invariant_fo(spec, inv, true);
  os << "(push 1)\n"
     << "(echo \"goal:init\")\n"
     << "(assert " << render_fo(spec, *spec.init, {}, false) << ")\n"
     << "(assert (not " << inv_curr << "))\n"
     << "(check-sat)\n"
     << "(pop 1)\n";
  os << "(push 1)\n"
     << "(echo \"goal:consecution\")\n"
     << "(assert " << inv_curr << ")\n"
     << "(assert " << transition_fo(spec) << ")\n"
     << "(assert (not " << inv_next << "))\n"
     << "(check-sat)\n"
     << "(pop 1)\n"
     << "(exit)\n";

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f.good())
    throw ConvergeError("cannot write unbounded check file: " + path);
  f << os.str();
  f.close();
  if (!f.good())
    throw ConvergeError("cannot write unbounded check file: " + path);
}

ConvergeResult run_converge(std::shared_ptr<const ProtocolSpec> spec,
                            const SizeAssignment& base,
                            const ConvergeOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  };

  ConvergeResult r;
  r.base_sizes = base;
  r.sizes = base;
  std::vector<QuantifiedPredicate> seeds;

  auto finish = [&](Outcome o, std::string reason = "") {
    r.outcome = o;
    r.reason = std::move(reason);
    r.wall_seconds = elapsed();
    return r;
  };

  for (;;) {
    r.iterations++;
    double remaining = 0;
    if (opts.timeout_seconds > 0) {
      remaining = opts.timeout_seconds - elapsed();
      if (remaining <= 0)
        return finish(Outcome::ResourcesExhausted, "time budget exhausted");
    }

    std::shared_ptr<const FiniteInstance> inst;
    try {
      inst = std::make_shared<FiniteInstance>(
          build_instance(spec, r.sizes, opts.max_vars));
    } catch (const GroundError& e) {
      return finish(Outcome::ResourcesExhausted, e.what());
    }

    SymIC3::Config ecfg = opts.engine;
    ecfg.seeds = seeds;
    ecfg.solver.log_path = grown_log(opts.engine.solver.log_path,
                                     "iter" + std::to_string(r.iterations));
    if (opts.timeout_seconds > 0)
      ecfg.timeout_seconds = ecfg.timeout_seconds > 0
                                 ? std::min(ecfg.timeout_seconds, remaining)
                                 : remaining;

    EngineResult er;
    try {
      SymIC3 engine(inst, ecfg);
      er = engine.run();
    } catch (const TimeoutError&) {
      return finish(Outcome::ResourcesExhausted, "time budget exhausted");
    } catch (const EngineError& e) {
      return finish(Outcome::ResourcesExhausted, e.what());
    }

    r.stats.smt_checks += er.stats.smt_checks;
    r.stats.ctis += er.stats.ctis;
    r.stats.clauses_learned += er.stats.clauses_learned;
    r.stats.orbit_checks += er.stats.orbit_checks;
    r.stats.seeds_installed += er.stats.seeds_installed;
    r.stats.frames = er.stats.frames;

    if (er.verdict == Verdict::Violated) {
      r.trace = std::move(er.trace);
      r.trace_vars.clear();
      for (VarId v = 0; v < inst->num_state_vars; v++)
        r.trace_vars.push_back(smt_name(*inst, v, Phase::Curr));
      return finish(Outcome::Violated);
    }

    std::vector<QuantifiedPredicate> inv = std::move(er.invariant);
    if (opts.antecedent_reduction)
      for (auto& p : inv) antecedent_reduction(*inst, p);
    if (opts.epr_reduction) {
      EprReport rep = epr_check(*spec, inv);
      if (!rep.stratified) epr_reduction(*inst, inv);
    }

    if (opts.oracle_check && inst->num_state_vars <= 24) {
      ReachResult reach = bfs_reach(*inst);
      if (!reach.safe)
        throw ConvergeError(
            "soundness failure: engine proved an instance the oracle finds "
            "unsafe");
      std::vector<GroundClause> all;
      for (const auto& p : inv)
        all.insert(all.end(), p.ground_clauses.begin(),
                   p.ground_clauses.end());
      InvariantCheck chk = check_invariant_explicit(*inst, all);
      if (!chk.holds())
        throw ConvergeError(
            "soundness failure: engine invariant is not inductive under "
            "exhaustive checking");
    }

    r.invariant = inv;

    CutoffOutcome cut;
    try {
      SolverClient::Config scfg = opts.engine.solver;
      scfg.log_path = grown_log(opts.engine.solver.log_path,
                                "cutoff" + std::to_string(r.iterations));
      cut = check_cutoff(spec, r.sizes, inv, scfg, opts.max_vars);
    } catch (const GroundError& e) {
      return finish(Outcome::ResourcesExhausted, e.what());
    }
    r.stats.smt_checks += cut.smt_checks;

    if (cut.pass) {
      std::string path = opts.emit_unbounded;
      if (path.empty() && opts.check_unbounded)
        path = (std::filesystem::temp_directory_path() /
                ("symquant_unbounded_" + std::to_string(getpid()) + ".smt2"))
                   .string();
      if (!path.empty()) emit_unbounded_check(*spec, inv, path);
      if (opts.check_unbounded)
        r.unbounded = run_unbounded_solver(
            opts.unbounded_solver_cmd.empty() ? opts.engine.solver.cmd
                                              : opts.unbounded_solver_cmd,
            path, opts.unbounded_timeout_seconds);
      if (r.unbounded == UnboundedStatus::Refuted)
        return finish(
            Outcome::ResourcesExhausted,
            "unbounded induction check refuted the invariant; increase the "
            "base sizes");
      return finish(Outcome::Safe);
    }

    // Grow the sort that broke a check. A non-compact invariant names no
    // sort; grow the smallest one and hope the rerun learns predicates
    // that transfer.
    std::string grow;
    if (cut.non_compact) {
      uint32_t best = ~0u;
      for (int s : independent_sorts(*spec)) {
        uint32_t sz = r.sizes.at(spec->sorts[s].name);
        if (sz < best) {
          best = sz;
          grow = spec->sorts[s].name;
        }
      }
    } else {
      grow = spec->sorts[cut.failed_sort].name;
    }
    r.growth.push_back(grow);
    r.sizes[grow]++;

    seeds.clear();
    for (const auto& p : inv)
      if (transferable(p)) seeds.push_back(p);
  }
}

std::string certificate_text(const ProtocolSpec& spec,
                             const ConvergeResult& r) {
  std::string s;
  s += std::string("(verdict ") + to_string(r.outcome) + ")\n";
  for (int i : independent_sorts(spec)) {
    const std::string& name = spec.sorts[i].name;
    s += "(size " + name + " " + std::to_string(r.sizes.at(name)) + ")\n";
  }
  if (r.outcome == Outcome::Safe) {
    s += "(safety " + print_formula(*spec.safety, spec) + ")\n";
    for (const auto& p : r.invariant)
      s += "(assertion " + print_predicate(spec, p) + ")\n";
  }
  return s;
}

std::string result_json(const ProtocolSpec& spec, const ConvergeResult& r) {
  nlohmann::json j;
  j["verdict"] = to_string(r.outcome);
  if (!r.reason.empty()) j["reason"] = r.reason;
  j["base_sizes"] = r.base_sizes;
  j["sizes"] = r.sizes;
  j["growth"] = r.growth;
  j["iterations"] = r.iterations;
  j["unbounded"] = to_string(r.unbounded);
  j["stats"] = {{"smt_checks", r.stats.smt_checks},
                {"ctis", r.stats.ctis},
                {"clauses_learned", r.stats.clauses_learned},
                {"orbit_checks", r.stats.orbit_checks},
                {"seeds_installed", r.stats.seeds_installed},
                {"frames", r.stats.frames}};
  j["wall_seconds"] = r.wall_seconds;
  std::vector<std::string> assertions;
  for (const auto& p : r.invariant)
    assertions.push_back(print_predicate(spec, p));
  j["assertions"] = assertions;
  if (!r.trace.empty()) {
    std::vector<std::string> steps;
    for (const auto& st : r.trace) {
      std::string bits;
      for (int8_t b : st) bits += b ? '1' : '0';
      steps.push_back(bits);
    }
    j["trace"] = steps;
    j["trace_vars"] = r.trace_vars;
  }
  return j.dump(2) + "\n";
}

}  // namespace symquant
