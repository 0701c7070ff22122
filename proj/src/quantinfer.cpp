// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/quantinfer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "symquant/spec.hpp"

namespace symquant {

namespace {

// Literal whose arguments may still be instance constants (mid-inference).
struct BArg {
  bool is_var = false;
  uint32_t konst = 0;
  std::string var;
};

struct BLit {
  int rel;
  std::vector<BArg> args;
  bool positive;
};

struct BBranch {
  std::string exist_var;
  int exist_sort = -1;
  std::vector<std::string> guards;
  std::vector<BLit> lits;
};

// Short, unique, capitalized variable prefixes per sort (node -> N).
std::vector<std::string> var_prefixes(const ProtocolSpec& spec) {
  std::vector<std::string> out(spec.sorts.size());
  std::vector<size_t> len(spec.sorts.size(), 1);
  for (;;) {
    std::map<std::string, int> seen;
    for (size_t s = 0; s < out.size(); s++) {
      out[s] = spec.sorts[s].name.substr(0, len[s]);
      out[s][0] = static_cast<char>(
          std::toupper(static_cast<unsigned char>(out[s][0])));
      seen[out[s]]++;
    }
    bool grew = false;
    for (size_t s = 0; s < out.size(); s++) {
      if (seen[out[s]] > 1 && len[s] < spec.sorts[s].name.size()) {
        len[s]++;
        grew = true;
      }
    }
    if (!grew) break;
  }
  // Names still colliding (identical sort names cannot happen) or equal to
  // a relation name would confuse the printer; suffix the sort index.
  for (size_t s = 0; s < out.size(); s++)
    if (spec.relation_index(out[s]) >= 0) out[s] += std::to_string(s);
  return out;
}

bool mentions_sort_const(const ProtocolSpec& spec, const BLit& lit, int sort) {
  const auto& sorts = spec.relations[lit.rel].arg_sorts;
  for (size_t i = 0; i < lit.args.size(); i++)
    if (!lit.args[i].is_var && sorts[i] == sort) return true;
  return false;
}

// Substitutes constant `c` of `sort` by variable `var` everywhere.
void substitute(const ProtocolSpec& spec, std::vector<BBranch>& branches,
                int sort, uint32_t c, const std::string& var) {
  for (auto& b : branches) {
    for (auto& lit : b.lits) {
      const auto& sorts = spec.relations[lit.rel].arg_sorts;
      for (size_t i = 0; i < lit.args.size(); i++) {
        if (lit.args[i].is_var || sorts[i] != sort ||
            lit.args[i].konst != c)
          continue;
        lit.args[i].is_var = true;
        lit.args[i].var = var;
      }
    }
  }
}

struct Builder {
  const FiniteInstance& inst;
  const ProtocolSpec& spec;
  std::vector<std::string> prefixes;
  std::vector<int> var_counter;
  QuantifiedPredicate pred;
  std::vector<BBranch> branches;

  explicit Builder(const FiniteInstance& in)
      : inst(in),
        spec(*in.spec),
        prefixes(var_prefixes(spec)),
        var_counter(spec.sorts.size(), 0) {}

  std::string fresh(int sort) {
    return prefixes[sort] + std::to_string(++var_counter[sort]);
  }

  // Universal variables over the given constants, pairwise distinct.
  void all_universal(int sort, const std::vector<uint32_t>& consts) {
    std::vector<std::string> vars;
    for (uint32_t c : consts) {
      std::string v = fresh(sort);
      substitute(spec, branches, sort, c, v);
      pred.universals.push_back({v, sort});
      vars.push_back(v);
    }
    if (vars.size() >= 2) pred.distinct_groups.push_back(std::move(vars));
  }

  // Singleton cells become universals; the interchangeable cell collapses
  // into one existential per affected branch, distinct from the universals.
  // Returns false when the shape does not fit, leaving no changes applied.
  bool collapse(int sort, const std::vector<std::vector<uint32_t>>& cells) {
    std::vector<uint32_t> singles;
    std::vector<uint32_t> cell;
    for (const auto& c : cells) {
      if (c.size() == 1)
        singles.push_back(c[0]);
      else if (cell.empty())
        cell = c;
      else
        return false;  // two interchangeable cells
    }
    if (cell.size() < 2) return false;

    std::set<uint32_t> in_cell(cell.begin(), cell.end());
    for (const auto& b : branches) {
      bool touches = false;
      for (const auto& lit : b.lits)
        touches |= mentions_sort_const(spec, lit, sort);
      if (touches && !b.exist_var.empty())
        return false;  // would need two existentials in one branch
      for (const auto& lit : b.lits) {
        const auto& sorts = spec.relations[lit.rel].arg_sorts;
        std::set<uint32_t> cell_consts;
        for (size_t i = 0; i < lit.args.size(); i++)
          if (!lit.args[i].is_var && sorts[i] == sort &&
              in_cell.count(lit.args[i].konst))
            cell_consts.insert(lit.args[i].konst);
        if (cell_consts.size() > 1)
          return false;  // one existential cannot cover both
      }
    }

    std::vector<std::string> svars;
    for (uint32_t c : singles) {
      std::string v = fresh(sort);
      substitute(spec, branches, sort, c, v);
      pred.universals.push_back({v, sort});
      svars.push_back(v);
    }
    if (svars.size() >= 2) pred.distinct_groups.push_back(svars);

    std::vector<BBranch> out;
    for (auto& b : branches) {
      std::map<uint32_t, std::vector<BLit>> by_const;
      std::vector<BLit> base;
      for (auto& lit : b.lits) {
        const auto& sorts = spec.relations[lit.rel].arg_sorts;
        uint32_t found = UINT32_MAX;
        for (size_t i = 0; i < lit.args.size(); i++)
          if (!lit.args[i].is_var && sorts[i] == sort) found = lit.args[i].konst;
        if (found == UINT32_MAX)
          base.push_back(std::move(lit));
        else
          by_const[found].push_back(std::move(lit));
      }
      if (by_const.empty()) {
        b.lits = std::move(base);
        out.push_back(std::move(b));
        continue;
      }
      if (!base.empty()) {
        BBranch kept = b;
        kept.lits = std::move(base);
        out.push_back(std::move(kept));
      }
      // Keep the smallest constant's literals as the representative; the
      // other groups must be its renamings, which the exactness check
      // verifies against the orbit.
      BBranch eb;
      eb.exist_sort = sort;
      eb.exist_var = fresh(sort);
      eb.guards = svars;
      eb.lits = std::move(by_const.begin()->second);
      substitute_branch(eb, sort, by_const.begin()->first, eb.exist_var);
      out.push_back(std::move(eb));
    }
    branches = std::move(out);
    return true;
  }

  void substitute_branch(BBranch& b, int sort, uint32_t c,
                         const std::string& var) {
    for (auto& lit : b.lits) {
      const auto& sorts = spec.relations[lit.rel].arg_sorts;
      for (size_t i = 0; i < lit.args.size(); i++) {
        if (lit.args[i].is_var || sorts[i] != sort || lit.args[i].konst != c)
          continue;
        lit.args[i].is_var = true;
        lit.args[i].var = var;
      }
    }
  }

  QuantifiedPredicate build(const GroundClause& rep) {
    BBranch root;
    for (const auto& lit : rep.lits) {
      BLit bl{lit.rel, {}, lit.positive};
      for (uint32_t a : lit.args) bl.args.push_back({false, a, ""});
      root.lits.push_back(std::move(bl));
    }
    branches = {std::move(root)};

    auto occ = occurring_constants(inst, rep);
    for (size_t s = 0; s < spec.sorts.size(); s++) {
      auto it = occ.find(static_cast<int>(s));
      if (it == occ.end()) continue;
      const std::vector<uint32_t>& consts = it->second;
      uint32_t n = inst.size_of(static_cast<int>(s));
      if (consts.size() == n && n > 1) {
        auto cells = interchangeable_cells(inst, rep, static_cast<int>(s));
        if (collapse(static_cast<int>(s), cells)) continue;
      }
      all_universal(static_cast<int>(s), consts);
    }

    for (const auto& b : branches) {
      QBranch qb;
      qb.exist_var = b.exist_var;
      qb.exist_sort = b.exist_sort;
      qb.exist_distinct_from = b.guards;
      for (const auto& lit : b.lits) {
        QLit ql{lit.rel, {}, lit.positive};
        for (const auto& a : lit.args) ql.args.push_back(a.var);
        qb.lits.push_back(std::move(ql));
      }
      pred.branches.push_back(std::move(qb));
    }
    return std::move(pred);
  }
};

GroundLit instantiate(const QLit& lit,
                      const std::map<std::string, uint32_t>& env) {
  GroundLit out{lit.rel, {}, lit.positive};
  for (const auto& a : lit.args) out.args.push_back(env.at(a));
  return out;
}

}  // namespace

QuantifiedPredicate sym_boost(const FiniteInstance& inst,
                              const SymmetryGroup& group,
                              const GroundClause& clause) {
  std::vector<GroundClause> orbit = logical_orbit(inst, group, clause);
  QuantifiedPredicate candidate = Builder(inst).build(orbit.front());
  std::vector<GroundClause> expansion = expand(inst, candidate);
  if (expansion == orbit) {
    candidate.ground_clauses = std::move(orbit);
    return candidate;
  }
  QuantifiedPredicate fallback;
  fallback.compact = false;
  fallback.ground_clauses = std::move(orbit);
  return fallback;
}

std::vector<GroundClause> expand(const FiniteInstance& inst,
                                 const QuantifiedPredicate& pred,
                                 ExpandStats* stats) {
  ExpandStats local;
  ExpandStats& st = stats ? *stats : local;
  if (!pred.compact) return pred.ground_clauses;

  std::vector<GroundClause> out;
  std::vector<uint32_t> tuple(pred.universals.size(), 0);
  std::map<std::string, uint32_t> env;
  for (;;) {
    st.assignments++;
    for (size_t i = 0; i < tuple.size(); i++)
      env[pred.universals[i].name] = tuple[i];

    bool distinct_ok = true;
    for (const auto& group : pred.distinct_groups) {
      for (size_t i = 0; i < group.size() && distinct_ok; i++)
        for (size_t j = i + 1; j < group.size(); j++)
          if (env[group[i]] == env[group[j]]) {
            distinct_ok = false;
            break;
          }
      if (!distinct_ok) break;
    }

    if (distinct_ok) {
      std::vector<GroundLit> lits;
      for (const auto& b : pred.branches) {
        if (b.exist_var.empty()) {
          for (const auto& lit : b.lits) lits.push_back(instantiate(lit, env));
          continue;
        }
        for (uint32_t c = 0; c < inst.size_of(b.exist_sort); c++) {
          bool excluded = false;
          for (const auto& g : b.exist_distinct_from)
            excluded |= env.at(g) == c;
          if (excluded) continue;
          env[b.exist_var] = c;
          for (const auto& lit : b.lits) lits.push_back(instantiate(lit, env));
        }
        env.erase(b.exist_var);
      }
      try {
        out.push_back(make_clause(std::move(lits)));
        st.emitted++;
      } catch (const GroundError&) {
        st.tautologies++;
      }
    } else {
      st.vacuous++;
    }

    size_t i = tuple.size();
    bool done = true;
    while (i > 0) {
      i--;
      if (++tuple[i] < inst.size_of(pred.universals[i].sort)) {
        done = false;
        break;
      }
      tuple[i] = 0;
    }
    if (done || tuple.empty()) break;
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void antecedent_reduction(const FiniteInstance& inst,
                          QuantifiedPredicate& pred) {
  if (!pred.compact) return;
  std::vector<GroundClause> want = expand(inst, pred);
  bool changed = true;
  while (changed) {
    changed = false;
    // Try dropping a whole guard group, then single variables from groups.
    for (size_t g = 0; g < pred.distinct_groups.size(); g++) {
      QuantifiedPredicate trial = pred;
      trial.distinct_groups.erase(trial.distinct_groups.begin() +
                                  static_cast<long>(g));
      if (expand(inst, trial) == want) {
        pred = std::move(trial);
        changed = true;
        break;
      }
    }
    if (changed) continue;
    for (size_t g = 0; g < pred.distinct_groups.size() && !changed; g++) {
      if (pred.distinct_groups[g].size() < 3) continue;
      for (size_t v = 0; v < pred.distinct_groups[g].size(); v++) {
        QuantifiedPredicate trial = pred;
        trial.distinct_groups[g].erase(trial.distinct_groups[g].begin() +
                                       static_cast<long>(v));
        if (expand(inst, trial) == want) {
          pred = std::move(trial);
          changed = true;
          break;
        }
      }
    }
  }
  pred.ground_clauses = want;
}

namespace {

void axiom_edges(const Formula& f, std::vector<int>& enclosing,
                 std::set<std::pair<int, int>>& edges) {
  if (f.kind == FKind::Exists) {
    for (const auto& [var, sort] : f.binders)
      for (int u : enclosing) edges.insert({u, sort});
    axiom_edges(f.kids[0], enclosing, edges);
    return;
  }
  if (f.kind == FKind::Forall) {
    size_t added = f.binders.size();
    for (const auto& [var, sort] : f.binders) enclosing.push_back(sort);
    axiom_edges(f.kids[0], enclosing, edges);
    enclosing.resize(enclosing.size() - added);
    return;
  }
  for (const auto& k : f.kids) axiom_edges(k, enclosing, edges);
}

}  // namespace

EprReport epr_check(const ProtocolSpec& spec,
                    const std::vector<QuantifiedPredicate>& preds) {
  std::set<std::pair<int, int>> edges;
  for (const auto& ax : spec.axioms) {
    std::vector<int> enclosing;
    axiom_edges(ax, enclosing, edges);
  }
  for (const auto& p : preds) {
    if (!p.compact) continue;
    for (const auto& b : p.branches) {
      if (b.exist_var.empty()) continue;
      for (const auto& u : p.universals) edges.insert({u.sort, b.exist_sort});
    }
  }

  // Cycle detection over the sort alternation graph.
  size_t n = spec.sorts.size();
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<int> stack;
  EprReport report;
  auto dfs = [&](auto&& self, int s) -> bool {
    state[s] = 1;
    stack.push_back(s);
    for (const auto& [u, v] : edges) {
      if (u != s) continue;
      if (state[v] == 1) {
        auto it = std::find(stack.begin(), stack.end(), v);
        report.cycle_sorts.assign(it, stack.end());
        return true;
      }
      if (state[v] == 0 && self(self, v)) return true;
    }
    stack.pop_back();
    state[s] = 2;
    return false;
  };
  for (size_t s = 0; s < n; s++)
    if (state[s] == 0 && dfs(dfs, static_cast<int>(s))) {
      report.stratified = false;
      break;
    }
  return report;
}

void epr_reduction(const FiniteInstance& inst,
                   std::vector<QuantifiedPredicate>& preds) {
  for (;;) {
    EprReport report = epr_check(*inst.spec, preds);
    if (report.stratified) return;
    std::set<int> cycle(report.cycle_sorts.begin(),
                        report.cycle_sorts.end());
    // Demote one predicate that contributes an edge inside the cycle.
    for (auto& p : preds) {
      if (!p.compact) continue;
      bool offender = false;
      for (const auto& b : p.branches) {
        if (b.exist_var.empty() || !cycle.count(b.exist_sort)) continue;
        for (const auto& u : p.universals)
          offender |= cycle.count(u.sort) != 0;
      }
      if (offender) {
        p.ground_clauses = expand(inst, p);
        p.compact = false;
        p.branches.clear();
        p.universals.clear();
        p.distinct_groups.clear();
        offender = false;
        goto next_round;
      }
    }
    return;  // the cycle comes from the axioms alone
  next_round:;
  }
}

namespace {

std::string lit_str(const ProtocolSpec& spec, const QLit& lit) {
  std::string body = spec.relations[lit.rel].name;
  if (!lit.args.empty()) {
    body = "(" + body;
    for (const auto& a : lit.args) body += " " + a;
    body += ")";
  }
  return lit.positive ? body : "(not " + body + ")";
}

std::string disjunction(std::vector<std::string> parts) {
  if (parts.empty()) return "false";
  if (parts.size() == 1) return parts[0];
  std::string s = "(or";
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

}  // namespace

std::string print_predicate(const ProtocolSpec& spec,
                            const QuantifiedPredicate& pred) {
  std::vector<std::string> disjuncts;
  for (const auto& b : pred.branches) {
    std::vector<std::string> lits;
    for (const auto& l : b.lits) lits.push_back(lit_str(spec, l));
    if (b.exist_var.empty()) {
      for (auto& l : lits) disjuncts.push_back(std::move(l));
      continue;
    }
    std::string body = disjunction(std::move(lits));
    if (!b.exist_distinct_from.empty()) {
      std::string guard = "(and";
      for (const auto& g : b.exist_distinct_from)
        guard += " (distinct " + b.exist_var + " " + g + ")";
      body = guard + " " + body + ")";
    }
    disjuncts.push_back("(exists ((" + b.exist_var + " " +
                        spec.sorts[b.exist_sort].name + ")) " + body + ")");
  }
  std::string matrix = disjunction(std::move(disjuncts));

  if (!pred.distinct_groups.empty()) {
    std::vector<std::string> guards;
    for (const auto& g : pred.distinct_groups) {
      std::string d = "(distinct";
      for (const auto& v : g) d += " " + v;
      guards.push_back(d + ")");
    }
    std::string guard = guards.size() == 1 ? guards[0] : [&] {
      std::string s = "(and";
      for (const auto& g : guards) s += " " + g;
      return s + ")";
    }();
    matrix = "(=> " + guard + " " + matrix + ")";
  }

  if (pred.universals.empty()) return matrix;
  std::string binders;
  for (const auto& u : pred.universals) {
    if (!binders.empty()) binders += " ";
    binders += "(" + u.name + " " + spec.sorts[u.sort].name + ")";
  }
  return "(forall (" + binders + ") " + matrix + ")";
}

std::string print_predicate_ground(const FiniteInstance& inst,
                                   const QuantifiedPredicate& pred) {
  const ProtocolSpec& spec = *inst.spec;
  std::vector<std::string> clauses;
  for (const auto& c : pred.ground_clauses) {
    std::vector<std::string> lits;
    for (const auto& l : c.lits) {
      std::string body = spec.relations[l.rel].name;
      if (!l.args.empty()) {
        body = "(" + body;
        for (size_t i = 0; i < l.args.size(); i++)
          body +=
              " " + inst.const_name(spec.relations[l.rel].arg_sorts[i],
                                    l.args[i]);
        body += ")";
      }
      lits.push_back(l.positive ? body : "(not " + body + ")");
    }
    clauses.push_back(disjunction(std::move(lits)));
  }
  if (clauses.size() == 1) return clauses[0];
  std::string s = "(and";
  for (const auto& c : clauses) s += " " + c;
  return s + ")";
}

}  // namespace symquant
