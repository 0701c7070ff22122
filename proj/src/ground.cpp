// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/ground.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <sstream>

namespace symquant {

GRef g_true() {
  static GRef t = [] {
    auto n = std::make_shared<GNode>();
    n->kind = GKind::True;
    return n;
  }();
  return t;
}

GRef g_false() {
  static GRef f = [] {
    auto n = std::make_shared<GNode>();
    n->kind = GKind::False;
    return n;
  }();
  return f;
}

GRef g_bool(bool b) { return b ? g_true() : g_false(); }

GRef g_var(VarId v, Phase p) {
  auto n = std::make_shared<GNode>();
  n->kind = GKind::Var;
  n->var = v;
  n->phase = p;
  return n;
}

GRef g_aux(int rel, std::vector<uint32_t> args, Phase p) {
  auto n = std::make_shared<GNode>();
  n->kind = GKind::Aux;
  n->rel = rel;
  n->args = std::move(args);
  n->phase = p;
  return n;
}

GRef g_not(GRef a) {
  if (a->kind == GKind::True) return g_false();
  if (a->kind == GKind::False) return g_true();
  if (a->kind == GKind::Not) return a->kids[0];
  auto n = std::make_shared<GNode>();
  n->kind = GKind::Not;
  n->kids.push_back(std::move(a));
  return n;
}

static GRef g_nary(GKind kind, std::vector<GRef> kids) {
  GKind unit = kind == GKind::And ? GKind::True : GKind::False;
  GKind absorb = kind == GKind::And ? GKind::False : GKind::True;
  std::vector<GRef> flat;
  for (auto& k : kids) {
    if (k->kind == absorb) return kind == GKind::And ? g_false() : g_true();
    if (k->kind == unit) continue;
    if (k->kind == kind) {
      for (const auto& kk : k->kids) flat.push_back(kk);
    } else {
      flat.push_back(std::move(k));
    }
  }
  if (flat.empty()) return kind == GKind::And ? g_true() : g_false();
  if (flat.size() == 1) return flat[0];
  auto n = std::make_shared<GNode>();
  n->kind = kind;
  n->kids = std::move(flat);
  return n;
}

GRef g_and(std::vector<GRef> kids) { return g_nary(GKind::And, std::move(kids)); }
GRef g_or(std::vector<GRef> kids) { return g_nary(GKind::Or, std::move(kids)); }

GRef g_iff(GRef a, GRef b) {
  if (a->kind == GKind::True) return b;
  if (b->kind == GKind::True) return a;
  if (a->kind == GKind::False) return g_not(b);
  if (b->kind == GKind::False) return g_not(a);
  auto n = std::make_shared<GNode>();
  n->kind = GKind::Iff;
  n->kids = {std::move(a), std::move(b)};
  return n;
}

GroundClause make_clause(std::vector<GroundLit> lits) {
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (size_t i = 0; i + 1 < lits.size(); i++)
    if (lits[i].rel == lits[i + 1].rel && lits[i].args == lits[i + 1].args)
      throw GroundError("tautological clause");
  return {std::move(lits)};
}

GroundCube make_cube(std::vector<GroundLit> lits) {
  GroundClause c = make_clause(std::move(lits));  // same canonical form
  return {std::move(c.lits)};
}

GroundClause negate_cube(const GroundCube& c) {
  std::vector<GroundLit> lits;
  lits.reserve(c.lits.size());
  for (const auto& l : c.lits) lits.push_back(l.negated());
  return {std::move(lits)};  // negating every sign keeps the ordering
}

GroundCube negate_clause(const GroundClause& c) {
  std::vector<GroundLit> lits;
  lits.reserve(c.lits.size());
  for (const auto& l : c.lits) lits.push_back(l.negated());
  return {std::move(lits)};
}

namespace {

// Variable binding during grounding: name -> (sort, constant index). The sort
// rides along so member applications can consult the right constant table.
using Binding = std::map<std::string, std::pair<int, uint32_t>>;

std::string dependent_const_name(const std::string& sort_name,
                                 const std::vector<uint32_t>& members,
                                 uint32_t base_size) {
  std::string name = sort_name;
  for (size_t i = 0; i < members.size(); i++) {
    if (base_size > 9 && i) name += '_';
    name += std::to_string(members[i] + 1);
  }
  return name;
}

std::vector<std::vector<uint32_t>> combinations(uint32_t n, uint32_t k) {
  std::vector<std::vector<uint32_t>> out;
  std::vector<uint32_t> c(k);
  for (uint32_t i = 0; i < k; i++) c[i] = i;
  for (;;) {
    out.push_back(c);
    int i = static_cast<int>(k) - 1;
    while (i >= 0 && c[i] == n - k + static_cast<uint32_t>(i)) i--;
    if (i < 0) break;
    c[i]++;
    for (uint32_t j = i + 1; j < k; j++) c[j] = c[j - 1] + 1;
  }
  return out;
}

// Row-major enumeration of constant tuples for a signature, last index fast.
void for_each_tuple(const FiniteInstance& inst, const std::vector<int>& sig,
                    const std::function<void(const std::vector<uint32_t>&)>& fn) {
  if (sig.empty()) {
    fn({});
    return;
  }
  std::vector<uint32_t> tuple(sig.size(), 0);
  for (;;) {
    fn(tuple);
    size_t i = sig.size();
    for (;;) {
      if (i == 0) return;
      i--;
      if (++tuple[i] < inst.size_of(sig[i])) break;
      tuple[i] = 0;
    }
  }
}

struct Grounder {
  const FiniteInstance& inst;

  uint32_t resolve(const std::string& name, const Binding& bind) const {
    auto it = bind.find(name);
    if (it == bind.end())
      throw GroundError("unbound variable '" + name + "' at grounding");
    return it->second.second;
  }

  GRef go(const Formula& f, Phase phase, Binding& bind) {
    switch (f.kind) {
      case FKind::And:
      case FKind::Or: {
        std::vector<GRef> kids;
        kids.reserve(f.kids.size());
        for (const auto& k : f.kids) kids.push_back(go(k, phase, bind));
        return f.kind == FKind::And ? g_and(std::move(kids))
                                    : g_or(std::move(kids));
      }
      case FKind::Not:
        return g_not(go(f.kids[0], phase, bind));
      case FKind::Implies:
        return g_or(
            {g_not(go(f.kids[0], phase, bind)), go(f.kids[1], phase, bind)});
      case FKind::Iff:
        return g_iff(go(f.kids[0], phase, bind), go(f.kids[1], phase, bind));
      case FKind::Eq:
        return g_bool(resolve(f.terms[0], bind) == resolve(f.terms[1], bind));
      case FKind::Distinct: {
        for (size_t i = 0; i < f.terms.size(); i++)
          for (size_t j = i + 1; j < f.terms.size(); j++)
            if (resolve(f.terms[i], bind) == resolve(f.terms[j], bind))
              return g_false();
        return g_true();
      }
      case FKind::Member: {
        uint32_t e = resolve(f.terms[0], bind);
        auto it = bind.find(f.terms[1]);
        if (it == bind.end())
          throw GroundError("unbound variable '" + f.terms[1] + "'");
        const auto& mem = inst.consts[it->second.first][it->second.second].members;
        return g_bool(std::binary_search(mem.begin(), mem.end(), e));
      }
      case FKind::Forall:
      case FKind::Exists: {
        std::vector<GRef> parts;
        expand_binders(f, 0, phase, bind, parts);
        return f.kind == FKind::Forall ? g_and(std::move(parts))
                                       : g_or(std::move(parts));
      }
      case FKind::Apply: {
        Phase p = phase;
        if (f.primed) {
          if (phase != Phase::Curr)
            throw GroundError("primed application in a next-state context");
          p = Phase::Next;
        }
        std::vector<uint32_t> args;
        args.reserve(f.terms.size());
        for (const auto& t : f.terms) args.push_back(resolve(t, bind));
        if (inst.is_definition(f.rel)) return g_aux(f.rel, std::move(args), p);
        return g_var(inst.state_var(f.rel, args), p);
      }
    }
    throw GroundError("unreachable formula kind");
  }

  void expand_binders(const Formula& f, size_t i, Phase phase, Binding& bind,
                      std::vector<GRef>& out) {
    if (i == f.binders.size()) {
      out.push_back(go(f.kids[0], phase, bind));
      return;
    }
    const auto& [var, sort] = f.binders[i];
    auto saved_it = bind.find(var);
    std::optional<std::pair<int, uint32_t>> saved;
    if (saved_it != bind.end()) saved = saved_it->second;
    for (uint32_t c = 0; c < inst.size_of(sort); c++) {
      bind[var] = {sort, c};
      expand_binders(f, i + 1, phase, bind, out);
    }
    if (saved)
      bind[var] = *saved;
    else
      bind.erase(var);
  }
};

}  // namespace

VarId FiniteInstance::state_var(int rel, const std::vector<uint32_t>& args) const {
  uint32_t base = rel_base[rel];
  const auto& sig = spec->relations[rel].arg_sorts;
  uint32_t idx = 0;
  for (size_t i = 0; i < sig.size(); i++) idx = idx * size_of(sig[i]) + args[i];
  return base + idx;
}

uint32_t FiniteInstance::def_tuple_index(int def_idx,
                                         const std::vector<uint32_t>& args) const {
  const auto& sig = spec->relations[spec->definitions[def_idx].rel].arg_sorts;
  uint32_t idx = 0;
  for (size_t i = 0; i < sig.size(); i++) idx = idx * size_of(sig[i]) + args[i];
  return idx;
}

GRef FiniteInstance::definition_body(int rel, const std::vector<uint32_t>& args,
                                     Phase p) const {
  int di = spec->definition_index(rel);
  if (di < 0) throw GroundError("not a definition relation");
  return def_bodies_[di][def_tuple_index(di, args)][p == Phase::Curr ? 0 : 1];
}

std::string FiniteInstance::lit_name(const GroundLit& l) const {
  std::string s = spec->relations[l.rel].name;
  const auto& sig = spec->relations[l.rel].arg_sorts;
  for (size_t i = 0; i < l.args.size(); i++)
    s += "__" + consts[sig[i]][l.args[i]].name;
  return s;
}

GRef ground_formula(const FiniteInstance& inst, const Formula& f, Phase phase,
                    const GroundBinding& binding) {
  Grounder g{inst};
  Binding bind = binding;
  return g.go(f, phase, bind);
}

FiniteInstance build_instance(std::shared_ptr<const ProtocolSpec> spec,
                              const SizeAssignment& sizes, uint64_t max_vars) {
  FiniteInstance inst;
  inst.spec = spec;
  inst.sizes = sizes;

  for (const auto& [name, sz] : sizes) {
    int s = spec->sort_index(name);
    if (s < 0) throw GroundError("size given for unknown sort '" + name + "'");
    if (spec->sorts[s].kind != SortKind::Independent)
      throw GroundError("size given for dependent sort '" + name + "'");
    if (sz == 0) throw GroundError("sort '" + name + "' has size zero");
  }

  inst.consts.resize(spec->sorts.size());
  inst.member_index.resize(spec->sorts.size());
  for (size_t s = 0; s < spec->sorts.size(); s++) {
    const SortDecl& decl = spec->sorts[s];
    if (decl.kind != SortKind::Independent) continue;
    auto it = sizes.find(decl.name);
    if (it == sizes.end())
      throw GroundError("no size given for sort '" + decl.name + "'");
    for (uint32_t i = 0; i < it->second; i++)
      inst.consts[s].push_back({decl.name + std::to_string(i + 1), {}});
  }
  for (size_t s = 0; s < spec->sorts.size(); s++) {
    const SortDecl& decl = spec->sorts[s];
    if (decl.kind != SortKind::DependentMajority) continue;
    uint32_t n = inst.size_of(decl.base);
    uint32_t k = n / 2 + 1;
    for (const auto& comb : combinations(n, k)) {
      inst.member_index[s][comb] = static_cast<uint32_t>(inst.consts[s].size());
      inst.consts[s].push_back({dependent_const_name(decl.name, comb, n), comb});
    }
  }

  // State variable layout: relation declaration order, tuples row-major.
  inst.rel_base.assign(spec->relations.size(), ~0u);
  uint64_t total = 0;
  for (size_t r = 0; r < spec->relations.size(); r++) {
    if (spec->relations[r].role != RelRole::State) continue;
    uint64_t count = 1;
    for (int s : spec->relations[r].arg_sorts) {
      count *= inst.size_of(s);
      if (count > max_vars) throw GroundError("instance exceeds variable budget");
    }
    inst.rel_base[r] = static_cast<uint32_t>(total);
    total += count;
    if (total > max_vars) throw GroundError("instance exceeds variable budget");
  }
  inst.num_state_vars = static_cast<uint32_t>(total);
  inst.var_info_.resize(total);
  for (size_t r = 0; r < spec->relations.size(); r++) {
    if (spec->relations[r].role != RelRole::State) continue;
    for_each_tuple(inst, spec->relations[r].arg_sorts,
                   [&](const std::vector<uint32_t>& tuple) {
                     inst.var_info_[inst.state_var(static_cast<int>(r), tuple)] =
                         {static_cast<int>(r), tuple};
                   });
  }

  // Definition bodies for both phases. Declaration order means references to
  // earlier definitions are fine; they stay symbolic as Aux nodes anyway.
  Grounder g{inst};
  inst.def_bodies_.resize(spec->definitions.size());
  for (size_t d = 0; d < spec->definitions.size(); d++) {
    const Definition& def = spec->definitions[d];
    for_each_tuple(inst, spec->relations[def.rel].arg_sorts,
                   [&](const std::vector<uint32_t>& tuple) {
                     Binding bind;
                     for (size_t i = 0; i < def.params.size(); i++)
                       bind[def.params[i].first] = {def.params[i].second,
                                                    tuple[i]};
                     Binding b2 = bind;
                     GRef curr = g.go(def.body, Phase::Curr, b2);
                     b2 = bind;
                     GRef next = g.go(def.body, Phase::Next, b2);
                     inst.def_bodies_[d].push_back({curr, next});
                     inst.aux_apps.push_back({def.rel, tuple});
                   });
  }

  // Axioms are rigid, so they must fold to a constant; demand true.
  for (const auto& ax : spec->axioms) {
    Binding bind;
    GRef r = g.go(ax, Phase::Curr, bind);
    if (r->kind != GKind::True)
      throw GroundError("axiom does not hold under the constructed tables");
  }

  if (!spec->init || !spec->safety)
    throw GroundError("spec lacks init or safety (typecheck first)");
  {
    Binding bind;
    inst.init = g.go(*spec->init, Phase::Curr, bind);
    bind.clear();
    inst.safety = g.go(*spec->safety, Phase::Curr, bind);
  }

  // Transition disjuncts: one per action and parameter tuple; updates relate
  // primed to unprimed, untouched state relations get frame equalities.
  for (size_t a = 0; a < spec->actions.size(); a++) {
    const Action& act = spec->actions[a];
    std::vector<int> sig;
    for (auto& p : act.params) sig.push_back(p.second);
    for_each_tuple(inst, sig, [&](const std::vector<uint32_t>& tuple) {
      Binding bind;
      for (size_t i = 0; i < act.params.size(); i++)
        bind[act.params[i].first] = {act.params[i].second, tuple[i]};
      std::vector<GRef> parts;
      {
        Binding b2 = bind;
        parts.push_back(g.go(act.guard, Phase::Curr, b2));
      }
      for (const auto& [rel, f] : act.updates) {
        Binding b2 = bind;
        parts.push_back(g.go(f, Phase::Curr, b2));
      }
      for (size_t r = 0; r < spec->relations.size(); r++) {
        if (spec->relations[r].role != RelRole::State) continue;
        bool updated = false;
        for (const auto& [rel, f] : act.updates) updated |= rel == static_cast<int>(r);
        if (updated) continue;
        for_each_tuple(inst, spec->relations[r].arg_sorts,
                       [&](const std::vector<uint32_t>& t2) {
                         VarId v = inst.state_var(static_cast<int>(r), t2);
                         parts.push_back(g_iff(g_var(v, Phase::Next),
                                               g_var(v, Phase::Curr)));
                       });
      }
      GRef d = g_and(std::move(parts));
      if (d->kind != GKind::False)
        inst.trans.push_back({static_cast<int>(a), tuple, d});
    });
  }
  std::vector<GRef> ds;
  for (const auto& d : inst.trans) ds.push_back(d.formula);
  inst.trans_all = g_or(std::move(ds));

  return inst;
}

GroundCube state_as_cube(const FiniteInstance& inst,
                         const std::vector<int8_t>& model) {
  if (model.size() != inst.num_state_vars)
    throw GroundError("partial model: wrong variable count");
  std::vector<GroundLit> lits;
  lits.reserve(model.size());
  for (VarId v = 0; v < inst.num_state_vars; v++) {
    if (model[v] != 0 && model[v] != 1)
      throw GroundError("partial model: variable " + std::to_string(v) +
                        " has no value");
    const auto& info = inst.var_info(v);
    lits.push_back({info.rel, info.args, model[v] == 1});
  }
  return make_cube(std::move(lits));
}

bool eval_ground(const FiniteInstance& inst, const GRef& g, uint64_t curr,
                 uint64_t next) {
  switch (g->kind) {
    case GKind::True: return true;
    case GKind::False: return false;
    case GKind::Var:
      return ((g->phase == Phase::Curr ? curr : next) >> g->var) & 1;
    case GKind::Aux:
      return eval_ground(inst, inst.definition_body(g->rel, g->args, g->phase),
                         curr, next);
    case GKind::Not: return !eval_ground(inst, g->kids[0], curr, next);
    case GKind::And:
      for (const auto& k : g->kids)
        if (!eval_ground(inst, k, curr, next)) return false;
      return true;
    case GKind::Or:
      for (const auto& k : g->kids)
        if (eval_ground(inst, k, curr, next)) return true;
      return false;
    case GKind::Iff:
      return eval_ground(inst, g->kids[0], curr, next) ==
             eval_ground(inst, g->kids[1], curr, next);
  }
  return false;
}

std::string ground_to_string(const FiniteInstance& inst, const GRef& g) {
  switch (g->kind) {
    case GKind::True: return "true";
    case GKind::False: return "false";
    case GKind::Var: {
      const auto& info = inst.var_info(g->var);
      std::string s = inst.lit_name({info.rel, info.args, true});
      return g->phase == Phase::Next ? s + "'" : s;
    }
    case GKind::Aux: {
      std::string s = inst.lit_name({g->rel, g->args, true});
      return g->phase == Phase::Next ? s + "'" : s;
    }
    case GKind::Not: return "(not " + ground_to_string(inst, g->kids[0]) + ")";
    case GKind::And:
    case GKind::Or:
    case GKind::Iff: {
      std::string s = g->kind == GKind::And ? "(and"
                      : g->kind == GKind::Or ? "(or"
                                             : "(=";
      for (const auto& k : g->kids) s += " " + ground_to_string(inst, k);
      return s + ")";
    }
  }
  return "?";
}

std::string clause_to_string(const FiniteInstance& inst, const GroundClause& c) {
  std::string s = "(or";
  for (const auto& l : c.lits)
    s += l.positive ? " " + inst.lit_name(l) : " (not " + inst.lit_name(l) + ")";
  return s + ")";
}

std::string cube_to_string(const FiniteInstance& inst, const GroundCube& c) {
  std::string s = "(and";
  for (const auto& l : c.lits)
    s += l.positive ? " " + inst.lit_name(l) : " (not " + inst.lit_name(l) + ")";
  return s + ")";
}

}  // namespace symquant
