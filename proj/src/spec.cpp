// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/spec.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "symquant/sexpr.hpp"

namespace symquant {

int ProtocolSpec::sort_index(const std::string& name) const {
  for (size_t i = 0; i < sorts.size(); i++)
    if (sorts[i].name == name) return static_cast<int>(i);
  return -1;
}

int ProtocolSpec::relation_index(const std::string& name) const {
  for (size_t i = 0; i < relations.size(); i++)
    if (relations[i].name == name) return static_cast<int>(i);
  return -1;
}

int ProtocolSpec::definition_index(int rel) const {
  for (size_t i = 0; i < definitions.size(); i++)
    if (definitions[i].rel == rel) return static_cast<int>(i);
  return -1;
}

namespace {

const std::set<std::string> kReserved = {
    "and", "or",     "not",    "=>",     "=",      "distinct",
    "forall", "exists", "member", "sort",   "dependent-sort",
    "relation", "definition", "axiom", "init", "action", "safety", "majority"};

[[noreturn]] void fail(const Sexpr& at, const std::string& msg) {
  throw ParseError(at.line, at.col, msg);
}

using Env = std::vector<std::pair<std::string, int>>;

int lookup(const Env& env, const std::string& name) {
  for (auto it = env.rbegin(); it != env.rend(); ++it)
    if (it->first == name) return it->second;
  return -1;
}

struct Parser {
  ProtocolSpec spec;

  int need_sort(const Sexpr& at, const std::string& name) {
    int s = spec.sort_index(name);
    if (s < 0) fail(at, "unknown sort '" + name + "'");
    return s;
  }

  // Strips one trailing prime if present. Returns (name, primed).
  static std::pair<std::string, bool> split_prime(const std::string& s) {
    if (!s.empty() && s.back() == '\'') return {s.substr(0, s.size() - 1), true};
    return {s, false};
  }

  std::string term(const Sexpr& sx, const Env& env, int expect_sort) {
    if (!sx.atom) fail(sx, "expected a variable");
    int s = lookup(env, sx.text);
    if (s < 0) fail(sx, "unbound variable '" + sx.text + "'");
    if (expect_sort >= 0 && s != expect_sort)
      fail(sx, "variable '" + sx.text + "' has sort '" + spec.sorts[s].name +
                   "', expected '" + spec.sorts[expect_sort].name + "'");
    return sx.text;
  }

  int term_sort(const Sexpr& sx, const Env& env) {
    if (!sx.atom) fail(sx, "expected a variable");
    int s = lookup(env, sx.text);
    if (s < 0) fail(sx, "unbound variable '" + sx.text + "'");
    return s;
  }

  bool looks_like_formula(const Sexpr& sx, const Env& env) {
    if (!sx.atom) return true;
    if (lookup(env, sx.text) >= 0) return false;  // bound variable: a term
    auto [name, primed] = split_prime(sx.text);
    (void)primed;
    return spec.relation_index(name) >= 0;
  }

  Env parse_binders(const Sexpr& sx, Formula& f) {
    if (!sx.is_list() || sx.size() == 0) fail(sx, "expected a binder list");
    Env added;
    for (const auto& b : sx.kids) {
      if (!b.is_list() || b.size() != 2 || !b[0].atom || !b[1].atom)
        fail(b, "binder must be (variable sort)");
      int s = need_sort(b[1], b[1].text);
      f.binders.emplace_back(b[0].text, s);
      added.emplace_back(b[0].text, s);
    }
    return added;
  }

  Formula apply(const Sexpr& head, const std::vector<Sexpr>& args, const Env& env) {
    auto [name, primed] = split_prime(head.text);
    int rel = spec.relation_index(name);
    if (rel < 0) fail(head, "unknown relation or connective '" + head.text + "'");
    const RelationDecl& decl = spec.relations[rel];
    if (args.size() != decl.arg_sorts.size())
      fail(head, "relation '" + name + "' expects " +
                     std::to_string(decl.arg_sorts.size()) + " arguments, got " +
                     std::to_string(args.size()));
    Formula f;
    f.kind = FKind::Apply;
    f.rel = rel;
    f.primed = primed;
    for (size_t i = 0; i < args.size(); i++)
      f.terms.push_back(term(args[i], env, decl.arg_sorts[i]));
    return f;
  }

  Formula formula(const Sexpr& sx, const Env& env) {
    if (sx.atom) return apply(sx, {}, env);  // bare nullary application
    if (sx.size() == 0 || !sx[0].atom) fail(sx, "expected a formula");
    const std::string& head = sx[0].text;
    std::vector<Sexpr> rest(sx.kids.begin() + 1, sx.kids.end());

    auto nary = [&](FKind k) {
      Formula f;
      f.kind = k;
      for (const auto& a : rest) f.kids.push_back(formula(a, env));
      return f;
    };

    if (head == "and") return nary(FKind::And);
    if (head == "or") return nary(FKind::Or);
    if (head == "not") {
      if (rest.size() != 1) fail(sx, "'not' takes one formula");
      return nary(FKind::Not);
    }
    if (head == "=>") {
      if (rest.size() != 2) fail(sx, "'=>' takes two formulas");
      return nary(FKind::Implies);
    }
    if (head == "=") {
      if (rest.size() != 2) fail(sx, "'=' takes two operands");
      bool lf = looks_like_formula(rest[0], env);
      bool rf = looks_like_formula(rest[1], env);
      if (lf != rf) fail(sx, "'=' cannot mix a formula and a sort term");
      if (lf) {
        Formula f;
        f.kind = FKind::Iff;
        f.kids.push_back(formula(rest[0], env));
        f.kids.push_back(formula(rest[1], env));
        return f;
      }
      Formula f;
      f.kind = FKind::Eq;
      int s = term_sort(rest[0], env);
      f.terms.push_back(term(rest[0], env, s));
      f.terms.push_back(term(rest[1], env, s));
      return f;
    }
    if (head == "distinct") {
      if (rest.size() < 2) fail(sx, "'distinct' takes at least two terms");
      Formula f;
      f.kind = FKind::Distinct;
      int s = term_sort(rest[0], env);
      for (const auto& a : rest) f.terms.push_back(term(a, env, s));
      return f;
    }
    if (head == "forall" || head == "exists") {
      if (rest.size() != 2) fail(sx, "quantifier takes a binder list and a body");
      Formula f;
      f.kind = head == "forall" ? FKind::Forall : FKind::Exists;
      Env inner = env;
      for (auto& b : parse_binders(rest[0], f)) inner.push_back(b);
      f.kids.push_back(formula(rest[1], inner));
      return f;
    }
    if (head == "member") {
      if (rest.size() != 2) fail(sx, "'member' takes an element and a set");
      Formula f;
      f.kind = FKind::Member;
      int es = term_sort(rest[0], env);
      int qs = term_sort(rest[1], env);
      if (spec.sorts[qs].kind != SortKind::DependentMajority)
        fail(rest[1], "second argument of 'member' must have a dependent sort");
      if (spec.sorts[qs].base != es)
        fail(rest[0], "'member' element sort must be the base of the set sort");
      f.terms.push_back(term(rest[0], env, es));
      f.terms.push_back(term(rest[1], env, qs));
      return f;
    }
    return apply(sx[0], rest, env);
  }

  Env params_env(const Sexpr& sx, std::vector<std::pair<std::string, int>>& out) {
    Env env;
    if (!sx.is_list()) fail(sx, "expected a parameter list");
    for (const auto& b : sx.kids) {
      if (!b.is_list() || b.size() != 2 || !b[0].atom || !b[1].atom)
        fail(b, "parameter must be (variable sort)");
      int s = need_sort(b[1], b[1].text);
      out.emplace_back(b[0].text, s);
      env.emplace_back(b[0].text, s);
    }
    return env;
  }

  void declare_relation(const Sexpr& at, const std::string& name,
                        std::vector<int> arg_sorts, RelRole role) {
    if (kReserved.count(name) || name.find('\'') != std::string::npos)
      fail(at, "illegal relation name '" + name + "'");
    if (spec.relation_index(name) >= 0)
      fail(at, "duplicate relation '" + name + "'");
    spec.relations.push_back({name, std::move(arg_sorts), role});
  }

  void top(const Sexpr& sx) {
    if (!sx.is_list() || sx.size() == 0 || !sx[0].atom)
      fail(sx, "expected a declaration");
    const std::string& head = sx[0].text;

    if (head == "sort") {
      if (sx.size() != 2 || !sx[1].atom) fail(sx, "usage: (sort name)");
      if (spec.sort_index(sx[1].text) >= 0)
        fail(sx, "duplicate sort '" + sx[1].text + "'");
      spec.sorts.push_back({sx[1].text, SortKind::Independent, -1});
      return;
    }
    if (head == "dependent-sort") {
      if (sx.size() != 3 || !sx[1].atom || !sx[2].head_is("majority") ||
          sx[2].size() != 2 || !sx[2][1].atom)
        fail(sx, "usage: (dependent-sort name (majority base))");
      if (spec.sort_index(sx[1].text) >= 0)
        fail(sx, "duplicate sort '" + sx[1].text + "'");
      int base = need_sort(sx[2][1], sx[2][1].text);
      if (spec.sorts[base].kind != SortKind::Independent)
        fail(sx[2][1], "majority base must be an independent sort");
      spec.sorts.push_back({sx[1].text, SortKind::DependentMajority, base});
      return;
    }
    if (head == "relation") {
      if (sx.size() != 3 || !sx[1].atom || !sx[2].is_list())
        fail(sx, "usage: (relation name (sorts...))");
      std::vector<int> args;
      for (const auto& a : sx[2].kids) {
        if (!a.atom) fail(a, "expected a sort name");
        args.push_back(need_sort(a, a.text));
      }
      declare_relation(sx[1], sx[1].text, std::move(args), RelRole::State);
      return;
    }
    if (head == "definition") {
      if (sx.size() != 3 || !sx[1].is_list() || sx[1].size() < 1 || !sx[1][0].atom)
        fail(sx, "usage: (definition (name (var sort)...) formula)");
      Definition def;
      std::vector<Sexpr> binders(sx[1].kids.begin() + 1, sx[1].kids.end());
      Sexpr plist;
      plist.kids = binders;
      plist.line = sx[1].line;
      plist.col = sx[1].col;
      Env env = params_env(plist, def.params);
      std::vector<int> arg_sorts;
      for (auto& p : def.params) arg_sorts.push_back(p.second);
      declare_relation(sx[1][0], sx[1][0].text, arg_sorts, RelRole::Definition);
      def.rel = spec.relation_index(sx[1][0].text);
      def.body = formula(sx[2], env);
      spec.definitions.push_back(std::move(def));
      return;
    }
    if (head == "axiom") {
      if (sx.size() != 2) fail(sx, "usage: (axiom formula)");
      spec.axioms.push_back(formula(sx[1], {}));
      return;
    }
    if (head == "init") {
      if (sx.size() != 2) fail(sx, "usage: (init formula)");
      if (spec.init) fail(sx, "duplicate init declaration");
      spec.init = formula(sx[1], {});
      return;
    }
    if (head == "safety") {
      if (sx.size() != 2) fail(sx, "usage: (safety formula)");
      if (spec.safety) fail(sx, "duplicate safety declaration");
      spec.safety = formula(sx[1], {});
      return;
    }
    if (head == "action") {
      // 0=action 1=name 2=params 3=:guard 4=guard 5=:update 6=update list
      if (sx.size() != 7 || !sx[1].atom || !sx[2].is_list())
        fail(sx, "usage: (action name ((var sort)...) :guard f :update ((rel f)...))");
      if (!sx[3].atom || sx[3].text != ":guard") fail(sx[3], "expected ':guard'");
      if (!sx[5].atom || sx[5].text != ":update") fail(sx[5], "expected ':update'");
      if (!sx[6].is_list()) fail(sx[6], "expected an update list");
      Action act;
      act.name = sx[1].text;
      for (const auto& a : spec.actions)
        if (a.name == act.name) fail(sx[1], "duplicate action '" + act.name + "'");
      Env env = params_env(sx[2], act.params);
      act.guard = formula(sx[4], env);
      for (const auto& u : sx[6].kids) {
        if (!u.is_list() || u.size() != 2 || !u[0].atom)
          fail(u, "update must be (relation formula)");
        int rel = spec.relation_index(u[0].text);
        if (rel < 0) fail(u[0], "unknown relation '" + u[0].text + "'");
        act.updates.emplace_back(rel, formula(u[1], env));
      }
      spec.actions.push_back(std::move(act));
      return;
    }
    fail(sx, "unknown declaration '" + head + "'");
  }
};

}  // namespace

ProtocolSpec parse_spec(const std::string& text) {
  std::vector<Sexpr> forms;
  try {
    forms = parse_sexprs(text);
  } catch (const SexprError& e) {
    throw ParseError(e.line, e.col, e.what());
  }
  Parser p;
  for (const auto& sx : forms) p.top(sx);
  return std::move(p.spec);
}

namespace {

struct Checker {
  const ProtocolSpec& spec;
  std::vector<Diagnostic>& out;

  void report(const std::string& msg) { out.push_back({msg}); }

  bool sort_ok(int s) const {
    return s >= 0 && s < static_cast<int>(spec.sorts.size());
  }

  // where: human-readable location tag. update_rel >= 0 inside that
  // relation's update formula, where primes of it are legal.
  void walk(const Formula& f, Env env, const std::string& where,
            int update_rel, bool rigid_only) {
    switch (f.kind) {
      case FKind::And:
      case FKind::Or:
        for (const auto& k : f.kids) walk(k, env, where, update_rel, rigid_only);
        return;
      case FKind::Not:
      case FKind::Implies:
      case FKind::Iff: {
        size_t want = f.kind == FKind::Not ? 1 : 2;
        if (f.kids.size() != want)
          report(where + ": connective arity mismatch");
        for (const auto& k : f.kids) walk(k, env, where, update_rel, rigid_only);
        return;
      }
      case FKind::Eq:
      case FKind::Distinct: {
        if (f.terms.size() < 2) report(where + ": '=' needs two terms");
        int s0 = -2;
        for (const auto& t : f.terms) {
          int s = lookup(env, t);
          if (s < 0) {
            report(where + ": unbound variable '" + t + "'");
            continue;
          }
          if (s0 == -2) s0 = s;
          if (s != s0) report(where + ": mixed sorts in equality/distinct");
        }
        return;
      }
      case FKind::Member: {
        if (f.terms.size() != 2) {
          report(where + ": member arity");
          return;
        }
        int es = lookup(env, f.terms[0]);
        int qs = lookup(env, f.terms[1]);
        if (es < 0 || qs < 0) {
          report(where + ": unbound variable in member");
          return;
        }
        if (!sort_ok(qs) || spec.sorts[qs].kind != SortKind::DependentMajority ||
            spec.sorts[qs].base != es)
          report(where + ": member must relate a base element to a dependent set");
        return;
      }
      case FKind::Forall:
      case FKind::Exists: {
        for (const auto& [v, s] : f.binders) {
          if (!sort_ok(s)) report(where + ": binder with invalid sort");
          env.emplace_back(v, s);
        }
        if (f.kids.size() != 1) {
          report(where + ": quantifier needs one body");
          return;
        }
        walk(f.kids[0], env, where, update_rel, rigid_only);
        return;
      }
      case FKind::Apply: {
        if (f.rel < 0 || f.rel >= static_cast<int>(spec.relations.size())) {
          report(where + ": application of unknown relation");
          return;
        }
        const RelationDecl& decl = spec.relations[f.rel];
        if (rigid_only)
          report(where + ": axioms must be rigid, found application of '" +
                 decl.name + "'");
        if (f.primed) {
          if (decl.role == RelRole::Definition)
            report(where + ": definition '" + decl.name + "' cannot be primed");
          else if (update_rel != f.rel)
            report(where + ": primed '" + decl.name +
                   "' outside its own update formula");
        }
        if (f.terms.size() != decl.arg_sorts.size()) {
          report(where + ": arity mismatch for '" + decl.name + "'");
          return;
        }
        for (size_t i = 0; i < f.terms.size(); i++) {
          int s = lookup(env, f.terms[i]);
          if (s < 0)
            report(where + ": unbound variable '" + f.terms[i] + "'");
          else if (s != decl.arg_sorts[i])
            report(where + ": argument " + std::to_string(i + 1) + " of '" +
                   decl.name + "' has the wrong sort");
        }
        return;
      }
    }
  }
};

// Depth-first cycle check over definition-to-definition references.
bool defs_acyclic(const ProtocolSpec& spec, std::vector<Diagnostic>& out) {
  size_t n = spec.definitions.size();
  std::vector<int> state(n, 0);  // 0 new, 1 open, 2 done
  std::vector<std::vector<size_t>> edges(n);
  for (size_t i = 0; i < n; i++) {
    std::vector<const Formula*> stack = {&spec.definitions[i].body};
    while (!stack.empty()) {
      const Formula* f = stack.back();
      stack.pop_back();
      if (f->kind == FKind::Apply) {
        int d = spec.definition_index(f->rel);
        if (d >= 0) edges[i].push_back(static_cast<size_t>(d));
      }
      for (const auto& k : f->kids) stack.push_back(&k);
    }
  }
  bool ok = true;
  auto dfs = [&](auto&& self, size_t v) -> bool {
    if (state[v] == 1) return false;
    if (state[v] == 2) return true;
    state[v] = 1;
    for (size_t w : edges[v])
      if (!self(self, w)) return false;
    state[v] = 2;
    return true;
  };
  for (size_t i = 0; i < n; i++) {
    if (!dfs(dfs, i)) {
      out.push_back({"definition '" +
                     spec.relations[spec.definitions[i].rel].name +
                     "' participates in a cycle"});
      ok = false;
      break;
    }
  }
  return ok;
}

}  // namespace

std::vector<Diagnostic> typecheck(const ProtocolSpec& spec) {
  std::vector<Diagnostic> out;
  Checker ck{spec, out};

  for (const auto& s : spec.sorts)
    if (s.kind == SortKind::DependentMajority &&
        (!ck.sort_ok(s.base) ||
         spec.sorts[s.base].kind != SortKind::Independent))
      out.push_back({"dependent sort '" + s.name + "' has an invalid base"});

  for (const auto& r : spec.relations)
    for (int s : r.arg_sorts)
      if (!ck.sort_ok(s))
        out.push_back({"relation '" + r.name + "' uses an invalid sort"});

  for (const auto& d : spec.definitions) {
    if (d.rel < 0 || d.rel >= static_cast<int>(spec.relations.size()) ||
        spec.relations[d.rel].role != RelRole::Definition) {
      out.push_back({"definition entry does not name a definition relation"});
      continue;
    }
    Env env(d.params.begin(), d.params.end());
    ck.walk(d.body, env, "definition " + spec.relations[d.rel].name, -1, false);
  }
  defs_acyclic(spec, out);

  for (const auto& a : spec.axioms) ck.walk(a, {}, "axiom", -1, true);

  if (!spec.init)
    out.push_back({"no init declared"});
  else
    ck.walk(*spec.init, {}, "init", -1, false);

  if (!spec.safety)
    out.push_back({"no safety property declared"});
  else
    ck.walk(*spec.safety, {}, "safety", -1, false);

  for (const auto& act : spec.actions) {
    Env env(act.params.begin(), act.params.end());
    ck.walk(act.guard, env, "guard of " + act.name, -1, false);
    std::set<int> seen;
    for (const auto& [rel, f] : act.updates) {
      if (rel < 0 || rel >= static_cast<int>(spec.relations.size()) ||
          spec.relations[rel].role != RelRole::State) {
        out.push_back({"action " + act.name + " updates a non-state relation"});
        continue;
      }
      if (!seen.insert(rel).second)
        out.push_back({"action " + act.name + " updates '" +
                       spec.relations[rel].name + "' twice"});
      ck.walk(f, env, "update of " + spec.relations[rel].name + " in " + act.name,
              rel, false);
    }
  }
  return out;
}

namespace {

void print_formula_rec(std::ostream& os, const Formula& f,
                       const ProtocolSpec& spec) {
  auto list = [&](const char* head, const std::vector<Formula>& kids) {
    os << '(' << head;
    for (const auto& k : kids) {
      os << ' ';
      print_formula_rec(os, k, spec);
    }
    os << ')';
  };
  switch (f.kind) {
    case FKind::And: list("and", f.kids); return;
    case FKind::Or: list("or", f.kids); return;
    case FKind::Not: list("not", f.kids); return;
    case FKind::Implies: list("=>", f.kids); return;
    case FKind::Iff: list("=", f.kids); return;
    case FKind::Eq:
    case FKind::Distinct: {
      os << (f.kind == FKind::Eq ? "(=" : "(distinct");
      for (const auto& t : f.terms) os << ' ' << t;
      os << ')';
      return;
    }
    case FKind::Member:
      os << "(member " << f.terms[0] << ' ' << f.terms[1] << ')';
      return;
    case FKind::Forall:
    case FKind::Exists: {
      os << (f.kind == FKind::Forall ? "(forall (" : "(exists (");
      for (size_t i = 0; i < f.binders.size(); i++) {
        if (i) os << ' ';
        os << '(' << f.binders[i].first << ' '
           << spec.sorts[f.binders[i].second].name << ')';
      }
      os << ") ";
      print_formula_rec(os, f.kids[0], spec);
      os << ')';
      return;
    }
    case FKind::Apply: {
      os << '(' << spec.relations[f.rel].name << (f.primed ? "'" : "");
      for (const auto& t : f.terms) os << ' ' << t;
      os << ')';
      return;
    }
  }
}

}  // namespace

Formula parse_formula(const ProtocolSpec& spec, const Sexpr& sx) {
  Parser p{spec};
  return p.formula(sx, {});
}

std::string print_formula(const Formula& f, const ProtocolSpec& spec) {
  std::ostringstream os;
  print_formula_rec(os, f, spec);
  return os.str();
}

std::string print_spec(const ProtocolSpec& spec) {
  std::ostringstream os;
  for (const auto& s : spec.sorts) {
    if (s.kind == SortKind::Independent)
      os << "(sort " << s.name << ")\n";
    else
      os << "(dependent-sort " << s.name << " (majority "
         << spec.sorts[s.base].name << "))\n";
  }
  for (const auto& r : spec.relations) {
    if (r.role != RelRole::State) continue;
    os << "(relation " << r.name << " (";
    for (size_t i = 0; i < r.arg_sorts.size(); i++)
      os << (i ? " " : "") << spec.sorts[r.arg_sorts[i]].name;
    os << "))\n";
  }
  for (const auto& d : spec.definitions) {
    os << "(definition (" << spec.relations[d.rel].name;
    for (const auto& [v, s] : d.params)
      os << " (" << v << ' ' << spec.sorts[s].name << ')';
    os << ") " << print_formula(d.body, spec) << ")\n";
  }
  for (const auto& a : spec.axioms)
    os << "(axiom " << print_formula(a, spec) << ")\n";
  if (spec.init) os << "(init " << print_formula(*spec.init, spec) << ")\n";
  for (const auto& act : spec.actions) {
    os << "(action " << act.name << " (";
    for (size_t i = 0; i < act.params.size(); i++)
      os << (i ? " " : "") << '(' << act.params[i].first << ' '
         << spec.sorts[act.params[i].second].name << ')';
    os << ") :guard " << print_formula(act.guard, spec) << " :update (";
    for (size_t i = 0; i < act.updates.size(); i++)
      os << (i ? " " : "") << '(' << spec.relations[act.updates[i].first].name
         << ' ' << print_formula(act.updates[i].second, spec) << ')';
    os << "))\n";
  }
  if (spec.safety)
    os << "(safety " << print_formula(*spec.safety, spec) << ")\n";
  return os.str();
}

}  // namespace symquant
