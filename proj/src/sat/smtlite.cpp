// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/sat/smtlite.hpp"

#include <sstream>
#include <stdexcept>

namespace symquant::smtlite {

namespace {

struct CommandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const Sexpr& sx, const std::string& msg) {
  std::ostringstream os;
  os << "line " << sx.line << ": " << msg;
  throw CommandError(os.str());
}

const std::string& sym(const Sexpr& sx) {
  if (!sx.atom || sx.text.empty() || sx.text[0] == '"')
    fail(sx, "expected a symbol");
  return sx.text;
}

std::string unquote(const Sexpr& sx) {
  if (sx.atom && sx.text.size() >= 2 && sx.text.front() == '"')
    return sx.text.substr(1, sx.text.size() - 2);
  return sx.atom ? sx.text : sx.to_string();
}

}  // namespace

void Session::reply_success() {
  if (print_success_) out_ << "success" << std::endl;
}

void Session::error(const std::string& msg) {
  out_ << "(error \"" << msg << "\")" << std::endl;
}

sat::Lit Session::fresh_gate() { return sat::mk_lit(solver_.new_var()); }

void Session::bind(const std::string& name, sat::Lit lit, bool declared) {
  if (symbols_.count(name)) throw CommandError("duplicate symbol " + name);
  symbols_[name] = lit;
  bindings_.push_back({name, declared});
}

sat::Lit Session::lookup(const std::string& name, const Sexpr& at) {
  auto it = symbols_.find(name);
  if (it == symbols_.end()) fail(at, "unknown symbol " + name);
  return it->second;
}

// Tseitin translation; every connective gate is defined by a full
// biconditional so the encoding stays correct under both polarities.
sat::Lit Session::translate(const Sexpr& sx) {
  if (sx.atom) {
    if (sx.text == "true") {
      sat::Lit t = fresh_gate();
      solver_.add_clause({t});
      return t;
    }
    if (sx.text == "false") {
      sat::Lit f = fresh_gate();
      solver_.add_clause({~f});
      return f;
    }
    return lookup(sym(sx), sx);
  }
  if (sx.kids.empty()) fail(sx, "empty application");
  const std::string& op = sym(sx.kids[0]);
  std::vector<sat::Lit> args;
  for (size_t i = 1; i < sx.kids.size(); i++)
    args.push_back(translate(sx.kids[i]));

  if (op == "not") {
    if (args.size() != 1) fail(sx, "not takes one argument");
    return ~args[0];
  }
  if (op == "and" || op == "or") {
    bool conj = op == "and";
    if (args.empty()) {
      sat::Lit g = fresh_gate();
      solver_.add_clause({conj ? g : ~g});
      return g;
    }
    if (args.size() == 1) return args[0];
    sat::Lit g = fresh_gate();
    std::vector<sat::Lit> big{conj ? g : ~g};
    for (sat::Lit a : args) {
      solver_.add_clause(conj ? std::vector<sat::Lit>{~g, a}
                              : std::vector<sat::Lit>{g, ~a});
      big.push_back(conj ? ~a : a);
    }
    solver_.add_clause(big);
    return g;
  }
  if (op == "=>") {
    if (args.size() < 2) fail(sx, "=> takes at least two arguments");
    // Right associative: a => b => c is a => (b => c).
    sat::Lit g = args.back();
    for (size_t i = args.size() - 1; i-- > 0;) {
      sat::Lit h = fresh_gate();
      solver_.add_clause({~h, ~args[i], g});
      solver_.add_clause({h, args[i]});
      solver_.add_clause({h, ~g});
      g = h;
    }
    return g;
  }
  if (op == "=" || op == "xor") {
    if (args.size() != 2) fail(sx, op + " takes two arguments here");
    sat::Lit a = args[0], b = op == "xor" ? ~args[1] : args[1];
    sat::Lit g = fresh_gate();
    solver_.add_clause({~g, ~a, b});
    solver_.add_clause({~g, a, ~b});
    solver_.add_clause({g, a, b});
    solver_.add_clause({g, ~a, ~b});
    return g;
  }
  if (op == "ite") {
    if (args.size() != 3) fail(sx, "ite takes three arguments");
    sat::Lit c = args[0], t = args[1], e = args[2];
    sat::Lit g = fresh_gate();
    solver_.add_clause({~g, ~c, t});
    solver_.add_clause({~g, c, e});
    solver_.add_clause({g, ~c, ~t});
    solver_.add_clause({g, c, ~e});
    return g;
  }
  fail(sx, "unsupported operator " + op);
}

bool Session::command(const Sexpr& sx) {
  try {
    if (sx.atom || sx.kids.empty() || !sx.kids[0].atom)
      fail(sx, "malformed command");
    const std::string& cmd = sx.kids[0].text;

    if (cmd == "exit") {
      reply_success();
      return false;
    }
    if (cmd == "set-option") {
      if (sx.kids.size() == 3 && sx.kids[1].atom) {
        const std::string& opt = sx.kids[1].text;
        if (opt == ":print-success")
          print_success_ = sx.kids[2].text == "true";
        else if (opt == ":random-seed")
          solver_.set_seed(std::stoull(sx.kids[2].text));
        // Other options (:produce-models, :produce-unsat-cores, ...) are
        // accepted; the corresponding features are always on.
      }
      reply_success();
      return true;
    }
    if (cmd == "set-logic" || cmd == "set-info") {
      reply_success();
      return true;
    }
    if (cmd == "echo") {
      out_ << (sx.kids.size() > 1 ? unquote(sx.kids[1]) : "") << std::endl;
      return true;
    }
    if (cmd == "declare-const") {
      if (sx.kids.size() != 3 || sx.kids[2].text != "Bool")
        fail(sx, "only Bool constants are supported");
      bind(sym(sx.kids[1]), fresh_gate(), true);
      reply_success();
      return true;
    }
    if (cmd == "declare-fun") {
      if (sx.kids.size() != 4 || !sx.kids[2].kids.empty() ||
          sx.kids[3].text != "Bool")
        fail(sx, "only nullary Bool functions are supported");
      bind(sym(sx.kids[1]), fresh_gate(), true);
      reply_success();
      return true;
    }
    if (cmd == "define-fun") {
      if (sx.kids.size() != 5 || !sx.kids[2].kids.empty() ||
          sx.kids[3].text != "Bool")
        fail(sx, "only nullary Bool definitions are supported");
      // The gate clauses are definitional, so they can outlive any scope.
      bind(sym(sx.kids[1]), translate(sx.kids[4]), false);
      reply_success();
      return true;
    }
    if (cmd == "assert") {
      if (sx.kids.size() != 2) fail(sx, "assert takes one formula");
      sat::Lit body = translate(sx.kids[1]);
      if (scopes_.empty())
        solver_.add_clause({body});
      else
        solver_.add_clause({~scopes_.back().guard, body});
      reply_success();
      return true;
    }
    if (cmd == "push" || cmd == "pop") {
      uint64_t n = 1;
      if (sx.kids.size() > 1) n = std::stoull(sx.kids[1].text);
      for (uint64_t i = 0; i < n; i++) {
        if (cmd == "push") {
          sat::Lit g = fresh_gate();
          if (!scopes_.empty()) {
            // Nested scope: the new guard implies the enclosing one, so a
            // single assumption per level activates the whole chain.
            solver_.add_clause({~g, scopes_.back().guard});
          }
          scopes_.push_back({g, bindings_.size()});
        } else {
          if (scopes_.empty()) fail(sx, "pop without matching push");
          solver_.add_clause({~scopes_.back().guard});
          for (size_t b = bindings_.size();
               b-- > scopes_.back().bindings_mark;)
            symbols_.erase(bindings_[b].name);
          bindings_.resize(scopes_.back().bindings_mark);
          scopes_.pop_back();
        }
      }
      last_status_ = 0;
      reply_success();
      return true;
    }
    if (cmd == "check-sat" || cmd == "check-sat-assuming") {
      std::vector<sat::Lit> assume;
      if (!scopes_.empty()) assume.push_back(scopes_.back().guard);
      last_assumed_.clear();
      if (cmd == "check-sat-assuming") {
        if (sx.kids.size() != 2 || sx.kids[1].atom)
          fail(sx, "check-sat-assuming takes a literal list");
        for (const Sexpr& a : sx.kids[1].kids) {
          sat::Lit l;
          if (a.atom) {
            l = lookup(sym(a), a);
          } else if (a.kids.size() == 2 && a.kids[0].text == "not") {
            l = ~lookup(sym(a.kids[1]), a);
          } else {
            fail(a, "assumption must be a literal");
          }
          assume.push_back(l);
          last_assumed_.emplace_back(l, a.to_string());
        }
      }
      bool sat = solver_.solve(assume);
      last_status_ = sat ? 1 : -1;
      out_ << (sat ? "sat" : "unsat") << std::endl;
      return true;
    }
    if (cmd == "get-model") {
      if (last_status_ != 1) fail(sx, "model is not available");
      out_ << "(\n";
      for (const auto& b : bindings_) {
        if (!b.declared) continue;
        sat::Lit l = symbols_.at(b.name);
        bool v = (solver_.model_value(sat::lit_var(l)) == sat::kTrue) !=
                 sat::lit_neg(l);
        out_ << "  (define-fun " << b.name << " () Bool "
             << (v ? "true" : "false") << ")\n";
      }
      out_ << ")" << std::endl;
      return true;
    }
    if (cmd == "get-unsat-core") {
      if (last_status_ != -1) fail(sx, "core is not available");
      out_ << "(";
      bool first = true;
      for (sat::Lit f : solver_.failed_assumptions()) {
        for (const auto& [l, text] : last_assumed_) {
          if (l == f) {
            out_ << (first ? "" : " ") << text;
            first = false;
            break;
          }
        }
      }
      out_ << ")" << std::endl;
      return true;
    }
    fail(sx, "unknown command " + cmd);
  } catch (const CommandError& e) {
    error(e.what());
    return true;
  } catch (const std::exception& e) {
    error(e.what());
    return true;
  }
}

int Session::run(std::istream& in) {
  // Commands execute as soon as their closing paren arrives, so the session
  // works over a pipe where the peer waits for each response.
  std::string buf;
  int depth = 0;
  bool in_str = false, in_comment = false;
  char c;
  while (in.get(c)) {
    if (in_comment) {
      if (c == '\n') in_comment = false;
      continue;
    }
    if (in_str) {
      buf.push_back(c);
      if (c == '"') in_str = false;
      continue;
    }
    if (c == ';') {
      in_comment = true;
      continue;
    }
    buf.push_back(c);
    if (c == '"') {
      in_str = true;
    } else if (c == '(') {
      depth++;
    } else if (c == ')') {
      if (--depth <= 0) {
        try {
          for (const Sexpr& s : parse_sexprs(buf))
            if (!command(s)) return 0;
        } catch (const SexprError& e) {
          error(e.what());
        }
        buf.clear();
        depth = 0;
      }
    }
  }
  return 0;
}

}  // namespace symquant::smtlite
