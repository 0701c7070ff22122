// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/solver.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <sstream>

#include "symquant/sexpr.hpp"
#include "symquant/spec.hpp"

namespace symquant {

std::string smt_name(const FiniteInstance& inst, VarId v, Phase ph) {
  const auto& info = inst.var_info(v);
  return smt_aux_name(inst, info.rel, info.args, ph);
}

std::string smt_aux_name(const FiniteInstance& inst, int rel,
                         const std::vector<uint32_t>& args, Phase ph) {
  const ProtocolSpec& spec = *inst.spec;
  std::string name = spec.relations[rel].name;
  for (size_t i = 0; i < args.size(); i++) {
    name += "__";
    name += inst.const_name(spec.relations[rel].arg_sorts[i], args[i]);
  }
  if (ph == Phase::Next) name += "__p";
  return name;
}

std::string lit_text(const FiniteInstance& inst, const GroundLit& lit,
                     Phase ph) {
  std::string base = smt_aux_name(inst, lit.rel, lit.args, ph);
  return lit.positive ? base : "(not " + base + ")";
}

std::string clause_text(const FiniteInstance& inst, const GroundClause& c,
                        Phase ph) {
  if (c.lits.empty()) return "false";
  if (c.lits.size() == 1) return lit_text(inst, c.lits[0], ph);
  std::string s = "(or";
  for (const auto& l : c.lits) s += " " + lit_text(inst, l, ph);
  return s + ")";
}

std::string cube_text(const FiniteInstance& inst, const GroundCube& c,
                      Phase ph) {
  if (c.lits.empty()) return "true";
  if (c.lits.size() == 1) return lit_text(inst, c.lits[0], ph);
  std::string s = "(and";
  for (const auto& l : c.lits) s += " " + lit_text(inst, l, ph);
  return s + ")";
}

namespace {

void render_rec(const FiniteInstance& inst, const GRef& g, std::string& out) {
  switch (g->kind) {
    case GKind::True: out += "true"; return;
    case GKind::False: out += "false"; return;
    case GKind::Var: out += smt_name(inst, g->var, g->phase); return;
    case GKind::Aux:
      out += smt_aux_name(inst, g->rel, g->args, g->phase);
      return;
    case GKind::Not:
      out += "(not ";
      render_rec(inst, g->kids[0], out);
      out += ')';
      return;
    case GKind::And:
    case GKind::Or:
      out += g->kind == GKind::And ? "(and" : "(or";
      for (const auto& k : g->kids) {
        out += ' ';
        render_rec(inst, k, out);
      }
      out += ')';
      return;
    case GKind::Iff:
      out += "(= ";
      render_rec(inst, g->kids[0], out);
      out += ' ';
      render_rec(inst, g->kids[1], out);
      out += ')';
      return;
  }
}

}  // namespace

std::string render_smt(const FiniteInstance& inst, const GRef& g) {
  std::string out;
  render_rec(inst, g, out);
  return out;
}

SmtProcess::SmtProcess(const std::string& cmdline,
                       const std::string& log_path) {
  signal(SIGPIPE, SIG_IGN);

  std::vector<std::string> parts;
  std::istringstream is(cmdline);
  for (std::string w; is >> w;) parts.push_back(w);
  if (parts.empty()) throw SolverError("empty solver command");

  if (!log_path.empty()) {
    log_.open(log_path);
    if (!log_.good())
      throw SolverError("cannot open SMT log file " + log_path);
  }

  int to_child[2], from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    throw SolverError("pipe failed");
  pid_ = fork();
  if (pid_ < 0) throw SolverError("fork failed");
  if (pid_ == 0) {
    dup2(to_child[0], 0);
    dup2(from_child[1], 1);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    std::vector<char*> argv;
    for (auto& p : parts) argv.push_back(p.data());
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    // exec failed; report on the pipe that used to be stdout.
    std::string msg = "(error \"exec failed: ";
    msg += parts[0];
    msg += "\")\n";
    ssize_t ignored = write(1, msg.data(), msg.size());
    (void)ignored;
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  to_ = fdopen(to_child[1], "w");
  from_ = fdopen(from_child[0], "r");
  if (!to_ || !from_) throw SolverError("fdopen failed");
}

SmtProcess::~SmtProcess() {
  if (to_) {
    fputs("(exit)\n", to_);
    fflush(to_);
    fclose(to_);
  }
  if (from_) fclose(from_);
  if (pid_ > 0) {
    int status;
    waitpid(pid_, &status, 0);
  }
}

void SmtProcess::send(const std::string& text) {
  if (log_.is_open()) log_ << text << "\n";
  if (fputs(text.c_str(), to_) == EOF || fputc('\n', to_) == EOF ||
      fflush(to_) != 0)
    throw SolverError("solver process is gone (write failed)");
}

void SmtProcess::log_note(const std::string& note) {
  if (log_.is_open()) log_ << "; " << note << "\n";
}

std::string SmtProcess::read_line() {
  std::string line;
  int c;
  while ((c = fgetc(from_)) != EOF) {
    if (c == '\n') return line;
    line.push_back(static_cast<char>(c));
  }
  if (line.empty()) throw SolverError("solver process is gone (eof)");
  return line;
}

std::string SmtProcess::read_balanced() {
  std::string text;
  int depth = 0;
  bool seen_paren = false, in_str = false;
  int c;
  while ((c = fgetc(from_)) != EOF) {
    char ch = static_cast<char>(c);
    if (!seen_paren && std::isspace(static_cast<unsigned char>(ch))) continue;
    if (!seen_paren && ch != '(') {
      // Atom response; consume the rest of the line.
      text.push_back(ch);
      while ((c = fgetc(from_)) != EOF && c != '\n')
        text.push_back(static_cast<char>(c));
      return text;
    }
    text.push_back(ch);
    if (in_str) {
      if (ch == '"') in_str = false;
      continue;
    }
    if (ch == '"') {
      in_str = true;
    } else if (ch == '(') {
      seen_paren = true;
      depth++;
    } else if (ch == ')') {
      if (--depth == 0) return text;
    }
  }
  throw SolverError("solver process is gone (eof mid-response)");
}

SolverClient::SolverClient(std::shared_ptr<const FiniteInstance> inst,
                           const Config& config)
    : inst_(std::move(inst)), proc_(config.cmd, config.log_path) {
  const FiniteInstance& in = *inst_;
  const ProtocolSpec& spec = *in.spec;

  proc_.send("(set-option :print-success true)");
  expect_success();
  command("(set-option :produce-models true)");
  command("(set-option :produce-unsat-cores true)");
  command("(set-option :random-seed " + std::to_string(config.seed) + ")");
  command("(set-logic QF_UF)");

  for (Phase ph : {Phase::Curr, Phase::Next})
    for (VarId v = 0; v < in.num_state_vars; v++)
      command("(declare-const " + smt_name(in, v, ph) + " Bool)");

  // Definitions in dependency order so a body may reference another one.
  std::vector<int> order;
  std::vector<int> mark(spec.definitions.size(), 0);
  auto visit = [&](auto&& self, int d) -> void {
    if (mark[d]) return;
    mark[d] = 1;
    std::vector<const Formula*> stack{&spec.definitions[d].body};
    std::vector<int> deps;
    while (!stack.empty()) {
      const Formula* f = stack.back();
      stack.pop_back();
      if (f->kind == FKind::Apply && in.is_definition(f->rel))
        deps.push_back(spec.definition_index(f->rel));
      for (const auto& k : f->kids) stack.push_back(&k);
    }
    for (int dep : deps) self(self, dep);
    order.push_back(d);
  };
  for (size_t d = 0; d < spec.definitions.size(); d++)
    visit(visit, static_cast<int>(d));

  for (int d : order) {
    int rel = spec.definitions[d].rel;
    for (const AuxApp& app : in.aux_apps) {
      if (app.rel != rel) continue;
      for (Phase ph : {Phase::Curr, Phase::Next}) {
        GRef body = in.definition_body(app.rel, app.args, ph);
        command("(define-fun " + smt_aux_name(in, app.rel, app.args, ph) +
                " () Bool " + render_smt(in, body) + ")");
      }
    }
  }

  init_sel_ = add_selector(render_smt(in, in.init));
  trans_sel_ = add_selector(render_smt(in, in.trans_all));
  safety_sel_ = add_selector(render_smt(in, in.safety));
  safety_next_sel_ =
      add_selector(render_smt(in, ground_formula(in, *spec.safety,
                                                 Phase::Next)));
}

void SolverClient::expect_success() {
  std::string line = proc_.read_line();
  while (line.empty()) line = proc_.read_line();
  if (line != "success")
    throw SolverError("solver said: " + line);
}

void SolverClient::command(const std::string& text) {
  proc_.send(text);
  expect_success();
}

std::string SolverClient::add_selector(const std::string& formula_text) {
  std::string name = "sel__" + std::to_string(next_sel_++);
  command("(declare-const " + name + " Bool)");
  command("(assert (=> " + name + " " + formula_text + "))");
  return name;
}

void SolverClient::comment(const std::string& text) { proc_.log_note(text); }

QueryResult SolverClient::check(const std::vector<std::string>& assumptions,
                                const std::vector<std::string>& asserts,
                                bool want_model, bool want_core) {
  command("(push 1)");
  for (const auto& a : asserts) command("(assert " + a + ")");
  std::string q = "(check-sat-assuming (";
  for (size_t i = 0; i < assumptions.size(); i++) {
    if (i) q += ' ';
    q += assumptions[i];
  }
  q += "))";
  proc_.send(q);
  checks_++;
  std::string answer = proc_.read_line();
  while (answer.empty()) answer = proc_.read_line();
  QueryResult result;
  if (answer == "sat") {
    result.sat = true;
  } else if (answer == "unsat") {
    result.sat = false;
  } else {
    throw SolverError("solver said: " + answer);
  }

  if (result.sat && want_model) {
    proc_.send("(get-model)");
    std::string text = proc_.read_balanced();
    if (text.rfind("(error", 0) == 0) throw SolverError(text);
    std::vector<Sexpr> parsed = parse_sexprs(text);
    if (parsed.size() != 1) throw SolverError("unparsable model: " + text);
    for (const Sexpr& entry : parsed[0].kids) {
      if (entry.atom) continue;  // tolerate a leading `model` keyword
      if (entry.kids.size() == 5 && entry.kids[0].text == "define-fun")
        result.model[entry.kids[1].text] = entry.kids[4].text == "true";
    }
    const FiniteInstance& in = *inst_;
    result.state.assign(in.num_state_vars, 0);
    result.next_state.assign(in.num_state_vars, 0);
    for (VarId v = 0; v < in.num_state_vars; v++) {
      auto it = result.model.find(smt_name(in, v, Phase::Curr));
      if (it != result.model.end() && it->second) result.state[v] = 1;
      it = result.model.find(smt_name(in, v, Phase::Next));
      if (it != result.model.end() && it->second) result.next_state[v] = 1;
    }
  }
  if (!result.sat && want_core) {
    proc_.send("(get-unsat-core)");
    std::string text = proc_.read_balanced();
    if (text.rfind("(error", 0) == 0) throw SolverError(text);
    std::vector<Sexpr> parsed = parse_sexprs(text);
    if (parsed.size() != 1) throw SolverError("unparsable core: " + text);
    for (const Sexpr& entry : parsed[0].kids)
      result.core.push_back(entry.to_string());
  }
  command("(pop 1)");
  return result;
}

}  // namespace symquant
