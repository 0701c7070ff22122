// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "symquant/converge.hpp"
#include "symquant/solver.hpp"
#include "symquant/spec.hpp"

namespace symquant {

namespace {

// "node=3,value=2" -> overrides; every name must be an independent sort.
SizeAssignment parse_sizes(const std::string& text, const ProtocolSpec& spec) {
  SizeAssignment sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--size", "expected name=count, got '" +
                                               item + "'");
    std::string name = item.substr(0, eq);
    int idx = spec.sort_index(name);
    if (idx < 0 || spec.sorts[idx].kind != SortKind::Independent)
      throw CLI::ValidationError(
          "--size", "'" + name + "' is not an independent sort");
    unsigned long count = 0;
    try {
      count = std::stoul(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--size", "bad count in '" + item + "'");
    }
    if (count == 0)
      throw CLI::ValidationError("--size", "sizes must be positive");
    sizes[name] = static_cast<uint32_t>(count);
  }
  return sizes;
}

bool write_file(const std::string& path, const std::string& text,
                std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.good()) {
    err << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += " ";
    s += p;
  }
  return s;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Parameterized protocol verifier: proves safety on growing "
               "finite instances and infers a size-independent invariant"};
  app.name("symquant");

  std::string spec_path;
  app.add_option("spec", spec_path, "Protocol specification file")
      ->required()
      ->check(CLI::ExistingFile);

  std::string size_text;
  app.add_option("--size", size_text,
                 "Starting sizes as name=count,... for independent sorts; "
                 "unlisted sorts use built-in defaults");
  uint64_t max_vars = 1000000;
  app.add_option("--max-vars", max_vars,
                 "Abort when an instance needs more ground state variables");
  double timeout = 0;
  app.add_option("--timeout", timeout,
                 "Wall-clock budget in seconds for the whole run");
  std::string solver_cmd;
  app.add_option("--solver-cmd", solver_cmd,
                 "SMT solver command line reading SMT-LIB2 on stdin "
                 "(falls back to SYMQUANT_SOLVER_CMD)");
  uint32_t solver_seed = 1;
  app.add_option("--solver-seed", solver_seed,
                 "Random seed passed to the solver");
  std::string cert_path;
  app.add_option("--cert", cert_path, "Write the certificate here");
  std::string result_path;
  app.add_option("--result", result_path, "Write a JSON result report here");
  std::string emit_unbounded;
  app.add_option("--emit-unbounded", emit_unbounded,
                 "Write the unbounded induction goals (SMT-LIB2) here");
  bool check_unbounded = false;
  app.add_flag("--check-unbounded", check_unbounded,
               "Also run the unbounded goals through the solver");
  bool oracle_check = false;
  app.add_flag("--oracle-check", oracle_check,
               "Re-verify small instances by explicit state enumeration");
  bool antecedent_reduction = false;
  app.add_flag("--enable-antecedent-reduction", antecedent_reduction,
               "Drop redundant inequality antecedents from the invariant");
  bool epr_reduction = false;
  app.add_flag("--enable-epr-reduction", epr_reduction,
               "Rewrite quantifier alternations that leave the decidable "
               "fragment");
  std::string log_dir;
  app.add_option("--log-smt", log_dir,
                 "Directory for per-iteration solver query logs");
#ifdef SYMQUANT_TEST_HOOKS
  std::string mutate;
  app.add_option("--mutate", mutate,
                 "Test hook: drop-guard=Action clears the named guard");
#endif

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  if (solver_cmd.empty()) {
    const char* env = std::getenv("SYMQUANT_SOLVER_CMD");
    if (env != nullptr) solver_cmd = env;
  }
  if (solver_cmd.empty()) {
    err << "error: no solver configured; pass --solver-cmd or set "
           "SYMQUANT_SOLVER_CMD\n";
    return 2;
  }

  std::shared_ptr<ProtocolSpec> spec;
  try {
    std::ifstream in(spec_path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    if (!in.good()) {
      err << "error: cannot read " << spec_path << "\n";
      return 2;
    }
    spec = std::make_shared<ProtocolSpec>(parse_spec(text.str()));
  } catch (const ParseError& e) {
    err << spec_path << ": " << e.what() << "\n";
    return 2;
  }
  std::vector<Diagnostic> findings = typecheck(*spec);
  if (!findings.empty()) {
    for (const auto& d : findings)
      err << spec_path << ": " << d.message << "\n";
    return 2;
  }

#ifdef SYMQUANT_TEST_HOOKS
  if (!mutate.empty()) {
    const std::string kDropGuard = "drop-guard=";
    if (mutate.rfind(kDropGuard, 0) != 0) {
      err << "error: unknown mutation '" << mutate << "'\n";
      return 2;
    }
    std::string target = mutate.substr(kDropGuard.size());
    auto it = std::find_if(spec->actions.begin(), spec->actions.end(),
                           [&](const Action& a) { return a.name == target; });
    if (it == spec->actions.end()) {
      err << "error: no action named '" << target << "'\n";
      return 2;
    }
    it->guard = Formula::truth();
  }
#endif

  SizeAssignment sizes = default_base_sizes(*spec);
  try {
    for (const auto& [name, count] : parse_sizes(size_text, *spec))
      sizes[name] = count;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  ConvergeOptions opts;
  opts.engine.solver.cmd = solver_cmd;
  opts.engine.solver.seed = solver_seed;
  opts.max_vars = max_vars;
  opts.timeout_seconds = timeout;
  opts.emit_unbounded = emit_unbounded;
  opts.check_unbounded = check_unbounded;
  opts.oracle_check = oracle_check;
  opts.antecedent_reduction = antecedent_reduction;
  opts.epr_reduction = epr_reduction;
  if (!log_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(log_dir, ec);
    if (ec) {
      err << "error: cannot create " << log_dir << ": " << ec.message()
          << "\n";
      return 2;
    }
    opts.engine.solver.log_path = log_dir + "/queries";
  }

  ConvergeResult result;
  try {
    result = run_converge(spec, sizes, opts);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }

  out << "spec: " << spec_path << "\n";
  std::string size_line;
  for (const auto& [name, count] : result.sizes) {
    if (!size_line.empty()) size_line += " ";
    size_line += name + "=" + std::to_string(count);
  }
  out << "sizes: " << size_line << "\n";
  out << "verdict: " << to_string(result.outcome) << "\n";
  if (!result.reason.empty()) out << "reason: " << result.reason << "\n";
  if (!result.growth.empty()) out << "growth: " << join(result.growth) << "\n";
  if (result.outcome == Outcome::Safe)
    out << "assertions: " << result.invariant.size() << "\n";
  if (result.outcome == Outcome::Violated)
    out << "trace-length: " << result.trace.size() << "\n";
  out << "iterations: " << result.iterations << "\n";
  out << "smt-checks: " << result.stats.smt_checks << "\n";
  out << "ctis: " << result.stats.ctis << "\n";
  if (result.unbounded != UnboundedStatus::NotRun)
    out << "unbounded: " << to_string(result.unbounded) << "\n";
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.2f", result.wall_seconds);
  out << "wall-seconds: " << wall << "\n";

  bool io_ok = true;
  if (!cert_path.empty()) {
    io_ok &= write_file(cert_path, certificate_text(*spec, result), err);
    if (io_ok) out << "certificate: " << cert_path << "\n";
  }
  if (!result_path.empty()) {
    io_ok &= write_file(result_path, result_json(*spec, result), err);
    if (io_ok) out << "result: " << result_path << "\n";
  }
  if (!io_ok) return 3;

  switch (result.outcome) {
    case Outcome::Safe:
      return 0;
    case Outcome::Violated:
      return 1;
    case Outcome::ResourcesExhausted:
      return 3;
  }
  return 3;
}

}  // namespace symquant
