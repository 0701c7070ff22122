// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Protocol specification language: sorted relational vocabulary, first-order
// formulas with forall/exists over sorts, guarded-action transition systems,
// and named definitions that stay available as derived predicates downstream.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "symquant/sexpr.hpp"

namespace symquant {

struct ParseError : std::runtime_error {
  int line = 0, col = 0;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

enum class SortKind : uint8_t { Independent, DependentMajority };

struct SortDecl {
  std::string name;
  SortKind kind = SortKind::Independent;
  int base = -1;  // base sort index for dependent sorts
};

enum class RelRole : uint8_t { State, Definition };

struct RelationDecl {
  std::string name;
  std::vector<int> arg_sorts;
  RelRole role = RelRole::State;
};

enum class FKind : uint8_t {
  And,       // n-ary; empty = true
  Or,        // n-ary; empty = false
  Not,
  Implies,
  Iff,       // written (= f g) on Boolean operands
  Eq,        // two sort terms
  Distinct,  // n-ary sort terms
  Forall,
  Exists,
  Apply,     // relation or definition application
  Member,    // (member element dependent-constant)
};

// A formula over variables only; constants enter the picture at grounding.
// terms holds variable names for Eq/Distinct/Member and Apply arguments.
struct Formula {
  FKind kind = FKind::And;
  std::vector<Formula> kids;
  std::vector<std::string> terms;
  int rel = -1;        // Apply
  bool primed = false; // Apply of a next-state relation
  std::vector<std::pair<std::string, int>> binders;  // Forall/Exists (var, sort)

  static Formula truth() { return Formula{}; }
};

struct Definition {
  int rel = -1;  // relation index with role Definition
  std::vector<std::pair<std::string, int>> params;
  Formula body;
};

struct Action {
  std::string name;
  std::vector<std::pair<std::string, int>> params;
  Formula guard;
  std::vector<std::pair<int, Formula>> updates;  // (state relation, formula)
};

struct ProtocolSpec {
  std::vector<SortDecl> sorts;
  std::vector<RelationDecl> relations;
  std::vector<Definition> definitions;
  std::vector<Formula> axioms;
  std::optional<Formula> init;
  std::vector<Action> actions;
  std::optional<Formula> safety;

  int sort_index(const std::string& name) const;
  int relation_index(const std::string& name) const;
  // Definition table index for a relation, -1 for state relations.
  int definition_index(int rel) const;
};

struct Diagnostic {
  std::string message;
};

// Parses the textual spec language. Resolves every sort and relation name and
// rejects arity or sort violations outright; throws ParseError with position.
ProtocolSpec parse_spec(const std::string& text);

// Re-validates the structural invariants of a ProtocolSpec (useful for ASTs
// assembled in code): variable binding, sort-correct applications, primes
// confined to each action's own updated relation, acyclic definitions, rigid
// axioms, at most one update per relation per action, presence of safety.
// Returns human-readable findings; empty means well-formed.
std::vector<Diagnostic> typecheck(const ProtocolSpec& spec);

// Canonical text form; parse_spec(print_spec(s)) reproduces the AST.
std::string print_spec(const ProtocolSpec& spec);
std::string print_formula(const Formula& f, const ProtocolSpec& spec);

// Parses a closed formula (all variables bound by its own quantifiers)
// against the declarations of an existing protocol. Certificates written
// by the verifier read back through this entry point.
Formula parse_formula(const ProtocolSpec& spec, const Sexpr& sx);

}  // namespace symquant
