// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Finite instantiation: fixes a size per independent sort, enumerates
// constants (majority subsets for dependent sorts), assigns one Boolean state
// variable per ground relation tuple, and grounds every spec formula into a
// quantifier-free DAG. Definitions are grounded per tuple but kept as named
// nodes rather than inlined, so later stages can treat them as literals.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "symquant/spec.hpp"

namespace symquant {

struct GroundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using VarId = uint32_t;

enum class Phase : uint8_t { Curr, Next };

struct Constant {
  std::string name;
  std::vector<uint32_t> members;  // sorted base indices; empty for independent
};

// Sizes for independent sorts; dependent sizes are derived.
using SizeAssignment = std::map<std::string, uint32_t>;

enum class GKind : uint8_t { False, True, Var, Aux, Not, And, Or, Iff };

struct GNode;
using GRef = std::shared_ptr<const GNode>;

struct GNode {
  GKind kind = GKind::True;
  VarId var = 0;               // Var
  Phase phase = Phase::Curr;   // Var, Aux
  int rel = -1;                // Aux: definition relation
  std::vector<uint32_t> args;  // Aux: constant indices
  std::vector<GRef> kids;
};

// Constructors fold constants and flatten nested and/or.
GRef g_true();
GRef g_false();
GRef g_bool(bool b);
GRef g_var(VarId v, Phase p);
GRef g_aux(int rel, std::vector<uint32_t> args, Phase p);
GRef g_not(GRef a);
GRef g_and(std::vector<GRef> kids);
GRef g_or(std::vector<GRef> kids);
GRef g_iff(GRef a, GRef b);

// A literal over the instance's state vocabulary: either a state relation
// tuple or a definition applied to constants. Ordered by (rel, args, sign).
struct GroundLit {
  int rel = -1;
  std::vector<uint32_t> args;
  bool positive = true;

  auto operator<=>(const GroundLit&) const = default;
  GroundLit negated() const { return {rel, args, !positive}; }
};

// Clauses and cubes are canonical: sorted, duplicate-free, never containing
// a literal together with its negation.
struct GroundClause {
  std::vector<GroundLit> lits;
  auto operator<=>(const GroundClause&) const = default;
};

struct GroundCube {
  std::vector<GroundLit> lits;
  auto operator<=>(const GroundCube&) const = default;
};

GroundClause make_clause(std::vector<GroundLit> lits);
GroundCube make_cube(std::vector<GroundLit> lits);
GroundClause negate_cube(const GroundCube& c);
GroundCube negate_clause(const GroundClause& c);

struct TransDisjunct {
  int action = -1;
  std::vector<uint32_t> params;  // constant indices per action parameter
  GRef formula;
};

struct AuxApp {
  int rel = -1;
  std::vector<uint32_t> args;
  auto operator<=>(const AuxApp&) const = default;
};

class FiniteInstance {
 public:
  std::shared_ptr<const ProtocolSpec> spec;
  SizeAssignment sizes;                        // independent sorts as given
  std::vector<std::vector<Constant>> consts;   // per sort index
  std::vector<std::map<std::vector<uint32_t>, uint32_t>> member_index;

  uint32_t num_state_vars = 0;
  std::vector<uint32_t> rel_base;  // var id base per state relation, else ~0

  GRef init;
  GRef safety;
  std::vector<TransDisjunct> trans;
  GRef trans_all;

  std::vector<AuxApp> aux_apps;  // definition applications, canonical order

  uint32_t size_of(int sort) const {
    return static_cast<uint32_t>(consts[sort].size());
  }
  VarId state_var(int rel, const std::vector<uint32_t>& args) const;
  struct VarInfo {
    int rel;
    std::vector<uint32_t> args;
  };
  const VarInfo& var_info(VarId v) const { return var_info_[v]; }

  // Ground body of a definition applied to a constant tuple.
  GRef definition_body(int rel, const std::vector<uint32_t>& args, Phase p) const;

  // Variable id for a state literal; definition literals have none.
  bool is_definition(int rel) const {
    return spec->relations[rel].role == RelRole::Definition;
  }

  std::string const_name(int sort, uint32_t idx) const {
    return consts[sort][idx].name;
  }
  std::string lit_name(const GroundLit& l) const;  // without sign

  std::vector<VarInfo> var_info_;
  // Definition bodies per definition table index, tuple-major, curr and next.
  std::vector<std::vector<std::array<GRef, 2>>> def_bodies_;
  std::vector<std::vector<uint32_t>> def_strides_;
  uint32_t def_tuple_index(int def_idx, const std::vector<uint32_t>& args) const;
};

// Builds the finite instance. Throws GroundError when sizes are missing or
// zero, when the state variable count exceeds max_vars, or when an axiom
// does not hold under the constructed tables.
FiniteInstance build_instance(std::shared_ptr<const ProtocolSpec> spec,
                              const SizeAssignment& sizes,
                              uint64_t max_vars = 1000000);

// Free-variable binding for grounding: name -> (sort, constant index).
using GroundBinding = std::map<std::string, std::pair<int, uint32_t>>;

// Grounds a formula. Unprimed applications land in `phase`; primed ones are
// always Next and only legal when phase is Curr.
GRef ground_formula(const FiniteInstance& inst, const Formula& f, Phase phase,
                    const GroundBinding& binding = {});

// One literal per state variable; values must be total or GroundError fires.
GroundCube state_as_cube(const FiniteInstance& inst,
                         const std::vector<int8_t>& model);

// Evaluates a ground formula over packed assignments (bit i = variable i).
// Instances wider than 64 state variables are out of range for this path.
bool eval_ground(const FiniteInstance& inst, const GRef& g, uint64_t curr,
                 uint64_t next = 0);

std::string ground_to_string(const FiniteInstance& inst, const GRef& g);
std::string clause_to_string(const FiniteInstance& inst, const GroundClause& c);
std::string cube_to_string(const FiniteInstance& inst, const GroundCube& c);

}  // namespace symquant
