// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.
//
// Conflict-driven clause learning SAT solver: two-watched-literal
// propagation, first-UIP learning with recursive clause minimization,
// activity-based decisions with phase saving, and Luby restarts. Supports
// solving under assumptions and reports the failed subset on unsat, which
// is what the SMT front end builds cores from.

#pragma once

#include <cstdint>
#include <vector>

namespace symquant::sat {

using Var = int32_t;

struct Lit {
  int32_t x = -2;
  bool operator==(const Lit&) const = default;
};

inline Lit mk_lit(Var v, bool neg = false) {
  return Lit{(v << 1) | static_cast<int32_t>(neg)};
}
inline Lit operator~(Lit p) { return Lit{p.x ^ 1}; }
inline bool lit_neg(Lit p) { return p.x & 1; }
inline Var lit_var(Lit p) { return p.x >> 1; }

constexpr int8_t kTrue = 1;
constexpr int8_t kFalse = -1;
constexpr int8_t kUndef = 0;

class Solver {
 public:
  Var new_var();
  int num_vars() const { return static_cast<int>(assigns_.size()); }

  // Returns false if the clause makes the formula unsatisfiable outright.
  bool add_clause(std::vector<Lit> lits);

  bool solve(const std::vector<Lit>& assumptions = {});

  // Total assignment after a sat answer; unconstrained variables are false.
  int8_t model_value(Var v) const { return model_[v]; }

  // After an unsat answer: the subset of assumptions that was refuted.
  const std::vector<Lit>& failed_assumptions() const { return conflict_; }

  void set_seed(uint64_t s) { rng_ = s ? s : 0x9e3779b97f4a7c15ull; }
  bool okay() const { return ok_; }
  uint64_t num_conflicts() const { return stat_conflicts_; }

 private:
  struct Clause {
    float act = 0;
    bool learnt = false;
    bool deleted = false;
    std::vector<Lit> lits;
  };
  struct Watch {
    int32_t cref;
    Lit blocker;
  };

  int8_t value(Lit p) const {
    int8_t a = assigns_[lit_var(p)];
    return lit_neg(p) ? static_cast<int8_t>(-a) : a;
  }
  int level(Var v) const { return level_[v]; }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void attach(int32_t cref);
  void enqueue(Lit p, int32_t reason);
  int32_t propagate();
  void analyze(int32_t confl, std::vector<Lit>& out_learnt, int& out_btlevel);
  bool lit_redundant(Lit p, uint32_t abstract_levels);
  void analyze_final(Lit p);
  void cancel_until(int lvl);
  Lit pick_branch();
  void var_bump(Var v);
  void var_decay() { var_inc_ *= (1.0 / 0.95); }
  void cla_bump(Clause& c);
  void reduce_db();
  void rebuild_watches();
  int search_result();  // 1 sat, -1 unsat, 0 restart

  // Order heap over variable activity.
  void heap_insert(Var v);
  Var heap_pop();
  void heap_up(int i);
  void heap_down(int i);
  bool heap_in(Var v) const { return heap_pos_[v] >= 0; }

  uint64_t rand_u64() {
    rng_ ^= rng_ << 13;
    rng_ ^= rng_ >> 7;
    rng_ ^= rng_ << 17;
    return rng_;
  }

  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<int32_t> learnts_;
  std::vector<std::vector<Watch>> watches_;  // indexed by Lit.x
  std::vector<int8_t> assigns_;
  std::vector<int8_t> saved_phase_;
  std::vector<int32_t> level_;
  std::vector<int32_t> reason_;
  std::vector<Lit> trail_;
  std::vector<int32_t> trail_lim_;
  size_t qhead_ = 0;

  std::vector<double> activity_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  std::vector<Var> heap_;
  std::vector<int32_t> heap_pos_;

  std::vector<Lit> assumptions_;
  std::vector<Lit> conflict_;
  std::vector<int8_t> model_;
  std::vector<int8_t> seen_;

  uint64_t rng_ = 0x9e3779b97f4a7c15ull;
  uint64_t stat_conflicts_ = 0;
  uint64_t conflict_budget_ = 0;
  size_t learnt_limit_ = 4000;
};

}  // namespace symquant::sat
