// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/engine.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <sstream>

namespace symquant {
namespace {

constexpr uint32_t kInfLevel = UINT32_MAX;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string conj(const std::vector<std::string>& parts) {
  if (parts.empty()) return "true";
  if (parts.size() == 1) return parts[0];
  std::string out = "(and";
  for (const std::string& p : parts) {
    out += ' ';
    out += p;
  }
  return out + ")";
}

// Literal order used for cube shrinking: state literals by variable id,
// then definition literals in their canonical order. Keeping the order
// fixed makes the minimization, and with it the learned predicates,
// deterministic.
std::vector<GroundLit> shrink_order(const FiniteInstance& inst,
                                    const GroundCube& cube) {
  std::vector<GroundLit> state, aux;
  for (const GroundLit& l : cube.lits)
    (inst.is_definition(l.rel) ? aux : state).push_back(l);
  std::sort(state.begin(), state.end(),
            [&](const GroundLit& a, const GroundLit& b) {
              return inst.state_var(a.rel, a.args) <
                     inst.state_var(b.rel, b.args);
            });
  state.insert(state.end(), aux.begin(), aux.end());
  return state;
}

GroundCube without(const GroundCube& cube, const GroundLit& drop) {
  GroundCube out;
  for (const GroundLit& l : cube.lits)
    if (!(l == drop)) out.lits.push_back(l);
  return out;
}

}  // namespace

SymIC3::SymIC3(std::shared_ptr<const FiniteInstance> inst, Config config)
    : inst_(inst),
      config_(std::move(config)),
      client_(inst, config_.solver),
      group_(SymmetryGroup::build(*inst, config_.max_group)) {
  safety_curr_ = render_smt(*inst_, inst_->safety);
  safety_next_ = render_smt(
      *inst_, ground_formula(*inst_, *inst_->spec->safety, Phase::Next));

  // Recognize a ground initial condition that is a plain cube, so initial-
  // state membership and disjointness tests need no solver round trips.
  init_cube_.assign(inst_->num_state_vars, -1);
  init_is_cube_ = true;
  std::vector<GRef> todo{inst_->init};
  while (!todo.empty() && init_is_cube_) {
    GRef g = todo.back();
    todo.pop_back();
    switch (g->kind) {
      case GKind::True:
        break;
      case GKind::And:
        for (const GRef& k : g->kids) todo.push_back(k);
        break;
      case GKind::Var:
        init_is_cube_ &= g->phase == Phase::Curr && init_cube_[g->var] != 0;
        if (init_is_cube_) init_cube_[g->var] = 1;
        break;
      case GKind::Not:
        init_is_cube_ &= g->kids[0]->kind == GKind::Var &&
                         g->kids[0]->phase == Phase::Curr &&
                         init_cube_[g->kids[0]->var] != 1;
        if (init_is_cube_) init_cube_[g->kids[0]->var] = 0;
        break;
      default:
        init_is_cube_ = false;
    }
  }
}

QueryResult SymIC3::query(const std::vector<std::string>& assumptions,
                          const std::vector<std::string>& asserts,
                          bool want_model, bool want_core) {
  check_limits();
  QueryResult q = client_.check(assumptions, asserts, want_model, want_core);
  stats_.smt_checks = client_.num_checks();
  return q;
}

void SymIC3::check_limits() {
  if (deadline_ > 0 && now_seconds() > deadline_)
    throw TimeoutError("time limit exceeded");
  if (config_.max_checks > 0 && client_.num_checks() >= config_.max_checks)
    throw EngineError("solver query budget exceeded");
}

std::vector<std::string> SymIC3::frame_assumptions(uint32_t level) const {
  if (level == 0) return {client_.init_sel()};
  std::vector<std::string> out{client_.safety_sel()};
  for (const Learned& p : preds_)
    if (!p.dropped && p.level >= level) out.push_back(p.sel);
  return out;
}

GroundCube SymIC3::extended_cube(const std::vector<int8_t>& state) const {
  std::vector<GroundLit> lits;
  for (VarId v = 0; v < inst_->num_state_vars; ++v) {
    const auto& info = inst_->var_info(v);
    lits.push_back({info.rel, info.args, state[v] != 0});
  }
  // Definition literals sharpen generalization; they are evaluated on the
  // packed state, which the 64-bit evaluator limits to 63 variables. Wider
  // instances fall back to plain state cubes.
  if (inst_->num_state_vars <= 63) {
    uint64_t packed = 0;
    for (VarId v = 0; v < inst_->num_state_vars; ++v)
      if (state[v]) packed |= 1ull << v;
    for (const AuxApp& app : inst_->aux_apps) {
      bool value = eval_ground(
          *inst_, inst_->definition_body(app.rel, app.args, Phase::Curr),
          packed);
      lits.push_back({app.rel, app.args, value});
    }
  }
  return make_cube(std::move(lits));
}

bool SymIC3::cube_intersects_init(const GroundCube& cube) {
  if (init_is_cube_) {
    // Two cubes intersect exactly when no literal contradicts the other.
    for (const GroundLit& l : cube.lits) {
      if (inst_->is_definition(l.rel)) continue;  // handled by state bits
      int8_t want = init_cube_[inst_->state_var(l.rel, l.args)];
      if (want >= 0 && want != (l.positive ? 1 : 0)) return false;
    }
    // Definition literals can still rule the intersection out, but only
    // when the init cube pins every variable they read; re-check the
    // candidate states only in the fully pinned case.
    bool total = std::find(init_cube_.begin(), init_cube_.end(), -1) ==
                 init_cube_.end();
    if (!total || inst_->num_state_vars > 63) return true;
    uint64_t packed = 0;
    for (VarId v = 0; v < inst_->num_state_vars; ++v)
      if (init_cube_[v] == 1) packed |= 1ull << v;
    for (const GroundLit& l : cube.lits) {
      if (!inst_->is_definition(l.rel)) continue;
      bool value = eval_ground(
          *inst_, inst_->definition_body(l.rel, l.args, Phase::Curr), packed);
      if (value != l.positive) return false;
    }
    return true;
  }
  QueryResult q = query({client_.init_sel()},
                        {cube_text(*inst_, cube, Phase::Curr)}, false, false);
  return q.sat;
}

bool SymIC3::state_in_init(const std::vector<int8_t>& state) {
  if (init_is_cube_) {
    for (VarId v = 0; v < inst_->num_state_vars; ++v) {
      if (init_cube_[v] >= 0 && init_cube_[v] != (state[v] ? 1 : 0))
        return false;
    }
    return true;
  }
  GroundCube cube;
  for (VarId v = 0; v < inst_->num_state_vars; ++v) {
    const auto& info = inst_->var_info(v);
    cube.lits.push_back({info.rel, info.args, state[v] != 0});
  }
  QueryResult q = query({client_.init_sel()},
                        {cube_text(*inst_, cube, Phase::Curr)}, false, false);
  return q.sat;
}

bool SymIC3::block(const GroundCube& cube, const std::vector<int8_t>& state,
                   uint32_t level) {
  path_.push_back(state);
  std::vector<std::string> cube_lits;
  std::map<std::string, GroundLit> by_text;
  for (const GroundLit& l : cube.lits) {
    std::string text = lit_text(*inst_, l, Phase::Next);
    cube_lits.push_back(text);
    by_text.emplace(std::move(text), l);
  }
  std::string not_cube = "(not " + cube_text(*inst_, cube, Phase::Curr) + ")";

  for (;;) {
    std::vector<std::string> assumptions = frame_assumptions(level - 1);
    assumptions.push_back(client_.trans_sel());
    assumptions.insert(assumptions.end(), cube_lits.begin(), cube_lits.end());
    QueryResult q = query(assumptions, {not_cube}, true, true);
    if (!q.sat) {
      // The failed-assumption subset projected onto the cube is already a
      // valid strengthening: dropping literals from the cube only shrinks
      // the set of states the blocked clause excludes.
      GroundCube seed;
      for (const std::string& text : q.core) {
        auto it = by_text.find(text);
        if (it != by_text.end()) seed.lits.push_back(it->second);
      }
      seed = make_cube(std::move(seed.lits));
      GroundCube d = generalize(std::move(seed), cube, level);
      if (config_.orbit_check_samples > 0) orbit_debug_checks(d, level);
      learn(d, level);
      path_.pop_back();
      return true;
    }
    stats_.ctis++;
    if (level == 1 || state_in_init(q.state)) {
      // Concrete path: initial predecessor, then the blocking stack bottom
      // up, then the already-recorded safety violation. Cubes on the stack
      // pin every state variable, so the recorded states are exact.
      trace_.clear();
      trace_.push_back(q.state);
      trace_.insert(trace_.end(), path_.rbegin(), path_.rend());
      trace_.push_back(bad_state_);
      return false;
    }
    GroundCube pre = extended_cube(q.state);
    if (!block(pre, q.state, level - 1)) return false;
  }
}

GroundCube SymIC3::generalize(GroundCube cube, const GroundCube& full,
                              uint32_t level) {
  // Restore initial-state disjointness the core may have lost: take back
  // literals of the original cube (in shrink order) until the shrunk cube
  // excludes every initial state again.
  if (cube_intersects_init(cube)) {
    for (const GroundLit& l : shrink_order(*inst_, full)) {
      bool present = std::find(cube.lits.begin(), cube.lits.end(), l) !=
                     cube.lits.end();
      if (present) continue;
      cube = make_cube([&] {
        auto lits = cube.lits;
        lits.push_back(l);
        return lits;
      }());
      if (!cube_intersects_init(cube)) break;
    }
  }
  // Deletion-based minimization at the same frame the cube was blocked at.
  for (const GroundLit& l : shrink_order(*inst_, cube)) {
    if (cube.lits.size() <= 1) break;
    GroundCube cand = without(cube, l);
    if (cube_intersects_init(cand)) continue;
    std::vector<std::string> assumptions = frame_assumptions(level - 1);
    assumptions.push_back(client_.trans_sel());
    for (const GroundLit& cl : cand.lits)
      assumptions.push_back(lit_text(*inst_, cl, Phase::Next));
    std::string not_cand = "(not " + cube_text(*inst_, cand, Phase::Curr) + ")";
    QueryResult q = query(assumptions, {not_cand}, false, false);
    if (!q.sat) cube = std::move(cand);
  }
  return cube;
}

void SymIC3::learn(const GroundCube& cube, uint32_t level) {
  GroundClause clause = negate_cube(cube);
  QuantifiedPredicate pred = sym_boost(*inst_, group_, clause);
  for (Learned& p : preds_) {
    if (!p.dropped && p.pred.ground_clauses == pred.ground_clauses) {
      p.level = std::max(p.level, level);
      return;
    }
  }
  Learned entry;
  entry.pred = std::move(pred);
  entry.level = level;
  std::vector<std::string> curr;
  for (const GroundClause& c : entry.pred.ground_clauses) {
    curr.push_back(clause_text(*inst_, c, Phase::Curr));
    entry.next_texts.push_back(clause_text(*inst_, c, Phase::Next));
  }
  entry.curr_text = conj(curr);
  entry.sel = client_.add_selector(entry.curr_text);
  preds_.push_back(std::move(entry));
  stats_.clauses_learned++;
}

void SymIC3::orbit_debug_checks(const GroundCube& cube, uint32_t level) {
  std::mt19937 rng(config_.orbit_check_seed);
  std::uniform_int_distribution<size_t> dist(0, group_.size() - 1);
  for (uint32_t i = 0; i < config_.orbit_check_samples; ++i) {
    GroundCube pc = apply_cube(*inst_, group_[dist(rng)], cube);
    std::vector<std::string> assumptions = frame_assumptions(level - 1);
    assumptions.push_back(client_.trans_sel());
    for (const GroundLit& l : pc.lits)
      assumptions.push_back(lit_text(*inst_, l, Phase::Next));
    std::string not_pc = "(not " + cube_text(*inst_, pc, Phase::Curr) + ")";
    QueryResult q = query(assumptions, {not_pc}, false, false);
    stats_.orbit_checks++;
    if (q.sat)
      throw EngineError(
          "permuted blocking query was satisfiable; frames lost symmetry");
  }
}

void SymIC3::install_seeds() {
  for (const QuantifiedPredicate& seed : config_.seeds) {
    if (!transferable(seed)) continue;
    QuantifiedPredicate pred = seed;
    pred.ground_clauses = expand(*inst_, pred);
    if (pred.ground_clauses.empty()) continue;
    bool dup = false;
    for (const Learned& p : preds_)
      dup |= p.pred.ground_clauses == pred.ground_clauses;
    if (dup) continue;
    std::vector<std::string> curr, next;
    for (const GroundClause& c : pred.ground_clauses) {
      curr.push_back(clause_text(*inst_, c, Phase::Curr));
      next.push_back(clause_text(*inst_, c, Phase::Next));
    }
    // Level 1 is sound when the predicate covers the initial states and
    // everything they reach in one step.
    QueryResult holds0 = query({client_.init_sel()},
                               {"(not " + conj(curr) + ")"}, false, false);
    if (holds0.sat) continue;
    QueryResult holds1 =
        query({client_.init_sel(), client_.trans_sel()},
              {"(not " + conj(next) + ")"}, false, false);
    if (holds1.sat) continue;
    Learned entry;
    entry.pred = std::move(pred);
    entry.level = 1;
    entry.curr_text = conj(curr);
    entry.next_texts = std::move(next);
    entry.sel = client_.add_selector(entry.curr_text);
    preds_.push_back(std::move(entry));
    stats_.seeds_installed++;
  }
}

bool SymIC3::propagate(uint32_t max_level, uint32_t* converged_at) {
  for (uint32_t j = 1; j <= max_level; ++j) {
    for (Learned& p : preds_) {
      if (p.dropped || p.level != j) continue;
      std::vector<std::string> assumptions = frame_assumptions(j);
      assumptions.push_back(client_.trans_sel());
      QueryResult q =
          query(assumptions, {"(not " + conj(p.next_texts) + ")"}, false,
                false);
      if (!q.sat) p.level = j + 1;
    }
    bool empty = true;
    for (const Learned& p : preds_)
      empty &= p.dropped || p.level != j;
    if (empty) {
      *converged_at = j;
      return true;
    }
  }
  return false;
}

void SymIC3::validate_invariant() {
  std::vector<std::string> inv_sels{client_.safety_sel()};
  std::vector<std::string> curr{safety_curr_}, next{safety_next_};
  for (const Learned& p : preds_) {
    if (p.dropped || p.level != kInfLevel) continue;
    inv_sels.push_back(p.sel);
    curr.push_back(p.curr_text);
    next.push_back(conj(p.next_texts));
  }
  QueryResult initiation = query({client_.init_sel()},
                                 {"(not " + conj(curr) + ")"}, false, false);
  if (initiation.sat)
    throw EngineError("invariant validation failed: initiation");
  std::vector<std::string> step = inv_sels;
  step.push_back(client_.trans_sel());
  QueryResult consecution =
      query(step, {"(not " + conj(next) + ")"}, false, false);
  if (consecution.sat)
    throw EngineError("invariant validation failed: consecution");
  QueryResult implies_safety =
      query(inv_sels, {"(not " + safety_curr_ + ")"}, false, false);
  if (implies_safety.sat)
    throw EngineError("invariant validation failed: safety");
}

void SymIC3::prune_invariant() {
  // Most recently learned predicates go first, and the safety property is
  // deliberately left out of the context: surviving predicates must carry
  // the invariant on their own.
  for (size_t i = preds_.size(); i-- > 0;) {
    Learned& p = preds_[i];
    if (p.dropped || p.level != kInfLevel) continue;
    std::vector<std::string> others;
    for (size_t j = 0; j < preds_.size(); ++j) {
      if (j == i || preds_[j].dropped || preds_[j].level != kInfLevel)
        continue;
      others.push_back(preds_[j].sel);
    }
    if (others.empty()) continue;
    QueryResult q =
        query(others, {"(not " + p.curr_text + ")"}, false, false);
    if (!q.sat) p.dropped = true;
  }
}

void SymIC3::finalize_invariant(uint32_t converged_at, EngineResult* out) {
  for (Learned& p : preds_) {
    if (p.dropped) continue;
    p.level = p.level > converged_at ? kInfLevel : 0;
  }
  validate_invariant();
  prune_invariant();
  validate_invariant();
  for (const Learned& p : preds_)
    if (!p.dropped && p.level == kInfLevel) out->invariant.push_back(p.pred);
}

EngineResult SymIC3::run() {
  if (config_.timeout_seconds > 0)
    deadline_ = now_seconds() + config_.timeout_seconds;
  EngineResult out;

  QueryResult q0 = query({client_.init_sel()},
                         {"(not " + safety_curr_ + ")"}, true, false);
  if (q0.sat) {
    out.verdict = Verdict::Violated;
    out.trace = {q0.state};
    out.stats = stats_;
    return out;
  }
  QueryResult q1 = query({client_.init_sel(), client_.trans_sel()},
                         {"(not " + safety_next_ + ")"}, true, false);
  if (q1.sat) {
    out.verdict = Verdict::Violated;
    out.trace = {q1.state, q1.next_state};
    out.stats = stats_;
    return out;
  }

  install_seeds();

  for (uint32_t k = 1;; ++k) {
    if (k > config_.max_frames) throw EngineError("frame limit exceeded");
    stats_.frames = k;
    for (;;) {
      std::vector<std::string> assumptions = frame_assumptions(k);
      assumptions.push_back(client_.trans_sel());
      QueryResult q =
          query(assumptions, {"(not " + safety_next_ + ")"}, true, false);
      if (!q.sat) break;
      stats_.ctis++;
      bad_state_ = q.next_state;
      path_.clear();
      if (state_in_init(q.state)) {
        out.verdict = Verdict::Violated;
        out.trace = {q.state, bad_state_};
        out.stats = stats_;
        return out;
      }
      GroundCube cube = extended_cube(q.state);
      if (!block(cube, q.state, k)) {
        out.verdict = Verdict::Violated;
        out.trace = std::move(trace_);
        out.stats = stats_;
        return out;
      }
    }
    uint32_t converged_at = 0;
    if (propagate(k, &converged_at)) {
      finalize_invariant(converged_at, &out);
      out.verdict = Verdict::Safe;
      out.stats = stats_;
      return out;
    }
  }
}

}  // namespace symquant
