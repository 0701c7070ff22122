// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/sat/cdcl.hpp"

#include <algorithm>
#include <cmath>

namespace symquant::sat {

namespace {

// Luby restart sequence, scaled by the caller.
double luby(double y, int x) {
  int size, seq;
  for (size = 1, seq = 0; size < x + 1; seq++, size = 2 * size + 1) {
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    seq--;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

Var Solver::new_var() {
  Var v = num_vars();
  assigns_.push_back(kUndef);
  saved_phase_.push_back(kFalse);
  level_.push_back(0);
  reason_.push_back(-1);
  activity_.push_back(0.0);
  seen_.push_back(0);
  heap_pos_.push_back(-1);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

bool Solver::add_clause(std::vector<Lit> lits) {
  if (!ok_) return false;
  std::sort(lits.begin(), lits.end(),
            [](Lit a, Lit b) { return a.x < b.x; });
  std::vector<Lit> out;
  Lit prev{-2};
  for (Lit p : lits) {
    if (value(p) == kTrue || p == ~prev) return true;  // satisfied or taut
    if (value(p) != kFalse && !(p == prev)) out.push_back(p);
    prev = p;
  }
  if (out.empty()) {
    ok_ = false;
    return false;
  }
  if (out.size() == 1) {
    enqueue(out[0], -1);
    ok_ = propagate() == -1;
    return ok_;
  }
  clauses_.push_back(Clause{0, false, false, std::move(out)});
  attach(static_cast<int32_t>(clauses_.size()) - 1);
  return true;
}

void Solver::attach(int32_t cref) {
  const auto& c = clauses_[cref].lits;
  watches_[(~c[0]).x].push_back({cref, c[1]});
  watches_[(~c[1]).x].push_back({cref, c[0]});
}

void Solver::enqueue(Lit p, int32_t reason) {
  Var v = lit_var(p);
  assigns_[v] = lit_neg(p) ? kFalse : kTrue;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(p);
}

int32_t Solver::propagate() {
  while (qhead_ < trail_.size()) {
    Lit p = trail_[qhead_++];
    auto& ws = watches_[p.x];
    size_t i = 0, j = 0;
    while (i < ws.size()) {
      Watch w = ws[i];
      if (value(w.blocker) == kTrue) {
        ws[j++] = ws[i++];
        continue;
      }
      Clause& c = clauses_[w.cref];
      auto& lits = c.lits;
      // Make sure the false literal is lits[1].
      if (lits[0] == ~p) std::swap(lits[0], lits[1]);
      i++;
      Lit first = lits[0];
      if (value(first) == kTrue) {
        ws[j++] = {w.cref, first};
        continue;
      }
      bool moved = false;
      for (size_t k = 2; k < lits.size(); k++) {
        if (value(lits[k]) != kFalse) {
          std::swap(lits[1], lits[k]);
          watches_[(~lits[1]).x].push_back({w.cref, first});
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = {w.cref, first};
      if (value(first) == kFalse) {
        // Conflict: copy the remaining watches back and report.
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return w.cref;
      }
      enqueue(first, w.cref);
    }
    ws.resize(j);
  }
  return -1;
}

void Solver::var_bump(Var v) {
  if ((activity_[v] += var_inc_) > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_in(v)) heap_up(heap_pos_[v]);
}

void Solver::cla_bump(Clause& c) {
  if ((c.act += static_cast<float>(cla_inc_)) > 1e20f) {
    for (int32_t cr : learnts_) clauses_[cr].act *= 1e-20f;
    cla_inc_ *= 1e-20;
  }
}

void Solver::analyze(int32_t confl, std::vector<Lit>& out_learnt,
                     int& out_btlevel) {
  int path = 0;
  Lit p{-2};
  out_learnt.push_back(p);  // placeholder for the asserting literal
  size_t index = trail_.size();

  do {
    Clause& c = clauses_[confl];
    if (c.learnt) cla_bump(c);
    for (size_t k = (p.x == -2 ? 0 : 1); k < c.lits.size(); k++) {
      Lit q = c.lits[k];
      Var v = lit_var(q);
      if (!seen_[v] && level(v) > 0) {
        seen_[v] = 1;
        var_bump(v);
        if (level(v) >= decision_level())
          path++;
        else
          out_learnt.push_back(q);
      }
    }
    while (!seen_[lit_var(trail_[--index])]) {
    }
    p = trail_[index];
    confl = reason_[lit_var(p)];
    seen_[lit_var(p)] = 0;
    path--;
  } while (path > 0);
  out_learnt[0] = ~p;
  // Literals dropped by minimization below still need their seen_ marks
  // cleared at the end, so remember the full clause.
  std::vector<Lit> to_clear = out_learnt;

  // Minimize: drop literals implied by the rest of the clause.
  uint32_t abstract_levels = 0;
  for (size_t k = 1; k < out_learnt.size(); k++)
    abstract_levels |= 1u << (level(lit_var(out_learnt[k])) & 31);
  size_t j = 1;
  for (size_t k = 1; k < out_learnt.size(); k++) {
    Var v = lit_var(out_learnt[k]);
    if (reason_[v] == -1 || !lit_redundant(out_learnt[k], abstract_levels))
      out_learnt[j++] = out_learnt[k];
  }
  out_learnt.resize(j);

  if (out_learnt.size() == 1) {
    out_btlevel = 0;
  } else {
    size_t max_i = 1;
    for (size_t k = 2; k < out_learnt.size(); k++)
      if (level(lit_var(out_learnt[k])) > level(lit_var(out_learnt[max_i])))
        max_i = k;
    std::swap(out_learnt[1], out_learnt[max_i]);
    out_btlevel = level(lit_var(out_learnt[1]));
  }

  for (Lit q : to_clear) seen_[lit_var(q)] = 0;
}

bool Solver::lit_redundant(Lit p, uint32_t abstract_levels) {
  std::vector<Lit> stack{p};
  std::vector<Var> cleared;
  bool redundant = true;
  while (!stack.empty() && redundant) {
    Lit q = stack.back();
    stack.pop_back();
    const Clause& c = clauses_[reason_[lit_var(q)]];
    for (size_t k = 1; k < c.lits.size(); k++) {
      Lit r = c.lits[k];
      Var v = lit_var(r);
      if (seen_[v] || level(v) == 0) continue;
      if (reason_[v] == -1 ||
          ((1u << (level(v) & 31)) & abstract_levels) == 0) {
        redundant = false;
        break;
      }
      seen_[v] = 2;
      cleared.push_back(v);
      stack.push_back(r);
    }
  }
  for (Var v : cleared) seen_[v] = 0;
  return redundant;
}

void Solver::analyze_final(Lit p) {
  // p is the negation of a failed assumption; conflict_ collects the
  // assumptions (as given by the caller) whose conjunction is refuted.
  conflict_.clear();
  conflict_.push_back(~p);
  if (decision_level() == 0) return;
  seen_[lit_var(p)] = 1;
  for (size_t i = trail_.size(); i-- > static_cast<size_t>(trail_lim_[0]);) {
    Var v = lit_var(trail_[i]);
    if (!seen_[v]) continue;
    if (reason_[v] == -1) {
      conflict_.push_back(trail_[i]);
    } else {
      const Clause& c = clauses_[reason_[v]];
      for (size_t k = 1; k < c.lits.size(); k++)
        if (level(lit_var(c.lits[k])) > 0) seen_[lit_var(c.lits[k])] = 1;
    }
    seen_[v] = 0;
  }
  seen_[lit_var(p)] = 0;
}

void Solver::cancel_until(int lvl) {
  if (decision_level() <= lvl) return;
  for (size_t i = trail_.size(); i-- > static_cast<size_t>(trail_lim_[lvl]);) {
    Var v = lit_var(trail_[i]);
    assigns_[v] = kUndef;
    saved_phase_[v] = lit_neg(trail_[i]) ? kFalse : kTrue;
    if (!heap_in(v)) heap_insert(v);
  }
  trail_.resize(trail_lim_[lvl]);
  trail_lim_.resize(lvl);
  qhead_ = trail_.size();
}

Lit Solver::pick_branch() {
  // Occasionally branch on a random unassigned variable to break plateaus.
  if ((rand_u64() % 100) < 2 && !heap_.empty()) {
    Var v = heap_[rand_u64() % heap_.size()];
    if (assigns_[v] == kUndef)
      return mk_lit(v, saved_phase_[v] != kTrue);
  }
  for (;;) {
    if (heap_.empty()) return Lit{-2};
    Var v = heap_pop();
    if (assigns_[v] == kUndef) return mk_lit(v, saved_phase_[v] != kTrue);
  }
}

void Solver::reduce_db() {
  // Runs only at decision level 0 so the watch lists can be rebuilt from
  // scratch without violating the watcher invariant. Clauses are first
  // simplified against the fixed level-0 assignment, which also guarantees
  // the two rebuilt watches are unassigned.
  for (auto& c : clauses_) {
    if (c.deleted) continue;
    bool satisfied = false;
    for (Lit p : c.lits)
      if (value(p) == kTrue) {
        satisfied = true;
        break;
      }
    if (satisfied) {
      c.deleted = true;
      continue;
    }
    c.lits.erase(std::remove_if(c.lits.begin(), c.lits.end(),
                                [&](Lit p) { return value(p) == kFalse; }),
                 c.lits.end());
    if (c.lits.empty()) {
      ok_ = false;
      return;
    }
    if (c.lits.size() == 1) {
      enqueue(c.lits[0], -1);
      c.deleted = true;
    }
  }
  learnts_.erase(std::remove_if(
                     learnts_.begin(), learnts_.end(),
                     [&](int32_t cr) { return clauses_[cr].deleted; }),
                 learnts_.end());
  std::sort(learnts_.begin(), learnts_.end(), [&](int32_t a, int32_t b) {
    return clauses_[a].act < clauses_[b].act;
  });
  size_t keep_from = learnts_.size() / 2;
  for (size_t i = 0; i < keep_from; i++) {
    Clause& c = clauses_[learnts_[i]];
    if (c.lits.size() > 2) c.deleted = true;
  }
  learnts_.erase(std::remove_if(
                     learnts_.begin(), learnts_.end(),
                     [&](int32_t cr) { return clauses_[cr].deleted; }),
                 learnts_.end());
  rebuild_watches();
}

void Solver::rebuild_watches() {
  for (auto& ws : watches_) ws.clear();
  for (int32_t cr = 0; cr < static_cast<int32_t>(clauses_.size()); cr++)
    if (!clauses_[cr].deleted) attach(cr);
  qhead_ = 0;  // replay the level-0 trail through the fresh watches
}

int Solver::search_result() {
  uint64_t conflicts_here = 0;
  std::vector<Lit> learnt;
  for (;;) {
    int32_t confl = propagate();
    if (confl != -1) {
      stat_conflicts_++;
      conflicts_here++;
      if (decision_level() == 0) return -1;
      learnt.clear();
      int bt;
      analyze(confl, learnt, bt);
      cancel_until(bt);
      if (learnt.size() == 1) {
        enqueue(learnt[0], -1);
      } else {
        clauses_.push_back(Clause{0, true, false, learnt});
        int32_t cr = static_cast<int32_t>(clauses_.size()) - 1;
        learnts_.push_back(cr);
        cla_bump(clauses_[cr]);
        attach(cr);
        enqueue(learnt[0], cr);
      }
      var_decay();
      cla_inc_ *= (1.0 / 0.999);
    } else {
      if (conflicts_here >= conflict_budget_ ||
          learnts_.size() >= learnt_limit_)
        return 0;  // restart; the solve loop reduces the DB at level 0
      Lit next{-2};
      while (decision_level() < static_cast<int>(assumptions_.size())) {
        Lit p = assumptions_[decision_level()];
        if (value(p) == kTrue) {
          trail_lim_.push_back(static_cast<int32_t>(trail_.size()));
        } else if (value(p) == kFalse) {
          analyze_final(~p);
          return -1;
        } else {
          next = p;
          break;
        }
      }
      if (next.x == -2) next = pick_branch();
      if (next.x == -2) return 1;  // all variables assigned
      trail_lim_.push_back(static_cast<int32_t>(trail_.size()));
      enqueue(next, -1);
    }
  }
}

bool Solver::solve(const std::vector<Lit>& assumptions) {
  conflict_.clear();
  if (!ok_) return false;
  assumptions_ = assumptions;
  int status = 0;
  for (int restarts = 0; status == 0; restarts++) {
    conflict_budget_ = static_cast<uint64_t>(luby(2.0, restarts) * 100);
    status = search_result();
    if (status == 1) {
      model_.assign(num_vars(), kFalse);
      for (Var v = 0; v < num_vars(); v++)
        if (assigns_[v] != kUndef) model_[v] = assigns_[v];
    }
    cancel_until(0);
    if (status == 0 && learnts_.size() >= learnt_limit_) {
      reduce_db();
      learnt_limit_ += 500;
      if (propagate() != -1) {
        ok_ = false;
        status = -1;
      }
      if (!ok_) status = -1;
    }
  }
  assumptions_.clear();
  return status == 1;
}

void Solver::heap_insert(Var v) {
  heap_pos_[v] = static_cast<int32_t>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_pos_[v]);
}

Var Solver::heap_pop() {
  Var top = heap_[0];
  heap_[0] = heap_.back();
  heap_pos_[heap_[0]] = 0;
  heap_.pop_back();
  heap_pos_[top] = -1;
  if (!heap_.empty()) heap_down(0);
  return top;
}

void Solver::heap_up(int i) {
  Var v = heap_[i];
  while (i > 0) {
    int parent = (i - 1) >> 1;
    Var pv = heap_[parent];
    if (activity_[pv] >= activity_[v] &&
        !(activity_[pv] == activity_[v] && v < pv))
      break;
    heap_[i] = pv;
    heap_pos_[pv] = i;
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

void Solver::heap_down(int i) {
  Var v = heap_[i];
  int n = static_cast<int>(heap_.size());
  for (;;) {
    int child = 2 * i + 1;
    if (child >= n) break;
    if (child + 1 < n) {
      Var a = heap_[child], b = heap_[child + 1];
      if (activity_[b] > activity_[a] ||
          (activity_[b] == activity_[a] && b < a))
        child++;
    }
    Var cv = heap_[child];
    if (activity_[v] >= activity_[cv] &&
        !(activity_[v] == activity_[cv] && cv < v))
      break;
    heap_[i] = cv;
    heap_pos_[cv] = i;
    i = child;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

}  // namespace symquant::sat
