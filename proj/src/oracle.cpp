// Copyright (c) 2026 The SymQuant Authors. MIT license, see LICENSE.

#include "symquant/oracle.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace symquant {
namespace {

constexpr int8_t kF = 0;
constexpr int8_t kT = 1;
constexpr int8_t kU = 2;  // not determined by the partial assignment

int8_t bit_of(uint64_t bits, uint64_t known, VarId v) {
  if (!((known >> v) & 1)) return kU;
  return ((bits >> v) & 1) ? kT : kF;
}

// Three-valued evaluation over a partial assignment, used to prune the
// state enumeration before all variables are fixed. `known` masks carry
// which bits of `curr`/`next` are assigned.
int8_t eval3(const FiniteInstance& inst, const GRef& g, uint64_t curr,
             uint64_t curr_known, uint64_t next, uint64_t next_known) {
  switch (g->kind) {
    case GKind::False:
      return kF;
    case GKind::True:
      return kT;
    case GKind::Var:
      return g->phase == Phase::Curr ? bit_of(curr, curr_known, g->var)
                                     : bit_of(next, next_known, g->var);
    case GKind::Aux:
      return eval3(inst, inst.definition_body(g->rel, g->args, g->phase),
                   curr, curr_known, next, next_known);
    case GKind::Not: {
      int8_t a = eval3(inst, g->kids[0], curr, curr_known, next, next_known);
      return a == kU ? kU : static_cast<int8_t>(1 - a);
    }
    case GKind::And: {
      int8_t acc = kT;
      for (const GRef& k : g->kids) {
        int8_t a = eval3(inst, k, curr, curr_known, next, next_known);
        if (a == kF) return kF;
        if (a == kU) acc = kU;
      }
      return acc;
    }
    case GKind::Or: {
      int8_t acc = kF;
      for (const GRef& k : g->kids) {
        int8_t a = eval3(inst, k, curr, curr_known, next, next_known);
        if (a == kT) return kT;
        if (a == kU) acc = kU;
      }
      return acc;
    }
    case GKind::Iff: {
      int8_t a = eval3(inst, g->kids[0], curr, curr_known, next, next_known);
      if (a == kU) return kU;
      int8_t b = eval3(inst, g->kids[1], curr, curr_known, next, next_known);
      if (b == kU) return kU;
      return a == b ? kT : kF;
    }
  }
  return kU;  // unreachable
}

void require_width(const FiniteInstance& inst, uint32_t max_vars,
                   const char* what) {
  if (max_vars > 63) max_vars = 63;
  if (inst.num_state_vars > max_vars) {
    std::ostringstream os;
    os << what << ": instance has " << inst.num_state_vars
       << " state variables, limit is " << max_vars;
    throw OracleError(os.str());
  }
}

// Enumerates completions of the next-state bits under one transition
// disjunct. Frame conditions and update definitions determine most bits as
// soon as they are assigned, so the recursion rarely branches for real.
void complete_next(const FiniteInstance& inst, const GRef& formula,
                   uint64_t curr, uint64_t next, VarId depth,
                   std::vector<uint64_t>& out) {
  uint64_t known = depth >= 64 ? ~0ull : ((1ull << depth) - 1);
  int8_t v = eval3(inst, formula, curr, ~0ull, next, known);
  if (v == kF) return;
  if (depth == inst.num_state_vars) {
    if (v == kT) out.push_back(next);
    return;
  }
  complete_next(inst, formula, curr, next, depth + 1, out);
  complete_next(inst, formula, curr, next | (1ull << depth), depth + 1, out);
}

void complete_curr(const FiniteInstance& inst, const GRef& cond,
                   uint64_t curr, VarId depth, std::vector<uint64_t>& out) {
  uint64_t known = depth >= 64 ? ~0ull : ((1ull << depth) - 1);
  int8_t v = eval3(inst, cond, curr, known, 0, 0);
  if (v == kF) return;
  if (depth == inst.num_state_vars) {
    if (v == kT) out.push_back(curr);
    return;
  }
  complete_curr(inst, cond, curr, depth + 1, out);
  complete_curr(inst, cond, curr | (1ull << depth), depth + 1, out);
}

bool lit_holds(const FiniteInstance& inst, const GroundLit& l, uint64_t s) {
  bool v;
  if (inst.is_definition(l.rel)) {
    v = eval_ground(inst, inst.definition_body(l.rel, l.args, Phase::Curr), s);
  } else {
    v = (s >> inst.state_var(l.rel, l.args)) & 1;
  }
  return v == l.positive;
}

bool clauses_hold(const FiniteInstance& inst,
                  const std::vector<GroundClause>& inv, uint64_t s) {
  for (const GroundClause& c : inv) {
    bool sat = false;
    for (const GroundLit& l : c.lits) {
      if (lit_holds(inst, l, s)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

uint64_t pack_state(const FiniteInstance& inst,
                    const std::vector<int8_t>& bits, size_t index,
                    std::string* why, bool* ok) {
  if (bits.size() != inst.num_state_vars) {
    if (why) {
      std::ostringstream os;
      os << "state " << index << " has " << bits.size() << " bits, expected "
         << inst.num_state_vars;
      *why = os.str();
    }
    *ok = false;
    return 0;
  }
  uint64_t s = 0;
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) s |= 1ull << i;
  return s;
}

}  // namespace

std::vector<uint64_t> enumerate_states(const FiniteInstance& inst,
                                       const GRef& cond) {
  require_width(inst, 63, "enumerate_states");
  std::vector<uint64_t> out;
  complete_curr(inst, cond, 0, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<uint64_t> successors(const FiniteInstance& inst, uint64_t state) {
  require_width(inst, 63, "successors");
  std::vector<uint64_t> out;
  for (const TransDisjunct& d : inst.trans)
    complete_next(inst, d.formula, state, 0, 0, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ReachResult bfs_reach(const FiniteInstance& inst, uint32_t max_vars) {
  require_width(inst, max_vars, "bfs_reach");
  ReachResult res;
  // Parent map doubles as the visited set; initial states are their own
  // parents. States fit in 63 bits so ~0 never collides with a real state.
  std::unordered_map<uint64_t, uint64_t> parent;
  std::deque<uint64_t> queue;
  for (uint64_t s : enumerate_states(inst, inst.init)) {
    parent.emplace(s, ~0ull);
    queue.push_back(s);
  }
  while (!queue.empty()) {
    uint64_t s = queue.front();
    queue.pop_front();
    if (!eval_ground(inst, inst.safety, s)) {
      res.safe = false;
      res.num_reachable = parent.size();
      for (uint64_t p = s; p != ~0ull; p = parent.at(p))
        res.trace.push_back(p);
      std::reverse(res.trace.begin(), res.trace.end());
      return res;
    }
    for (uint64_t t : successors(inst, s)) {
      if (parent.emplace(t, s).second) queue.push_back(t);
    }
  }
  res.num_reachable = parent.size();
  return res;
}

InvariantCheck check_invariant_explicit(const FiniteInstance& inst,
                                        const std::vector<GroundClause>& inv,
                                        uint32_t max_vars) {
  require_width(inst, max_vars, "check_invariant_explicit");
  InvariantCheck out;
  auto holds = [&](uint64_t s) {
    return eval_ground(inst, inst.safety, s) && clauses_hold(inst, inv, s);
  };
  for (uint64_t s : enumerate_states(inst, inst.init)) {
    if (!holds(s)) {
      out.init_ok = false;
      out.witness_state = s;
      return out;
    }
  }
  uint64_t limit = 1ull << inst.num_state_vars;
  for (uint64_t s = 0; s < limit; ++s) {
    if (!holds(s)) continue;
    for (uint64_t t : successors(inst, s)) {
      if (!holds(t)) {
        out.consecution_ok = false;
        out.witness_state = s;
        out.witness_next = t;
        return out;
      }
    }
  }
  // Safety is part of the invariant by construction, so this final leg can
  // only fail if the two legs above were skipped; kept for shape.
  return out;
}

bool replay_trace(const FiniteInstance& inst,
                  const std::vector<std::vector<int8_t>>& states,
                  std::string* why) {
  require_width(inst, 63, "replay_trace");
  if (states.empty()) {
    if (why) *why = "trace is empty";
    return false;
  }
  bool ok = true;
  std::vector<uint64_t> packed;
  packed.reserve(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    packed.push_back(pack_state(inst, states[i], i, why, &ok));
    if (!ok) return false;
  }
  if (!eval_ground(inst, inst.init, packed.front())) {
    if (why) *why = "state 0 is not an initial state";
    return false;
  }
  for (size_t i = 0; i + 1 < packed.size(); ++i) {
    if (!eval_ground(inst, inst.trans_all, packed[i], packed[i + 1])) {
      if (why) {
        std::ostringstream os;
        os << "no transition from state " << i << " to state " << i + 1;
        *why = os.str();
      }
      return false;
    }
  }
  if (eval_ground(inst, inst.safety, packed.back())) {
    if (why) *why = "final state satisfies the safety property";
    return false;
  }
  return true;
}

}  // namespace symquant
