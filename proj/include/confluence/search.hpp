// SPDX-License-Identifier: Apache-2.0
//
// search.hpp - Bounded joinability, conversion, closing-subsystem and
// closing-diagram searches. Every search reports whether it ran into a
// state cap ("exhausted"), which is different from "no witness exists
// within the bound".

#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "confluence/cp.hpp"
#include "confluence/term.hpp"
#include "confluence/trs.hpp"

namespace confluence {

struct Join {
  RewriteSequence left;   // t ->* v
  RewriteSequence right;  // u ->* v
  const Term& meet() const { return left.end(); }
};

struct JoinResult {
  std::optional<Join> join;
  bool exhausted = false;
};

/// t ->^{<=k} v <-^{<=k} u, minimizing the total length, ties broken by
/// discovery order from t.
inline JoinResult joinable(const Term& t, const Term& u, const Trs& S, std::size_t k) {
  JoinResult out;
  if (t == u) {
    out.join = Join{empty_sequence(t), empty_sequence(u)};
    return out;
  }
  Reducts a(t, S, k), b(u, S, k);
  out.exhausted = a.exhausted() || b.exhausted();
  std::optional<Term> best;
  std::size_t best_len = SIZE_MAX;
  for (const Term& v : a.order()) {
    if (!b.contains(v)) continue;
    std::size_t len = a.depth(v) + b.depth(v);
    if (len < best_len) {
      best_len = len;
      best = v;
    }
  }
  if (best) out.join = Join{a.path_to(*best), b.path_to(*best)};
  return out;
}

// ---------------------------------------------------------------------------
// Conversions

struct ConversionStep {
  Step step;
  /// forward: terms[i] -> terms[i+1] by `step` applied to terms[i];
  /// backward: terms[i] <- terms[i+1] by `step` applied to terms[i+1].
  bool forward = true;
};

struct Conversion {
  std::vector<Term> terms;
  std::vector<ConversionStep> steps;

  const Term& start() const { return terms.front(); }
  const Term& end() const { return terms.back(); }
  std::size_t length() const { return steps.size(); }
  RuleSet rules_used() const {
    RuleSet out;
    for (const ConversionStep& s : steps) out.insert(s.step.rule);
    return out;
  }
};

inline bool replays(const Trs& R, const Conversion& c) {
  if (c.terms.size() != c.steps.size() + 1) return false;
  try {
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
      const ConversionStep& cs = c.steps[i];
      if (cs.forward) {
        if (!(replay(R, c.terms[i], cs.step) == c.terms[i + 1])) return false;
      } else {
        if (!(replay(R, c.terms[i + 1], cs.step) == c.terms[i])) return false;
      }
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

inline Conversion as_conversion(const Join& j) {
  Conversion c;
  c.terms = j.left.terms;
  for (const Step& s : j.left.steps) c.steps.push_back({s, true});
  for (std::size_t i = j.right.steps.size(); i-- > 0;) {
    c.terms.push_back(j.right.terms[i]);
    c.steps.push_back({j.right.steps[i], false});
  }
  return c;
}

/// Rules usable for backward steps: a non-variable rhs and Var(l) ⊆ Var(r),
/// so predecessors are finitely many and need no fresh variables.
inline bool backward_usable(const Rule& r) {
  if (r.rhs.is_variable()) return false;
  VariableSet rv = vars(r.rhs);
  for (const Variable& v : vars(r.lhs))
    if (!rv.contains(v)) return false;
  return true;
}

struct Neighbor {
  Term term;
  ConversionStep edge;  // oriented from the current term to `term`
};

/// ↔ neighbours: forward successors, then backward predecessors, each in
/// position-lexicographic order and then rule id.
inline std::vector<Neighbor> conversion_neighbors(const Term& w, const Trs& C) {
  std::vector<Neighbor> out;
  for (Successor& s : successors(w, C)) out.push_back({s.term, {s.step, true}});
  for (const Position& p : positions(w)) {
    const Term& sub = subterm_at(w, p);
    if (sub.is_variable()) continue;
    for (const Rule& r : C.rules()) {
      if (!backward_usable(r)) continue;
      if (r.rhs.symbol() != sub.symbol() || r.rhs.arity() != sub.arity()) continue;
      if (auto tau = match(r.rhs, sub)) {
        Term pred = replace_at(w, p, tau->apply(r.lhs));
        out.push_back({pred, {Step{r.id, p, *tau}, false}});
      }
    }
  }
  return out;
}

namespace detail {

/// Breadth-first ball over ↔C grown one layer at a time.
class Ball {
 public:
  struct Entry {
    std::size_t depth = 0;
    std::optional<Term> parent;
    ConversionStep edge;
  };

  Ball(const Term& center, const Trs& C, std::size_t cap)
      : C_(C), cap_(cap) {
    entries_.emplace(center, Entry{});
    order_.push_back(center);
    frontier_.push_back(center);
  }

  void grow() {
    std::vector<Term> next;
    for (const Term& w : frontier_) {
      for (Neighbor& n : conversion_neighbors(w, C_)) {
        if (entries_.contains(n.term)) continue;
        if (entries_.size() >= cap_) {
          exhausted_ = true;
          frontier_.clear();
          return;
        }
        entries_.emplace(n.term, Entry{radius_ + 1, w, n.edge});
        order_.push_back(n.term);
        next.push_back(n.term);
      }
    }
    frontier_ = std::move(next);
    ++radius_;
  }

  std::size_t radius() const { return radius_; }
  bool stalled() const { return frontier_.empty(); }
  bool exhausted() const { return exhausted_; }
  bool contains(const Term& t) const { return entries_.contains(t); }
  std::size_t depth(const Term& t) const { return entries_.at(t).depth; }
  const std::vector<Term>& order() const { return order_; }

  /// Path center = terms[0] ... terms.back() = t, edges oriented outward.
  Conversion path_to(const Term& t) const {
    std::vector<Term> terms;
    std::vector<ConversionStep> steps;
    Term cur = t;
    while (true) {
      const Entry& e = entries_.at(cur);
      terms.push_back(cur);
      if (!e.parent) break;
      steps.push_back(e.edge);
      cur = *e.parent;
    }
    std::reverse(terms.begin(), terms.end());
    std::reverse(steps.begin(), steps.end());
    return Conversion{std::move(terms), std::move(steps)};
  }

 private:
  const Trs& C_;
  std::size_t cap_;
  std::unordered_map<Term, Entry, TermHash> entries_;
  std::vector<Term> order_;
  std::vector<Term> frontier_;
  std::size_t radius_ = 0;
  bool exhausted_ = false;
};

}  // namespace detail

struct ConversionResult {
  std::optional<Conversion> conversion;
  bool exhausted = false;
};

/// t ↔^{<=budget} u over C by growing balls around both ends alternately.
inline ConversionResult convertible(const Term& t, const Term& u, const Trs& C,
                                    std::size_t budget, std::size_t cap = kStateCap) {
  ConversionResult out;
  if (t == u) {
    out.conversion = Conversion{{t}, {}};
    return out;
  }
  detail::Ball a(t, C, cap), b(u, C, cap);
  auto meet = [&]() -> std::optional<Term> {
    std::optional<Term> best;
    std::size_t best_len = SIZE_MAX;
    for (const Term& m : a.order()) {
      if (!b.contains(m)) continue;
      std::size_t len = a.depth(m) + b.depth(m);
      if (len < best_len) {
        best_len = len;
        best = m;
      }
    }
    return best;
  };
  while (a.radius() + b.radius() < budget) {
    bool grow_a = a.radius() <= b.radius();
    if (grow_a && a.stalled()) grow_a = false;
    if (!grow_a && b.stalled()) grow_a = !a.stalled();
    if (a.stalled() && b.stalled()) break;
    (grow_a ? a : b).grow();
    if (auto m = meet()) {
      Conversion left = a.path_to(*m);
      Conversion right = b.path_to(*m);
      // right runs u ... m; append it reversed.
      for (std::size_t i = right.steps.size(); i-- > 0;) {
        left.terms.push_back(right.terms[i]);
        ConversionStep cs = right.steps[i];
        cs.forward = !cs.forward;
        left.steps.push_back(cs);
      }
      out.conversion = std::move(left);
      return out;
    }
  }
  out.exhausted = a.exhausted() || b.exhausted();
  return out;
}

// ---------------------------------------------------------------------------
// Closing subsystems

struct ClosingSubsystem {
  std::optional<RuleSet> rules;
  /// One conversion per peak (empty for trivial peaks), in peak order.
  std::vector<Conversion> witnesses;
  bool exhausted = false;
};

/// Selects, per peak, the first shortest conversion over R and returns the
/// union of the rules used.
inline ClosingSubsystem find_closing_subsystem(const std::vector<Peak>& peaks,
                                               const Trs& R, std::size_t budget) {
  ClosingSubsystem out;
  RuleSet used;
  for (const Peak& pk : peaks) {
    ConversionResult c = convertible(pk.left, pk.right, R, budget);
    if (!c.conversion) {
      out.exhausted = c.exhausted;
      return out;
    }
    RuleSet ru = c.conversion->rules_used();
    used.insert(ru.begin(), ru.end());
    out.witnesses.push_back(std::move(*c.conversion));
  }
  out.rules = used;
  return out;
}

// ---------------------------------------------------------------------------
// Closing diagrams
//
// Shape, for a peak t ⇚_P s →_ε u:
//   t →^{i1} · ⇻^{i2} · →^{i3} w ←^{j3} v ⇚^{j2}_{P'} · ←^{j1} u
// with i1+i2+i3 <= budget, j1+j2+j3 <= budget, i2, j2 in {0, 1}, and
// Var(v, P') ⊆ Var(s, P). Both sides are stored as walks towards w.

enum class Segment { Prefix, Parallel, Middle };

inline const char* to_string(Segment s) {
  switch (s) {
    case Segment::Prefix: return "prefix";
    case Segment::Parallel: return "parallel";
    case Segment::Middle: return "middle";
  }
  return "?";
}

struct DiagramMove {
  Term from;
  Term to;
  std::vector<Step> steps;  // one step unless the move is the parallel one
  Segment segment = Segment::Middle;
};

struct SideAtoms {
  RuleSet prefix, parallel, middle;

  bool subsumes(const SideAtoms& o) const {  // this ⊆ o
    return std::includes(o.prefix.begin(), o.prefix.end(), prefix.begin(), prefix.end()) &&
           std::includes(o.parallel.begin(), o.parallel.end(), parallel.begin(),
                         parallel.end()) &&
           std::includes(o.middle.begin(), o.middle.end(), middle.begin(), middle.end());
  }
  std::size_t size() const { return prefix.size() + parallel.size() + middle.size(); }
  auto operator<=>(const SideAtoms&) const = default;
};

struct ClosingDiagram {
  Term meet;                          // w
  std::vector<DiagramMove> left;      // t ... w
  std::vector<DiagramMove> right;     // u ... w
  std::optional<PositionSet> p_prime; // positions of the right parallel move
  SideAtoms left_atoms, right_atoms;

  std::size_t length() const { return left.size() + right.size(); }
};

struct DiagramResult {
  std::vector<ClosingDiagram> diagrams;
  bool exhausted = false;
};

namespace detail {

inline SideAtoms atoms_of(const std::vector<DiagramMove>& moves) {
  SideAtoms a;
  for (const DiagramMove& m : moves)
    for (const Step& s : m.steps) {
      RuleSet& dst = m.segment == Segment::Prefix     ? a.prefix
                     : m.segment == Segment::Parallel ? a.parallel
                                                      : a.middle;
      dst.insert(s.rule);
    }
  return a;
}

struct SideEntry {
  bool after_parallel = false;
  SideAtoms atoms;
  std::vector<DiagramMove> moves;
  std::optional<PositionSet> p_prime;
};

inline constexpr std::size_t kFrontierCap = 16;

/// Walks of at most `budget` moves from `start`, Pareto-minimal in their
/// atoms per (term, phase). With `allowed` set, the parallel move must
/// satisfy Var(target, P') ⊆ *allowed.
inline std::map<Term, std::vector<SideEntry>> side_walks(const Term& start, const Trs& R,
                                                         std::size_t budget,
                                                         const VariableSet* allowed,
                                                         std::size_t state_cap,
                                                         bool& exhausted) {
  using Key = std::pair<Term, bool>;
  std::map<Key, std::vector<SideEntry>> table;
  std::size_t states = 0;
  auto insert = [&](const Term& t, SideEntry e, std::vector<std::pair<Term, SideEntry>>& next) {
    auto& bucket = table[{t, e.after_parallel}];
    for (const SideEntry& o : bucket)
      if (o.atoms.subsumes(e.atoms)) return;
    if (bucket.size() >= kFrontierCap || states >= state_cap) {
      exhausted = true;
      return;
    }
    ++states;
    bucket.push_back(e);
    next.emplace_back(t, std::move(e));
  };

  std::vector<std::pair<Term, SideEntry>> layer;
  {
    SideEntry init;
    table[{start, false}].push_back(init);
    layer.emplace_back(start, init);
  }
  std::unordered_map<Term, std::vector<Successor>, TermHash> succ_cache;
  std::unordered_map<Term, ParallelSuccessors, TermHash> par_cache;
  for (std::size_t d = 0; d < budget && !layer.empty(); ++d) {
    std::vector<std::pair<Term, SideEntry>> next;
    for (const auto& [t, e] : layer) {
      auto sit = succ_cache.find(t);
      if (sit == succ_cache.end()) sit = succ_cache.emplace(t, successors(t, R)).first;
      for (const Successor& s : sit->second) {
        SideEntry n = e;
        Segment seg = e.after_parallel ? Segment::Middle : Segment::Prefix;
        n.moves.push_back(DiagramMove{t, s.term, {s.step}, seg});
        (seg == Segment::Prefix ? n.atoms.prefix : n.atoms.middle).insert(s.step.rule);
        insert(s.term, std::move(n), next);
      }
      if (e.after_parallel) continue;
      auto pit = par_cache.find(t);
      if (pit == par_cache.end()) pit = par_cache.emplace(t, parallel_successors(t, R)).first;
      if (pit->second.exhausted) exhausted = true;
      for (const ParallelSuccessor& ps : pit->second.items) {
        if (ps.positions.empty()) continue;
        if (allowed) {
          VariableSet vs = vars_at(ps.term, ps.positions);
          if (!std::includes(allowed->begin(), allowed->end(), vs.begin(), vs.end()))
            continue;
        }
        SideEntry n = e;
        n.after_parallel = true;
        n.moves.push_back(DiagramMove{t, ps.term, ps.steps, Segment::Parallel});
        for (const Step& st : ps.steps) n.atoms.parallel.insert(st.rule);
        if (allowed) n.p_prime = ps.positions;
        insert(ps.term, std::move(n), next);
      }
    }
    layer = std::move(next);
  }

  // A walk without a parallel move may count all its steps as middle steps.
  std::map<Term, std::vector<SideEntry>> out;
  for (auto& [key, bucket] : table) {
    for (SideEntry e : bucket) {
      if (!e.after_parallel) {
        for (DiagramMove& m : e.moves) m.segment = Segment::Middle;
        e.atoms = atoms_of(e.moves);
      }
      auto& dst = out[key.first];
      bool dominated = false;
      for (const SideEntry& o : dst)
        if (o.atoms.subsumes(e.atoms)) dominated = true;
      if (dominated) continue;
      std::erase_if(dst, [&](const SideEntry& o) { return e.atoms.subsumes(o.atoms); });
      dst.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace detail

inline constexpr std::size_t kDiagramCap = 64;

/// Label-agnostic candidate closing diagrams for a peak, Pareto-minimal in
/// their (rule, segment) atoms, fewest atoms first, at most `cap`.
inline DiagramResult closing_diagrams(const Peak& peak, const Trs& R,
                                      std::size_t budget = 5, std::size_t cap = kDiagramCap,
                                      std::size_t state_cap = 4000) {
  DiagramResult out;
  VariableSet allowed = vars_at(peak.source, peak.positions());
  auto left = detail::side_walks(peak.left, R, budget, nullptr, state_cap, out.exhausted);
  auto right = detail::side_walks(peak.right, R, budget, &allowed, state_cap, out.exhausted);

  std::vector<ClosingDiagram> all;
  std::size_t pairs = 0;
  for (const auto& [w, lentries] : left) {
    auto it = right.find(w);
    if (it == right.end()) continue;
    for (const auto& le : lentries)
      for (const auto& re : it->second) {
        if (++pairs > 200000) {
          out.exhausted = true;
          break;
        }
        ClosingDiagram d{w, le.moves, re.moves, re.p_prime, le.atoms, re.atoms};
        bool dominated = false;
        for (const ClosingDiagram& o : all)
          if (o.left_atoms.subsumes(d.left_atoms) && o.right_atoms.subsumes(d.right_atoms)) {
            dominated = true;
            break;
          }
        if (dominated) continue;
        std::erase_if(all, [&](const ClosingDiagram& o) {
          return d.left_atoms.subsumes(o.left_atoms) && d.right_atoms.subsumes(o.right_atoms);
        });
        all.push_back(std::move(d));
      }
  }
  std::stable_sort(all.begin(), all.end(), [](const ClosingDiagram& a, const ClosingDiagram& b) {
    std::size_t sa = a.left_atoms.size() + a.right_atoms.size();
    std::size_t sb = b.left_atoms.size() + b.right_atoms.size();
    if (sa != sb) return sa < sb;
    return a.length() < b.length();
  });
  if (all.size() > cap) {
    all.erase(all.begin() + static_cast<std::ptrdiff_t>(cap), all.end());
    out.exhausted = true;
  }
  out.diagrams = std::move(all);
  return out;
}

/// Checks the shape, the step budgets, the variable condition and that both
/// sides replay to the meeting term.
inline bool diagram_valid(const ClosingDiagram& d, const Peak& peak, const Trs& R,
                          std::size_t budget) {
  auto side_ok = [&](const std::vector<DiagramMove>& moves, const Term& start, bool is_right) {
    if (moves.size() > budget) return false;
    Term cur = start;
    int phase = 0;  // 0 prefix, 1 after parallel
    std::size_t parallels = 0;
    for (const DiagramMove& m : moves) {
      if (!(m.from == cur)) return false;
      try {
        if (m.segment == Segment::Parallel) {
          if (++parallels > 1 || m.steps.empty() || phase == 1) return false;
          if (!(replay_parallel(R, cur, m.steps) == m.to)) return false;
          phase = 1;
          if (is_right) {
            PositionSet ps;
            for (const Step& s : m.steps) ps.insert(s.position);
            if (!d.p_prime || *d.p_prime != ps) return false;
            VariableSet vs = vars_at(m.to, ps);
            VariableSet allowed = vars_at(peak.source, peak.positions());
            if (!std::includes(allowed.begin(), allowed.end(), vs.begin(), vs.end()))
              return false;
          }
        } else {
          if (m.steps.size() != 1) return false;
          if (m.segment == Segment::Prefix && phase == 1) return false;
          if (m.segment == Segment::Middle) phase = 1;
          if (!(replay(R, cur, m.steps[0]) == m.to)) return false;
        }
      } catch (const std::exception&) {
        return false;
      }
      cur = m.to;
    }
    if (is_right && parallels == 0 && d.p_prime && !d.p_prime->empty()) return false;
    return cur == d.meet && detail::atoms_of(moves) == (is_right ? d.right_atoms : d.left_atoms);
  };
  return side_ok(d.left, peak.left, false) && side_ok(d.right, peak.right, true);
}

}  // namespace confluence
