// SPDX-License-Identifier: Apache-2.0
//
// reduction.hpp - Shrinking a TRS R to a subsystem C that is confluent iff
// R is, provided pcp(R) ⊆ ↔*_C and R|C ⊆ →*_C. The subsystem is found by
// SAT over rule variables x_α and symbol variables y_f.

#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "confluence/cp.hpp"
#include "confluence/sat.hpp"
#include "confluence/search.hpp"
#include "confluence/trs.hpp"

namespace confluence {

struct SkEntry {
  RuleSet rules;
  RewriteSequence witness;  // lhs ->* rhs using exactly `rules`
};

using SkTable = std::map<int, std::vector<SkEntry>>;

struct SkOptions {
  /// Always add {α} itself. Off by default: witnesses are sequences over the
  /// other rules, falling back to {α} when there are none.
  bool include_self = false;
  /// Drop sets that include another set of the table.
  bool minimize = false;
  std::size_t state_cap = 20000;
};

/// Rule sets S with lhs ->^{<=k} rhs using exactly the rules of S.
inline std::vector<SkEntry> compute_sk(const Trs& R, const Rule& rule, std::size_t k,
                                       const SkOptions& opt = {}) {
  RuleSet others = R.ids();
  others.erase(rule.id);
  Trs S = R.subsystem(others);

  struct State {
    Term term;
    RuleSet used;
    std::size_t parent;  // index into states, SIZE_MAX for the root
    Step step;
  };
  std::vector<State> states{{rule.lhs, {}, SIZE_MAX, Step{}}};
  std::set<std::pair<Term, RuleSet>> seen{{rule.lhs, {}}};
  std::vector<SkEntry> out;
  std::set<RuleSet> found;

  auto witness = [&](std::size_t idx) {
    std::vector<Term> terms;
    std::vector<Step> steps;
    for (std::size_t i = idx; i != SIZE_MAX; i = states[i].parent) {
      terms.push_back(states[i].term);
      if (states[i].parent != SIZE_MAX) steps.push_back(states[i].step);
    }
    std::reverse(terms.begin(), terms.end());
    std::reverse(steps.begin(), steps.end());
    return RewriteSequence{rule.lhs, std::move(steps), std::move(terms)};
  };

  std::size_t begin = 0;
  for (std::size_t depth = 0; depth < k; ++depth) {
    std::size_t end = states.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (Successor& s : successors(states[i].term, S)) {
        RuleSet used = states[i].used;
        used.insert(s.step.rule);
        if (!seen.emplace(s.term, used).second) continue;
        if (states.size() >= opt.state_cap) break;
        states.push_back({s.term, used, i, s.step});
        if (s.term == rule.rhs && found.insert(used).second)
          out.push_back({used, witness(states.size() - 1)});
      }
    }
    begin = end;
  }
  bool has_self = found.contains(RuleSet{rule.id});
  if ((out.empty() || opt.include_self) && !has_self) {
    RewriteSequence one = empty_sequence(rule.lhs);
    auto sigma = match(rule.lhs, rule.lhs);
    one.steps.push_back(Step{rule.id, Position::root(), *sigma});
    one.terms.push_back(rule.rhs);
    out.push_back({RuleSet{rule.id}, one});
  }
  if (opt.minimize) {
    std::vector<SkEntry> kept;
    for (const SkEntry& e : out) {
      bool redundant = false;
      for (const SkEntry& o : out)
        if (o.rules != e.rules &&
            std::includes(e.rules.begin(), e.rules.end(), o.rules.begin(), o.rules.end()))
          redundant = true;
      if (!redundant) kept.push_back(e);
    }
    out = std::move(kept);
  }
  std::stable_sort(out.begin(), out.end(), [](const SkEntry& a, const SkEntry& b) {
    if (a.rules.size() != b.rules.size()) return a.rules.size() < b.rules.size();
    return a.rules < b.rules;
  });
  return out;
}

inline SkTable compute_sk_table(const Trs& R, std::size_t k, const SkOptions& opt = {}) {
  SkTable t;
  for (const Rule& r : R.rules()) t.emplace(r.id, compute_sk(R, r, k, opt));
  return t;
}

struct Encoding {
  sat::Cnf cnf;
  std::map<int, int> rule_var;            // α -> x_α
  std::map<std::string, int> symbol_var;  // f -> y_f

  std::vector<int> rule_vars() const {
    std::vector<int> out;
    for (const auto& [_, v] : rule_var) out.push_back(v);
    return out;
  }
  RuleSet decode(const sat::Model& m) const {
    RuleSet out;
    for (const auto& [id, v] : rule_var)
      if (m[v]) out.insert(id);
    return out;
  }
};

/// The four clause groups: C0 ⊆ C; C ≠ R; Fun(C) is marked; every rule of
/// R|C outside C0 is simulated by some S ⊆ C from its S_k entry.
inline Encoding encode(const Trs& R, const RuleSet& C0, const SkTable& sk) {
  Encoding e;
  for (const Rule& r : R.rules()) e.rule_var[r.id] = e.cnf.new_var();
  std::set<std::string> fun;
  for (const Rule& r : R.rules()) {
    collect_symbols(r.lhs, fun);
    collect_symbols(r.rhs, fun);
  }
  for (const std::string& f : fun) e.symbol_var[f] = e.cnf.new_var();

  for (int id : C0) e.cnf.add_unit(e.rule_var.at(id));
  sat::Clause not_all;
  for (const auto& [_, v] : e.rule_var) not_all.push_back(-v);
  e.cnf.add(not_all);
  for (const Rule& r : R.rules())
    for (const std::string& f : fun_symbols(r))
      e.cnf.add({-e.rule_var.at(r.id), e.symbol_var.at(f)});
  for (const Rule& r : R.rules()) {
    if (C0.contains(r.id)) continue;
    sat::Clause c;
    for (const SkEntry& s : sk.at(r.id)) {
      if (s.rules.size() == 1) {
        c.push_back(e.rule_var.at(*s.rules.begin()));
        continue;
      }
      int z = e.cnf.new_var();  // z -> ⋀ x_β
      for (int b : s.rules) e.cnf.add({-z, e.rule_var.at(b)});
      c.push_back(z);
    }
    for (const std::string& f : fun_symbols(r.lhs)) c.push_back(-e.symbol_var.at(f));
    e.cnf.add(c);
  }
  return e;
}

struct ReductionStep {
  Trs input;
  RuleSet c0;
  RuleSet chosen;
  Encoding encoding;
  sat::Model model;
  std::vector<Peak> peaks;
  std::vector<Conversion> peak_witnesses;            // over `chosen`, per peak
  std::map<int, RewriteSequence> restriction_witnesses;  // R|C rules, over `chosen`
};

struct ReductionOptions {
  std::size_t conversion_budget = 10;
  SkOptions sk;
  /// Called with each encoding before it is solved.
  std::function<void(const Encoding&)> on_encoding;
};

/// One reduction step with a ⊆-minimal C among the encoding's models whose
/// side conditions replay.
inline std::optional<ReductionStep> reduce_once(const Trs& R, std::size_t k,
                                                const ReductionOptions& opt = {}) {
  if (!is_left_linear(R)) return std::nullopt;
  std::vector<Peak> peaks = parallel_critical_peaks(R);
  ClosingSubsystem c0 = find_closing_subsystem(peaks, R, opt.conversion_budget);
  if (!c0.rules) return std::nullopt;
  SkTable sk = compute_sk_table(R, k, opt.sk);
  Encoding enc = encode(R, *c0.rules, sk);
  if (opt.on_encoding) opt.on_encoding(enc);

  sat::Cnf work = enc.cnf;
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto m = sat::solve(work);
    if (!m) return std::nullopt;
    // Descend to a ⊆-minimal model.
    while (true) {
      RuleSet cur = enc.decode(*m);
      sat::Cnf smaller = work;
      sat::Clause drop;
      for (const auto& [id, v] : enc.rule_var) {
        if (cur.contains(id)) drop.push_back(-v);
        else smaller.add_unit(-v);
      }
      if (drop.empty()) break;
      smaller.add(drop);
      auto m2 = sat::solve(smaller);
      if (!m2) break;
      m = m2;
    }
    RuleSet C = enc.decode(*m);
    Trs sub = R.subsystem(C);

    ReductionStep step{R, *c0.rules, C, enc, *m, peaks, {}, {}};
    bool ok = true;
    for (std::size_t i = 0; i < peaks.size() && ok; ++i) {
      const Conversion& w = c0.witnesses[i];
      if (replays(sub, w)) {
        step.peak_witnesses.push_back(w);
        continue;
      }
      ConversionResult c = convertible(peaks[i].left, peaks[i].right, sub, opt.conversion_budget);
      if (c.conversion) step.peak_witnesses.push_back(*c.conversion);
      else ok = false;
    }
    for (int id : restriction(R, C)) {
      if (!ok) break;
      const Rule& r = R.rule(id);
      std::optional<RewriteSequence> w;
      for (const SkEntry& s : sk.at(id))
        if (std::includes(C.begin(), C.end(), s.rules.begin(), s.rules.end())) {
          w = s.witness;
          break;
        }
      if (!w) w = reachable(r.lhs, r.rhs, sub, k);
      if (w && replays(sub, *w)) step.restriction_witnesses.emplace(id, *w);
      else ok = false;
    }
    if (ok) return step;
    sat::Clause block;
    for (const auto& [id, v] : enc.rule_var) block.push_back(C.contains(id) ? -v : v);
    work.add(block);
  }
  return std::nullopt;
}

/// Applies reduce_once until it fails; each step strictly shrinks the system.
inline std::vector<ReductionStep> reduce_fixpoint(const Trs& R, std::size_t k,
                                                  const ReductionOptions& opt = {}) {
  std::vector<ReductionStep> steps;
  Trs cur = R;
  while (auto st = reduce_once(cur, k, opt)) {
    cur = cur.subsystem(st->chosen);
    steps.push_back(std::move(*st));
  }
  return steps;
}

/// Re-checks a step: C ⊊ input, every peak converts within C, every rule of
/// input|C rewrites to its rhs within C, and the model satisfies the CNF.
inline bool verify_reduction_step(const ReductionStep& st) {
  const Trs& R = st.input;
  if (st.chosen.size() >= R.size()) return false;
  for (int id : st.chosen)
    if (!R.has_rule(id)) return false;
  Trs sub = R.subsystem(st.chosen);
  std::vector<Peak> peaks = parallel_critical_peaks(R);
  if (peaks.size() != st.peak_witnesses.size()) return false;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const Conversion& w = st.peak_witnesses[i];
    if (!(w.start() == peaks[i].left) || !(w.end() == peaks[i].right) || !replays(sub, w))
      return false;
  }
  for (int id : restriction(R, st.chosen)) {
    auto it = st.restriction_witnesses.find(id);
    if (it == st.restriction_witnesses.end()) return false;
    const Rule& r = R.rule(id);
    if (!(it->second.start == r.lhs) || !(it->second.end() == r.rhs) ||
        !replays(sub, it->second))
      return false;
  }
  return sat::satisfies(st.model, st.encoding.cnf);
}

}  // namespace confluence
