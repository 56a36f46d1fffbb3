// SPDX-License-Identifier: Apache-2.0
//
// cp.hpp - Critical peaks, parallel critical peaks, and critical pair
// systems.
//
// A parallel critical peak is t ⇚_P s →_ε u, where s = lσ for the root rule
// l -> r, u = rσ, and t contracts one inner redex per position of P.
// Emitted peaks have canonical variable names so that identical peaks are
// syntactically identical.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "confluence/term.hpp"
#include "confluence/trs.hpp"

namespace confluence {

struct Peak {
  Term source;              // s
  Term left;                // t
  Term right;               // u
  std::map<Position, int> inner;  // rule used at each position of P
  int root = 0;             // rule used at ε for the right step
  std::vector<Step> left_steps;   // steps of s ⇻_P t, position order
  Step right_step;                // step of s →_ε u

  PositionSet positions() const {
    PositionSet out;
    for (const auto& [p, _] : inner) out.insert(p);
    return out;
  }
  bool overlay() const { return inner.size() == 1 && inner.begin()->first.is_root(); }
  bool trivial() const { return left == right; }
  RuleSet left_rules() const {
    RuleSet out;
    for (const auto& [_, id] : inner) out.insert(id);
    return out;
  }

  std::string str() const {
    std::string ps = "{";
    bool first = true;
    for (const auto& [p, id] : inner) {
      if (!first) ps += ',';
      first = false;
      ps += p.str() + ":" + std::to_string(id);
    }
    ps += "}";
    return left.str() + " <=" + ps + "= " + source.str() + " ->[" +
           std::to_string(root) + "] " + right.str();
  }

  auto key() const { return std::tie(source, left, right, inner, root); }
  friend bool operator<(const Peak& a, const Peak& b) { return a.key() < b.key(); }
  friend bool operator==(const Peak& a, const Peak& b) { return a.key() == b.key(); }
};

/// True iff both arms replay as steps of the given systems.
inline bool peak_replays(const Peak& pk, const Trs& inner_rules, const Trs& root_rules) {
  try {
    if (pk.left_steps.size() != pk.inner.size()) return false;
    for (const Step& st : pk.left_steps) {
      auto it = pk.inner.find(st.position);
      if (it == pk.inner.end() || it->second != st.rule) return false;
    }
    if (!is_parallel_set(pk.positions())) return false;
    if (!(replay_parallel(inner_rules, pk.source, pk.left_steps) == pk.left)) return false;
    if (!pk.right_step.position.is_root() || pk.right_step.rule != pk.root) return false;
    return replay(root_rules, pk.source, pk.right_step) == pk.right;
  } catch (const std::exception&) {
    return false;
  }
}

inline bool rules_are_variants(const Rule& a, const Rule& b) {
  Term as[] = {a.lhs, a.rhs};
  Term bs[] = {b.lhs, b.rhs};
  return are_variants(as, bs);
}

namespace detail {

inline unsigned max_var_index(const Trs& R) {
  unsigned m = 0;
  for (const Rule& r : R.rules()) {
    for (const Variable& v : vars(r.lhs)) m = std::max(m, v.index);
  }
  return m;
}

inline Rule renamed(const Rule& r, unsigned idx) {
  Substitution rho = reindex(vars(r.lhs), idx);
  return Rule{r.id, rho.apply(r.lhs), rho.apply(r.rhs)};
}

/// Rebuilds a peak from s, the inner choices and the root rule, with
/// canonical variables and replayable steps.
inline Peak make_peak(const Term& s_raw, const std::map<Position, int>& inner,
                      const Trs& inner_rules, const Rule& root) {
  std::map<Position, Term> repl;
  for (const auto& [p, id] : inner) {
    const Rule& r = inner_rules.rule(id);
    auto sigma = match(r.lhs, subterm_at(s_raw, p));
    repl.emplace(p, sigma->apply(r.rhs));
  }
  Term t_raw = replace_parallel(s_raw, repl);
  auto root_sigma = match(root.lhs, s_raw);
  Term u_raw = root_sigma->apply(root.rhs);
  Term raw[] = {s_raw, t_raw, u_raw};
  std::vector<Term> canon = canonicalize(raw);

  Peak pk{canon[0], canon[1], canon[2], inner, root.id, {}, {}};
  for (const auto& [p, id] : inner) {
    const Rule& r = inner_rules.rule(id);
    pk.left_steps.push_back(Step{id, p, *match(r.lhs, subterm_at(pk.source, p))});
  }
  pk.right_step = Step{root.id, Position::root(), *match(root.lhs, pk.source)};
  return pk;
}

}  // namespace detail

/// Parallel critical peaks between `inner_rules` (the ⇻ side) and
/// `root_rules` (the →_ε side). With max_positions = 1 these are the
/// ordinary critical peaks. Order: root rule id, then P in enumeration
/// order, then inner rule ids; duplicates removed after canonicalization.
inline std::vector<Peak> parallel_critical_peaks(const Trs& inner_rules,
                                                 const Trs& root_rules,
                                                 std::size_t max_positions = SIZE_MAX) {
  std::vector<Peak> out;
  std::set<Peak> seen;
  unsigned base = std::max(detail::max_var_index(inner_rules),
                           detail::max_var_index(root_rules)) + 1;
  for (const Rule& root : root_rules.rules()) {
    std::vector<Position> fpos = function_positions(root.lhs);
    // Candidate inner rules per position, each renamed apart by position index.
    std::vector<std::vector<Rule>> cands(fpos.size());
    for (std::size_t i = 0; i < fpos.size(); ++i) {
      const Term& sub = subterm_at(root.lhs, fpos[i]);
      for (const Rule& r : inner_rules.rules()) {
        Rule rr = detail::renamed(r, base + static_cast<unsigned>(i));
        if (unify(rr.lhs, sub)) cands[i].push_back(rr);
      }
    }
    std::vector<std::size_t> chosen_pos;
    std::vector<const Rule*> chosen_rule;
    // Parallel subsets of fpos in lexicographic order of their index lists.
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
      for (std::size_t i = from; i < fpos.size(); ++i) {
        bool parallel = true;
        for (std::size_t j : chosen_pos)
          if (!fpos[j].parallel_to(fpos[i])) {
            parallel = false;
            break;
          }
        if (!parallel) continue;
        if (chosen_pos.size() >= max_positions) return;
        for (const Rule& r : cands[i]) {
          chosen_pos.push_back(i);
          chosen_rule.push_back(&r);
          std::vector<Equation> eqs;
          for (std::size_t j = 0; j < chosen_pos.size(); ++j)
            eqs.emplace_back(chosen_rule[j]->lhs,
                             subterm_at(root.lhs, fpos[chosen_pos[j]]));
          if (auto sigma = unify_equations(eqs)) {
            bool excluded = chosen_pos.size() == 1 && fpos[i].is_root() &&
                            rules_are_variants(r, root);
            if (!excluded) {
              std::map<Position, int> inner;
              for (std::size_t j = 0; j < chosen_pos.size(); ++j)
                inner.emplace(fpos[chosen_pos[j]], chosen_rule[j]->id);
              Peak pk = detail::make_peak(sigma->apply(root.lhs), inner, inner_rules, root);
              if (seen.insert(pk).second) out.push_back(pk);
            }
            rec(i + 1);
          }
          chosen_pos.pop_back();
          chosen_rule.pop_back();
        }
      }
    };
    rec(0);
  }
  return out;
}

inline std::vector<Peak> parallel_critical_peaks(const Trs& R) {
  return parallel_critical_peaks(R, R);
}

inline std::vector<Peak> critical_peaks(const Trs& inner_rules, const Trs& root_rules) {
  return parallel_critical_peaks(inner_rules, root_rules, 1);
}

inline std::vector<Peak> critical_peaks(const Trs& R) { return critical_peaks(R, R); }

// ---------------------------------------------------------------------------
// Critical pair systems

struct Cps {
  Trs rules;
  /// For each generated rule (by position in rules.rules()), the index of
  /// the first peak that produced it.
  std::vector<std::size_t> origin;
  std::vector<Peak> peaks;
};

using ConversionOracle = std::function<bool(const Term&, const Term&)>;

/// {s -> t, s -> u} for every parallel critical peak of R whose endpoints
/// the oracle does not connect. Generated rules are numbered from 1 and
/// syntactically identical rules are kept once. With a null oracle nothing
/// is filtered, giving PCPS(R).
inline Cps pcps(const Trs& R, const ConversionOracle& connected) {
  Cps out;
  out.peaks = parallel_critical_peaks(R);
  std::vector<Rule> rules;
  std::set<std::pair<Term, Term>> seen;
  for (std::size_t i = 0; i < out.peaks.size(); ++i) {
    const Peak& pk = out.peaks[i];
    if (connected && connected(pk.left, pk.right)) continue;
    for (const Term& target : {pk.left, pk.right}) {
      Term pair[] = {pk.source, target};
      std::vector<Term> c = canonicalize(pair);
      if (!seen.emplace(c[0], c[1]).second) continue;
      rules.push_back(Rule{static_cast<int>(rules.size()) + 1, c[0], c[1]});
      out.origin.push_back(i);
    }
  }
  out.rules = Trs(std::move(rules));
  return out;
}

}  // namespace confluence
