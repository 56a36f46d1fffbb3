// SPDX-License-Identifier: Apache-2.0
//
// sat.hpp - CNF formulas, a CDCL solver, and a small circuit builder.
//
// Literals are nonzero ints in DIMACS convention: v or -v for variable v.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace confluence::sat {

using Lit = int;
using Clause = std::vector<Lit>;

class Cnf {
 public:
  int new_var() { return ++num_vars_; }
  int num_vars() const { return num_vars_; }
  void reserve_vars(int n) { num_vars_ = std::max(num_vars_, n); }

  void add(Clause c) {
    for (Lit l : c) {
      if (l == 0) throw std::invalid_argument("literal 0 in clause");
      num_vars_ = std::max(num_vars_, std::abs(l));
    }
    clauses_.push_back(std::move(c));
  }
  void add_unit(Lit l) { add({l}); }

  const std::vector<Clause>& clauses() const { return clauses_; }
  std::size_t num_clauses() const { return clauses_.size(); }

 private:
  int num_vars_ = 0;
  std::vector<Clause> clauses_;
};

/// Model: value of variable v at index v (index 0 unused).
using Model = std::vector<bool>;

inline bool lit_true(const Model& m, Lit l) {
  bool v = m.at(static_cast<std::size_t>(std::abs(l)));
  return l > 0 ? v : !v;
}

inline bool satisfies(const Model& m, const Cnf& f) {
  if (m.size() < static_cast<std::size_t>(f.num_vars()) + 1) return false;
  for (const Clause& c : f.clauses()) {
    bool sat = false;
    for (Lit l : c)
      if (lit_true(m, l)) {
        sat = true;
        break;
      }
    if (!sat) return false;
  }
  return true;
}

inline std::string to_dimacs(const Cnf& f) {
  std::string out = "p cnf " + std::to_string(f.num_vars()) + " " +
                    std::to_string(f.num_clauses()) + "\n";
  for (const Clause& c : f.clauses()) {
    for (Lit l : c) out += std::to_string(l) + " ";
    out += "0\n";
  }
  return out;
}

/// Parses DIMACS CNF (comments allowed). Throws std::invalid_argument.
inline Cnf parse_dimacs(const std::string& text) {
  Cnf f;
  std::size_t i = 0;
  bool header = false;
  int declared = 0;
  Clause cur;
  auto skip_line = [&] {
    while (i < text.size() && text[i] != '\n') ++i;
  };
  while (i < text.size()) {
    char ch = text[i];
    if (ch == 'c' || ch == '%') {
      skip_line();
      continue;
    }
    if (ch == 'p') {
      std::size_t end = text.find('\n', i);
      std::string line = text.substr(i, end == std::string::npos ? end : end - i);
      int v = 0, c = 0;
      if (std::sscanf(line.c_str(), "p cnf %d %d", &v, &c) != 2)
        throw std::invalid_argument("bad DIMACS header: " + line);
      declared = v;
      header = true;
      i = end == std::string::npos ? text.size() : end;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    std::size_t used = 0;
    int lit = std::stoi(text.substr(i, 16), &used);
    i += used;
    if (header && std::abs(lit) > declared)
      throw std::invalid_argument("DIMACS literal " + std::to_string(lit) + " exceeds header");
    if (lit == 0) {
      f.add(cur);
      cur.clear();
    } else {
      cur.push_back(lit);
    }
  }
  if (!cur.empty()) throw std::invalid_argument("unterminated DIMACS clause");
  f.reserve_vars(declared);
  return f;
}

// ---------------------------------------------------------------------------
// CDCL solver: two watched literals, first-UIP learning, activity-based
// decisions, geometric restarts. Complete; no clause deletion.

class Solver {
 public:
  explicit Solver(const Cnf& f) : n_(f.num_vars()) {
    assign_.assign(n_ + 1, kUnset);
    level_.assign(n_ + 1, 0);
    reason_.assign(n_ + 1, -1);
    activity_.assign(n_ + 1, 0.0);
    phase_.assign(n_ + 1, false);
    watches_.assign(2 * (n_ + 1), {});
    for (const Clause& c : f.clauses()) add_clause(c);
  }

  /// true = SAT (model available), false = UNSAT.
  bool solve() {
    if (conflict_at_root_) return false;
    if (propagate() >= 0) return false;
    double restart_limit = 100;
    std::size_t conflicts = 0;
    while (true) {
      int confl = propagate();
      if (confl >= 0) {
        ++conflicts;
        if (decision_level() == 0) return false;
        auto [learnt, back] = analyze(confl);
        backtrack(back);
        if (learnt.size() == 1) {
          enqueue(learnt[0], -1);
        } else {
          int idx = store(learnt);
          enqueue(learnt[0], idx);
        }
        decay();
        continue;
      }
      if (conflicts >= restart_limit) {
        restart_limit *= 1.5;
        conflicts = 0;
        backtrack(0);
        continue;
      }
      int v = pick();
      if (v == 0) return true;
      trail_lim_.push_back(trail_.size());
      enqueue(phase_[v] ? v : -v, -1);
    }
  }

  Model model() const {
    Model m(n_ + 1, false);
    for (int v = 1; v <= n_; ++v) m[v] = assign_[v] == kTrue;
    return m;
  }

 private:
  static constexpr int8_t kUnset = 0, kTrue = 1, kFalse = -1;

  static std::size_t widx(Lit l) {
    return 2 * static_cast<std::size_t>(std::abs(l)) + (l < 0 ? 1 : 0);
  }
  int8_t value(Lit l) const {
    int8_t a = assign_[std::abs(l)];
    return l > 0 ? a : static_cast<int8_t>(-a);
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void add_clause(Clause c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j)
        if (c[i] == -c[j]) return;  // tautology
    if (c.empty()) {
      conflict_at_root_ = true;
      return;
    }
    if (c.size() == 1) {
      int8_t v = value(c[0]);
      if (v == kFalse) conflict_at_root_ = true;
      else if (v == kUnset) enqueue(c[0], -1);
      return;
    }
    store(c);
  }

  int store(const Clause& c) {
    int idx = static_cast<int>(clauses_.size());
    clauses_.push_back(c);
    watches_[widx(-c[0])].push_back(idx);
    watches_[widx(-c[1])].push_back(idx);
    return idx;
  }

  void enqueue(Lit l, int reason) {
    int v = std::abs(l);
    assign_[v] = l > 0 ? kTrue : kFalse;
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(l);
  }

  // Returns index of a conflicting clause or -1.
  int propagate() {
    while (qhead_ < trail_.size()) {
      Lit p = trail_[qhead_++];
      std::vector<int>& ws = watches_[widx(p)];
      std::size_t keep = 0;
      for (std::size_t i = 0; i < ws.size(); ++i) {
        int ci = ws[i];
        Clause& c = clauses_[ci];
        if (c[0] == -p) std::swap(c[0], c[1]);
        if (value(c[0]) == kTrue) {
          ws[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < c.size(); ++k) {
          if (value(c[k]) != kFalse) {
            std::swap(c[1], c[k]);
            watches_[widx(-c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[keep++] = ci;
        if (value(c[0]) == kFalse) {
          for (std::size_t j = i + 1; j < ws.size(); ++j) ws[keep++] = ws[j];
          ws.resize(keep);
          qhead_ = trail_.size();
          return ci;
        }
        enqueue(c[0], ci);
      }
      ws.resize(keep);
    }
    return -1;
  }

  std::pair<Clause, int> analyze(int confl) {
    std::vector<bool> seen(n_ + 1, false);
    Clause learnt{0};
    int pending = 0;
    Lit p = 0;
    std::size_t idx = trail_.size();
    int ci = confl;
    do {
      const Clause& c = clauses_[ci];
      for (std::size_t k = (p == 0 ? 0 : 1); k < c.size(); ++k) {
        Lit q = c[k];
        int v = std::abs(q);
        if (seen[v] || level_[v] == 0) continue;
        seen[v] = true;
        bump(v);
        if (level_[v] == decision_level()) ++pending;
        else learnt.push_back(q);
      }
      do {
        p = trail_[--idx];
      } while (!seen[std::abs(p)]);
      ci = reason_[std::abs(p)];
      seen[std::abs(p)] = false;
      --pending;
    } while (pending > 0);
    learnt[0] = -p;
    int back = 0;
    if (learnt.size() > 1) {
      std::size_t best = 1;
      for (std::size_t k = 2; k < learnt.size(); ++k)
        if (level_[std::abs(learnt[k])] > level_[std::abs(learnt[best])]) best = k;
      std::swap(learnt[1], learnt[best]);
      back = level_[std::abs(learnt[1])];
    }
    return {learnt, back};
  }

  void backtrack(int lvl) {
    if (decision_level() <= lvl) return;
    std::size_t lim = trail_lim_[lvl];
    for (std::size_t i = trail_.size(); i-- > lim;) {
      int v = std::abs(trail_[i]);
      phase_[v] = assign_[v] == kTrue;
      assign_[v] = kUnset;
      reason_[v] = -1;
    }
    trail_.resize(lim);
    trail_lim_.resize(lvl);
    qhead_ = lim;
  }

  int pick() const {
    int best = 0;
    for (int v = 1; v <= n_; ++v)
      if (assign_[v] == kUnset && (best == 0 || activity_[v] > activity_[best]))
        best = v;
    return best;
  }

  void bump(int v) {
    activity_[v] += inc_;
    if (activity_[v] > 1e100) {
      for (double& a : activity_) a *= 1e-100;
      inc_ *= 1e-100;
    }
  }
  void decay() { inc_ /= 0.95; }

  int n_;
  std::vector<Clause> clauses_;
  std::vector<std::vector<int>> watches_;
  std::vector<int8_t> assign_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<double> activity_;
  std::vector<bool> phase_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  double inc_ = 1.0;
  bool conflict_at_root_ = false;
};

inline std::optional<Model> solve(const Cnf& f) {
  Solver s(f);
  if (!s.solve()) return std::nullopt;
  return s.model();
}

struct Enumeration {
  /// Distinct projections (assignments to the projection variables).
  std::vector<std::map<int, bool>> projections;
  /// True when the limit stopped enumeration before the formula became UNSAT.
  bool truncated = false;
};

/// Enumerates models projected to `projection` (all variables if empty),
/// adding a blocking clause over the projection after each model.
inline Enumeration enumerate_models(Cnf f, std::vector<int> projection,
                                    std::size_t limit) {
  if (projection.empty())
    for (int v = 1; v <= f.num_vars(); ++v) projection.push_back(v);
  Enumeration out;
  while (true) {
    auto m = solve(f);
    if (!m) return out;
    if (out.projections.size() >= limit) {
      out.truncated = true;
      return out;
    }
    std::map<int, bool> proj;
    Clause block;
    for (int v : projection) {
      bool val = v <= f.num_vars() && (*m)[v];
      proj[v] = val;
      block.push_back(val ? -v : v);
    }
    out.projections.push_back(std::move(proj));
    if (block.empty()) return out;
    f.add(std::move(block));
  }
}

// ---------------------------------------------------------------------------
// Circuit builder: Tseitin gates with constant folding over a Cnf.

class Circuit {
 public:
  explicit Circuit(Cnf& f) : f_(f) {
    true_ = f_.new_var();
    f_.add_unit(true_);
  }

  Cnf& cnf() { return f_; }
  Lit top() const { return true_; }
  Lit bottom() const { return -true_; }
  Lit constant(bool b) const { return b ? true_ : -true_; }
  bool is_const(Lit l) const { return std::abs(l) == true_; }
  Lit fresh() { return f_.new_var(); }

  Lit and_(std::vector<Lit> ls) {
    std::vector<Lit> xs;
    for (Lit l : ls) {
      if (l == bottom()) return bottom();
      if (l == top()) continue;
      xs.push_back(l);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (std::binary_search(xs.begin(), xs.end(), -xs[i])) return bottom();
    if (xs.empty()) return top();
    if (xs.size() == 1) return xs[0];
    auto key = std::make_pair('&', xs);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    Lit g = fresh();
    Clause big{g};
    for (Lit x : xs) {
      f_.add({-g, x});
      big.push_back(-x);
    }
    f_.add(big);
    cache_.emplace(key, g);
    return g;
  }
  Lit and_(Lit a, Lit b) { return and_(std::vector<Lit>{a, b}); }

  Lit or_(std::vector<Lit> ls) {
    for (Lit& l : ls) l = -l;
    return -and_(std::move(ls));
  }
  Lit or_(Lit a, Lit b) { return or_(std::vector<Lit>{a, b}); }

  Lit implies(Lit a, Lit b) { return or_(-a, b); }

  Lit xor_(Lit a, Lit b) {
    if (is_const(a)) return a == top() ? -b : b;
    if (is_const(b)) return b == top() ? -a : a;
    if (a == b) return bottom();
    if (a == -b) return top();
    Lit g = fresh();
    f_.add({-g, a, b});
    f_.add({-g, -a, -b});
    f_.add({g, -a, b});
    f_.add({g, a, -b});
    return g;
  }
  Lit iff(Lit a, Lit b) { return -xor_(a, b); }

  Lit ite(Lit c, Lit t, Lit e) { return or_(and_(c, t), and_(-c, e)); }

  void assert_(Lit l) { f_.add_unit(l); }

  // Unsigned bit vectors, least significant bit first.
  using Bits = std::vector<Lit>;

  Bits constant_bits(unsigned long long v) {
    Bits b;
    while (v) {
      b.push_back(constant(v & 1));
      v >>= 1;
    }
    return b;
  }

  Bits add(const Bits& a, const Bits& b) {
    Bits out;
    Lit carry = bottom();
    std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
      Lit x = i < a.size() ? a[i] : bottom();
      Lit y = i < b.size() ? b[i] : bottom();
      out.push_back(xor_(xor_(x, y), carry));
      carry = or_({and_(x, y), and_(x, carry), and_(y, carry)});
    }
    if (carry != bottom()) out.push_back(carry);
    return trim(out);
  }

  Bits mul(const Bits& a, const Bits& b) {
    Bits acc;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i] == bottom()) continue;
      Bits row(i, bottom());
      for (Lit x : a) row.push_back(and_(x, b[i]));
      acc = add(acc, row);
    }
    return trim(acc);
  }

  /// a >= b
  Lit geq(const Bits& a, const Bits& b) { return -gt(b, a); }

  /// a > b
  Lit gt(const Bits& a, const Bits& b) {
    std::size_t n = std::max(a.size(), b.size());
    Lit result = bottom();  // a > b on the bits seen so far (from LSB)
    for (std::size_t i = 0; i < n; ++i) {
      Lit x = i < a.size() ? a[i] : bottom();
      Lit y = i < b.size() ? b[i] : bottom();
      // Higher bit decides; equal bits defer to the lower ones.
      result = or_(and_(x, -y), and_(iff(x, y), result));
    }
    return result;
  }

  Lit eq(const Bits& a, const Bits& b) {
    std::size_t n = std::max(a.size(), b.size());
    std::vector<Lit> parts;
    for (std::size_t i = 0; i < n; ++i)
      parts.push_back(iff(i < a.size() ? a[i] : bottom(),
                          i < b.size() ? b[i] : bottom()));
    return and_(parts);
  }

  static unsigned long long eval(const Bits& b, const Model& m) {
    unsigned long long v = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
      if (lit_true(m, b[i])) v |= 1ULL << i;
    return v;
  }

 private:
  Bits trim(Bits b) const {
    while (!b.empty() && b.back() == bottom()) b.pop_back();
    return b;
  }

  Cnf& f_;
  Lit true_;
  std::map<std::pair<char, std::vector<Lit>>, Lit> cache_;
};

}  // namespace confluence::sat
