// SPDX-License-Identifier: Apache-2.0
//
// term.hpp - First-order terms, positions, substitutions, unification.
//
// Terms are immutable and structurally shared. Equality is syntactic
// identity; a precomputed hash makes hashing and inequality checks cheap.
// Variables carry a numeric index next to their name so renamed copies
// (x_1, x_2, ...) never collide with the user's variables (index 0).

#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace confluence {

class TermError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Variable {
  std::string name;
  unsigned index = 0;

  auto operator<=>(const Variable&) const = default;
  bool operator==(const Variable&) const = default;

  std::string str() const {
    return index == 0 ? name : name + "_" + std::to_string(index);
  }
};

using VariableSet = std::set<Variable>;

inline std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

class Term {
 public:
  static Term variable(std::string name, unsigned index = 0) {
    auto node = std::make_shared<Node>();
    node->is_var = true;
    node->name = std::move(name);
    node->index = index;
    node->size = 1;
    node->hash = hash_combine(std::hash<std::string>{}(node->name),
                              0x51ed27 + index);
    return Term(std::move(node));
  }
  static Term variable(const Variable& v) { return variable(v.name, v.index); }

  static Term apply(std::string symbol, std::vector<Term> args = {}) {
    auto node = std::make_shared<Node>();
    node->is_var = false;
    node->name = std::move(symbol);
    node->size = 1;
    std::size_t h = hash_combine(std::hash<std::string>{}(node->name),
                                 args.size());
    for (const Term& a : args) {
      node->size += a.size();
      h = hash_combine(h, a.hash());
    }
    node->hash = h;
    node->args = std::move(args);
    return Term(std::move(node));
  }

  bool is_variable() const { return node_->is_var; }
  Variable as_variable() const {
    if (!is_variable()) throw TermError("term " + str() + " is not a variable");
    return Variable{node_->name, node_->index};
  }
  /// Function symbol of an application, or the name of a variable.
  const std::string& symbol() const { return node_->name; }
  unsigned var_index() const { return node_->index; }
  std::size_t arity() const { return node_->args.size(); }
  const std::vector<Term>& args() const { return node_->args; }
  /// 0-based argument access.
  const Term& arg(std::size_t i) const { return node_->args.at(i); }
  std::size_t hash() const { return node_->hash; }
  /// Number of symbol and variable occurrences.
  std::size_t size() const { return node_->size; }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->hash != b.node_->hash || a.node_->size != b.node_->size)
      return false;
    if (a.node_->is_var != b.node_->is_var || a.node_->name != b.node_->name ||
        a.node_->index != b.node_->index ||
        a.node_->args.size() != b.node_->args.size())
      return false;
    for (std::size_t i = 0; i < a.node_->args.size(); ++i)
      if (!(a.node_->args[i] == b.node_->args[i])) return false;
    return true;
  }

  // Structural total order: variables before applications, then by name,
  // index, arity and arguments left to right.
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    if (a.is_variable() != b.is_variable())
      return a.is_variable() ? std::strong_ordering::less
                             : std::strong_ordering::greater;
    if (auto c = a.node_->name <=> b.node_->name; c != 0) return c;
    if (auto c = a.node_->index <=> b.node_->index; c != 0) return c;
    if (auto c = a.arity() <=> b.arity(); c != 0) return c;
    for (std::size_t i = 0; i < a.arity(); ++i)
      if (auto c = a.arg(i) <=> b.arg(i); c != 0) return c;
    return std::strong_ordering::equal;
  }

  std::string str() const {
    if (is_variable()) return as_variable().str();
    std::string out = node_->name;
    if (!node_->args.empty()) {
      out += '(';
      for (std::size_t i = 0; i < node_->args.size(); ++i) {
        if (i) out += ',';
        out += node_->args[i].str();
      }
      out += ')';
    }
    return out;
  }

 private:
  struct Node {
    bool is_var = false;
    std::string name;
    unsigned index = 0;
    std::vector<Term> args;
    std::size_t hash = 0;
    std::size_t size = 1;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

// ---------------------------------------------------------------------------
// Positions

class Position {
 public:
  Position() = default;
  explicit Position(std::vector<unsigned> path) : path_(std::move(path)) {
    for (unsigned i : path_)
      if (i == 0) throw TermError("positions are sequences of positive integers");
  }
  static Position root() { return Position(); }

  bool is_root() const { return path_.empty(); }
  std::size_t depth() const { return path_.size(); }
  const std::vector<unsigned>& path() const { return path_; }

  /// Position extended by the 1-based argument index `i`.
  Position child(unsigned i) const {
    Position p = *this;
    p.path_.push_back(i);
    return p;
  }
  Position concat(const Position& q) const {
    Position p = *this;
    p.path_.insert(p.path_.end(), q.path_.begin(), q.path_.end());
    return p;
  }
  /// Prefix order p <= q.
  bool prefix_of(const Position& q) const {
    return path_.size() <= q.path_.size() &&
           std::equal(path_.begin(), path_.end(), q.path_.begin());
  }
  bool parallel_to(const Position& q) const {
    return !prefix_of(q) && !q.prefix_of(*this);
  }

  auto operator<=>(const Position&) const = default;
  bool operator==(const Position&) const = default;

  std::string str() const {
    if (path_.empty()) return "ε";
    std::string out;
    for (std::size_t i = 0; i < path_.size(); ++i) {
      if (i) out += '.';
      out += std::to_string(path_[i]);
    }
    return out;
  }

 private:
  std::vector<unsigned> path_;
};

using PositionSet = std::set<Position>;

inline bool is_parallel_set(const PositionSet& ps) {
  for (auto i = ps.begin(); i != ps.end(); ++i)
    for (auto j = std::next(i); j != ps.end(); ++j)
      if (!i->parallel_to(*j)) return false;
  return true;
}

inline std::string to_string(const PositionSet& ps) {
  std::string out = "{";
  bool first = true;
  for (const Position& p : ps) {
    if (!first) out += ',';
    first = false;
    out += p.str();
  }
  return out + "}";
}

inline bool is_position_of(const Term& t, const Position& p) {
  const Term* cur = &t;
  for (unsigned i : p.path()) {
    if (i == 0 || i > cur->arity()) return false;
    cur = &cur->arg(i - 1);
  }
  return true;
}

inline const Term& subterm_at(const Term& t, const Position& p) {
  const Term* cur = &t;
  for (unsigned i : p.path()) {
    if (i == 0 || i > cur->arity())
      throw TermError("position " + p.str() + " is not a position of " +
                      t.str());
    cur = &cur->arg(i - 1);
  }
  return *cur;
}

namespace detail {
inline Term replace_rec(const Term& t, const std::vector<unsigned>& path,
                        std::size_t depth, const Term& u) {
  if (depth == path.size()) return u;
  unsigned i = path[depth];
  std::vector<Term> args = t.args();
  args[i - 1] = replace_rec(args[i - 1], path, depth + 1, u);
  return Term::apply(t.symbol(), std::move(args));
}
}  // namespace detail

/// t[u]_p
inline Term replace_at(const Term& t, const Position& p, const Term& u) {
  if (!is_position_of(t, p))
    throw TermError("position " + p.str() + " is not a position of " + t.str());
  return detail::replace_rec(t, p.path(), 0, u);
}

/// t[u_p]_{p in P}; the keys must be parallel positions of t.
inline Term replace_parallel(const Term& t,
                             const std::map<Position, Term>& bindings) {
  PositionSet keys;
  for (const auto& [p, _] : bindings) {
    if (!is_position_of(t, p))
      throw TermError("position " + p.str() + " is not a position of " +
                      t.str());
    keys.insert(p);
  }
  if (!is_parallel_set(keys))
    throw TermError("replacement positions " + to_string(keys) +
                    " are not parallel");
  Term out = t;
  for (const auto& [p, u] : bindings) out = detail::replace_rec(out, p.path(), 0, u);
  return out;
}

/// All positions of t in pre-order, which coincides with lexicographic order.
inline std::vector<Position> positions(const Term& t) {
  std::vector<Position> out;
  std::function<void(const Term&, Position)> walk = [&](const Term& s,
                                                          Position p) {
    out.push_back(p);
    for (unsigned i = 0; i < s.arity(); ++i) walk(s.arg(i), p.child(i + 1));
  };
  walk(t, Position::root());
  return out;
}

inline std::vector<Position> function_positions(const Term& t) {
  std::vector<Position> out;
  for (const Position& p : positions(t))
    if (!subterm_at(t, p).is_variable()) out.push_back(p);
  return out;
}

inline void collect_vars(const Term& t, VariableSet& out) {
  if (t.is_variable()) {
    out.insert(t.as_variable());
    return;
  }
  for (const Term& a : t.args()) collect_vars(a, out);
}

inline VariableSet vars(const Term& t) {
  VariableSet out;
  collect_vars(t, out);
  return out;
}

/// Var(t, P): union of the variables below each position of P.
inline VariableSet vars_at(const Term& t, const PositionSet& ps) {
  if (!is_parallel_set(ps))
    throw TermError("position set " + to_string(ps) + " is not parallel");
  VariableSet out;
  for (const Position& p : ps) collect_vars(subterm_at(t, p), out);
  return out;
}

/// Variables in order of first occurrence (left to right).
inline void vars_in_order(const Term& t, std::vector<Variable>& out) {
  if (t.is_variable()) {
    Variable v = t.as_variable();
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return;
  }
  for (const Term& a : t.args()) vars_in_order(a, out);
}

inline void collect_symbols(const Term& t, std::set<std::string>& out) {
  if (t.is_variable()) return;
  out.insert(t.symbol());
  for (const Term& a : t.args()) collect_symbols(a, out);
}

inline std::set<std::string> fun_symbols(const Term& t) {
  std::set<std::string> out;
  collect_symbols(t, out);
  return out;
}

inline bool is_linear(const Term& t) {
  std::vector<Variable> seen;
  std::function<bool(const Term&)> walk = [&](const Term& s) {
    if (s.is_variable()) {
      Variable v = s.as_variable();
      if (std::find(seen.begin(), seen.end(), v) != seen.end()) return false;
      seen.push_back(v);
      return true;
    }
    for (const Term& a : s.args())
      if (!walk(a)) return false;
    return true;
  };
  return walk(t);
}

inline bool occurs_in(const Variable& v, const Term& t) {
  if (t.is_variable()) return t.symbol() == v.name && t.var_index() == v.index;
  for (const Term& a : t.args())
    if (occurs_in(v, a)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Substitutions

class Substitution {
 public:
  Substitution() = default;
  Substitution(std::initializer_list<std::pair<const Variable, Term>> init) {
    for (const auto& [v, t] : init) bind(v, t);
  }

  /// Adds x -> t. Identity bindings are dropped so the domain stays
  /// { x | x sigma != x }.
  void bind(const Variable& x, const Term& t) {
    if (t.is_variable() && t.as_variable() == x) {
      map_.erase(x);
      return;
    }
    map_.insert_or_assign(x, t);
  }

  const Term* find(const Variable& x) const {
    auto it = map_.find(x);
    return it == map_.end() ? nullptr : &it->second;
  }

  Term apply(const Term& t) const {
    if (map_.empty()) return t;
    if (t.is_variable()) {
      if (const Term* u = find(t.as_variable())) return *u;
      return t;
    }
    if (t.arity() == 0) return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    bool changed = false;
    for (const Term& a : t.args()) {
      args.push_back(apply(a));
      changed = changed || !(args.back() == a);
    }
    return changed ? Term::apply(t.symbol(), std::move(args)) : t;
  }
  Term operator()(const Term& t) const { return apply(t); }

  /// (this ; other)(x) = other(this(x))
  Substitution then(const Substitution& other) const {
    Substitution out;
    for (const auto& [v, t] : map_) out.bind(v, other.apply(t));
    for (const auto& [v, t] : other.map_)
      if (!map_.contains(v)) out.bind(v, t);
    return out;
  }

  VariableSet domain() const {
    VariableSet out;
    for (const auto& [v, _] : map_) out.insert(v);
    return out;
  }
  bool empty() const { return map_.empty(); }
  std::size_t size() const { return map_.size(); }
  auto begin() const { return map_.begin(); }
  auto end() const { return map_.end(); }

  bool operator==(const Substitution& o) const {
    if (map_.size() != o.map_.size()) return false;
    for (const auto& [v, t] : map_) {
      const Term* u = o.find(v);
      if (!u || !(*u == t)) return false;
    }
    return true;
  }

  std::string str() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [v, t] : map_) {
      if (!first) out += ", ";
      first = false;
      out += v.str() + " ↦ " + t.str();
    }
    return out + "}";
  }

 private:
  std::map<Variable, Term> map_;
};

using Equation = std::pair<Term, Term>;

/// Most general unifier of a set of equations (Martelli-Montanari). The
/// result is idempotent and binds only variables occurring in the equations.
inline std::optional<Substitution> unify_equations(std::span<const Equation> eqs) {
  std::vector<Equation> work(eqs.rbegin(), eqs.rend());
  Substitution sigma;
  while (!work.empty()) {
    auto [s0, t0] = work.back();
    work.pop_back();
    Term s = sigma.apply(s0);
    Term t = sigma.apply(t0);
    if (s == t) continue;
    if (!s.is_variable() && t.is_variable()) std::swap(s, t);
    if (s.is_variable()) {
      Variable x = s.as_variable();
      if (occurs_in(x, t)) return std::nullopt;
      Substitution elim;
      elim.bind(x, t);
      sigma = sigma.then(elim);
      sigma.bind(x, t);
      continue;
    }
    if (s.symbol() != t.symbol() || s.arity() != t.arity()) return std::nullopt;
    for (std::size_t i = s.arity(); i-- > 0;) work.emplace_back(s.arg(i), t.arg(i));
  }
  return sigma;
}

inline std::optional<Substitution> unify(const Term& s, const Term& t) {
  Equation e{s, t};
  return unify_equations(std::span<const Equation>(&e, 1));
}

/// sigma with pattern sigma = subject, extending `base`.
inline std::optional<Substitution> match(const Term& pattern, const Term& subject,
                                         const Substitution& base = {}) {
  // Identity bindings are kept here; Substitution drops them.
  std::map<Variable, Term> bound(base.begin(), base.end());
  std::vector<std::pair<Term, Term>> work{{pattern, subject}};
  while (!work.empty()) {
    auto [p, s] = work.back();
    work.pop_back();
    if (p.is_variable()) {
      auto [it, fresh] = bound.emplace(p.as_variable(), s);
      if (!fresh && !(it->second == s)) return std::nullopt;
      continue;
    }
    if (s.is_variable() || p.symbol() != s.symbol() || p.arity() != s.arity())
      return std::nullopt;
    for (std::size_t i = p.arity(); i-- > 0;) work.emplace_back(p.arg(i), s.arg(i));
  }
  Substitution out;
  for (const auto& [v, t] : bound) out.bind(v, t);
  return out;
}

/// Renaming rho with a rho = b (bijective on variables), if a and b are
/// variants. Checked jointly over the given lists.
inline bool are_variants(std::span<const Term> as, std::span<const Term> bs) {
  if (as.size() != bs.size()) return false;
  std::map<Variable, Variable> fwd, bwd;
  std::function<bool(const Term&, const Term&)> walk = [&](const Term& a,
                                                           const Term& b) {
    if (a.is_variable() != b.is_variable()) return false;
    if (a.is_variable()) {
      Variable x = a.as_variable(), y = b.as_variable();
      auto [i, fresh_f] = fwd.emplace(x, y);
      auto [j, fresh_b] = bwd.emplace(y, x);
      return i->second == y && j->second == x;
    }
    if (a.symbol() != b.symbol() || a.arity() != b.arity()) return false;
    for (std::size_t k = 0; k < a.arity(); ++k)
      if (!walk(a.arg(k), b.arg(k))) return false;
    return true;
  };
  for (std::size_t i = 0; i < as.size(); ++i)
    if (!walk(as[i], bs[i])) return false;
  return true;
}

inline bool are_variants(const Term& a, const Term& b) {
  return are_variants(std::span<const Term>(&a, 1), std::span<const Term>(&b, 1));
}

/// Renames the variables of the given terms jointly, in order of first
/// occurrence, to x, y, z, w, v, u, x_1, y_1, ... Variants map to identical
/// results.
inline Substitution canonical_renaming(std::span<const Term> ts) {
  static const char* names[] = {"x", "y", "z", "w", "v", "u"};
  std::vector<Variable> order;
  for (const Term& t : ts) vars_in_order(t, order);
  Substitution rho;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Variable target{names[i % 6], static_cast<unsigned>(i / 6)};
    rho.bind(order[i], Term::variable(target));
  }
  return rho;
}

inline std::vector<Term> canonicalize(std::span<const Term> ts) {
  Substitution rho = canonical_renaming(ts);
  std::vector<Term> out;
  out.reserve(ts.size());
  for (const Term& t : ts) out.push_back(rho.apply(t));
  return out;
}

/// Source of fresh variable indices; scoped to one computation.
class FreshIndex {
 public:
  explicit FreshIndex(unsigned next = 1) : next_(next) {}
  unsigned next() { return next_++; }
  /// Ensures future indices exceed every index used in `vs`.
  void avoid(const VariableSet& vs) {
    for (const Variable& v : vs) next_ = std::max(next_, v.index + 1);
  }

 private:
  unsigned next_;
};

/// Renames every variable of the terms to index `idx` (same names).
inline Substitution reindex(const VariableSet& vs, unsigned idx) {
  Substitution rho;
  for (const Variable& v : vs) rho.bind(v, Term::variable(v.name, idx));
  return rho;
}

}  // namespace confluence

template <>
struct std::hash<confluence::Term> {
  std::size_t operator()(const confluence::Term& t) const { return t.hash(); }
};
