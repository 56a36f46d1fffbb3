// SPDX-License-Identifier: Apache-2.0
//
// trs.hpp - Rewrite rules, term rewrite systems, the COPS text format,
// single and parallel rewrite steps, and bounded reachability.

#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <tuple>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "confluence/term.hpp"

namespace confluence {

struct Rule {
  int id = 0;
  Term lhs;
  Term rhs;

  std::string str() const { return lhs.str() + " -> " + rhs.str(); }
};

/// A set of rule ids; subsystems of a TRS are identified by their ids.
using RuleSet = std::set<int>;

inline std::string to_string(const RuleSet& rs) {
  std::string out = "{";
  bool first = true;
  for (int i : rs) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(i);
  }
  return out + "}";
}

class Trs {
 public:
  Trs() = default;

  /// Validates the rule invariants and the signature. Ids must be unique.
  explicit Trs(std::vector<Rule> rules) : rules_(std::move(rules)) {
    std::set<int> ids;
    for (const Rule& r : rules_) {
      if (!ids.insert(r.id).second)
        throw std::invalid_argument("duplicate rule id " + std::to_string(r.id));
      if (r.lhs.is_variable())
        throw std::invalid_argument("rule " + r.str() + " has a variable lhs");
      VariableSet lv = vars(r.lhs);
      for (const Variable& v : vars(r.rhs))
        if (!lv.contains(v))
          throw std::invalid_argument("rule " + r.str() +
                                      " has an extra variable in its rhs");
      note_signature(r.lhs);
      note_signature(r.rhs);
    }
  }

  /// Rules numbered 1..n in the given order.
  static Trs numbered(const std::vector<std::pair<Term, Term>>& rules) {
    std::vector<Rule> rs;
    int id = 1;
    for (const auto& [l, r] : rules) rs.push_back(Rule{id++, l, r});
    return Trs(std::move(rs));
  }

  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  const std::map<std::string, std::size_t>& signature() const { return signature_; }

  const Rule& rule(int id) const {
    for (const Rule& r : rules_)
      if (r.id == id) return r;
    throw std::out_of_range("no rule with id " + std::to_string(id));
  }
  bool has_rule(int id) const {
    for (const Rule& r : rules_)
      if (r.id == id) return true;
    return false;
  }

  RuleSet ids() const {
    RuleSet out;
    for (const Rule& r : rules_) out.insert(r.id);
    return out;
  }

  /// The subsystem with the given ids; ids keep their values.
  Trs subsystem(const RuleSet& ids) const {
    std::vector<Rule> rs;
    for (const Rule& r : rules_)
      if (ids.contains(r.id)) rs.push_back(r);
    for (int id : ids)
      if (!has_rule(id))
        throw std::out_of_range("no rule with id " + std::to_string(id));
    return Trs(std::move(rs));
  }

  std::string str() const {
    std::string out;
    for (const Rule& r : rules_)
      out += std::to_string(r.id) + ": " + r.str() + "\n";
    return out;
  }

 private:
  void note_signature(const Term& t) {
    if (t.is_variable()) return;
    auto [it, fresh] = signature_.emplace(t.symbol(), t.arity());
    if (!fresh && it->second != t.arity())
      throw std::invalid_argument("symbol " + t.symbol() +
                                  " used with arities " +
                                  std::to_string(it->second) + " and " +
                                  std::to_string(t.arity()));
    for (const Term& a : t.args()) note_signature(a);
  }

  std::vector<Rule> rules_;
  std::map<std::string, std::size_t> signature_;
};

inline bool is_left_linear(const Trs& R) {
  for (const Rule& r : R.rules())
    if (!is_linear(r.lhs)) return false;
  return true;
}

inline std::set<std::string> fun_symbols(const Rule& r) {
  std::set<std::string> out = fun_symbols(r.lhs);
  collect_symbols(r.rhs, out);
  return out;
}

/// R|C: rules of R whose lhs symbols all occur in Fun(C).
inline RuleSet restriction(const Trs& R, const RuleSet& C) {
  std::set<std::string> fc;
  for (int id : C) {
    const Rule& r = R.rule(id);
    collect_symbols(r.lhs, fc);
    collect_symbols(r.rhs, fc);
  }
  RuleSet out;
  for (const Rule& r : R.rules()) {
    bool inside = true;
    for (const std::string& f : fun_symbols(r.lhs))
      if (!fc.contains(f)) {
        inside = false;
        break;
      }
    if (inside) out.insert(r.id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// COPS format

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, ArityConflict, VariableLhs, ExtraRhsVariable, Unsupported };

  ParseError(Kind kind, std::size_t line, std::size_t column, const std::string& msg)
      : std::runtime_error(format(kind, line, column, msg)),
        kind_(kind),
        line_(line),
        column_(column) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(Kind kind, std::size_t line, std::size_t col,
                            const std::string& msg) {
    static const char* names[] = {"syntax error", "arity conflict",
                                  "variable lhs", "extra variable in rhs",
                                  "unsupported feature"};
    return std::to_string(line) + ":" + std::to_string(col) + ": " +
           names[static_cast<int>(kind)] + ": " + msg;
  }
  Kind kind_;
  std::size_t line_, column_;
};

namespace detail {

class CopsParser {
 public:
  explicit CopsParser(std::string_view text) : text_(text) {}

  Trs parse() {
    std::vector<std::pair<std::pair<Term, Term>, std::pair<std::size_t, std::size_t>>> rules;
    skip_ws();
    while (pos_ < text_.size()) {
      expect('(');
      auto [kw, kl, kc] = word();
      if (kw == "VAR") {
        while (true) {
          skip_ws();
          if (peek() == ')') break;
          auto [v, vl, vc] = word();
          if (v.empty()) fail(ParseError::Kind::Syntax, vl, vc, "expected variable name");
          vars_.insert(v);
        }
        expect(')');
      } else if (kw == "RULES") {
        while (true) {
          skip_ws();
          if (peek() == ')') break;
          std::size_t line = line_, col = col_;
          Term l = term();
          skip_ws();
          auto [arrow, al, ac] = word();
          if (arrow == "->=")
            fail(ParseError::Kind::Unsupported, al, ac, "relative rules are not supported");
          if (arrow != "->")
            fail(ParseError::Kind::Syntax, al, ac,
                 "expected '->' but found '" + arrow + "'");
          Term r = term();
          skip_ws();
          if (peek() == '|' || text_.substr(pos_, 2) == "==")
            fail(ParseError::Kind::Unsupported, line_, col_,
                 "conditional rules are not supported");
          rules.push_back({{l, r}, {line, col}});
        }
        expect(')');
      } else if (kw == "COMMENT") {
        skip_balanced();
      } else if (kw == "THEORY" || kw == "STRATEGY" || kw == "CONDITIONTYPE" ||
                 kw == "SIG" || kw == "FUN" || kw == "FORMAT") {
        fail(ParseError::Kind::Unsupported, kl, kc, "section (" + kw + " ...)");
      } else {
        fail(ParseError::Kind::Syntax, kl, kc, "unknown section '" + kw + "'");
      }
      skip_ws();
    }

    std::vector<Rule> out;
    int id = 1;
    for (const auto& [lr, where] : rules) {
      const auto& [l, r] = lr;
      if (l.is_variable())
        fail(ParseError::Kind::VariableLhs, where.first, where.second,
             "lhs of " + l.str() + " -> " + r.str() + " is a variable");
      VariableSet lv = vars(l);
      for (const Variable& v : vars(r))
        if (!lv.contains(v))
          fail(ParseError::Kind::ExtraRhsVariable, where.first, where.second,
               "variable " + v.str() + " of the rhs does not occur in the lhs of " +
                   l.str() + " -> " + r.str());
      out.push_back(Rule{id++, l, r});
    }
    return Trs(std::move(out));
  }

  Term term() {
    skip_ws();
    auto [name, line, col] = word();
    if (name.empty())
      fail(ParseError::Kind::Syntax, line, col, "expected a term");
    skip_ws();
    std::vector<Term> args;
    bool has_parens = peek() == '(';
    if (has_parens) {
      expect('(');
      skip_ws();
      if (peek() != ')') {
        while (true) {
          args.push_back(term());
          skip_ws();
          if (peek() == ',') {
            ++pos_;
            ++col_;
            continue;
          }
          break;
        }
      }
      expect(')');
    }
    if (vars_.contains(name)) {
      if (has_parens)
        fail(ParseError::Kind::Syntax, line, col,
             "variable " + name + " applied to arguments");
      return Term::variable(name);
    }
    auto [it, fresh] = arity_.emplace(name, args.size());
    if (!fresh && it->second != args.size())
      fail(ParseError::Kind::ArityConflict, line, col,
           "symbol " + name + " used with arities " + std::to_string(it->second) +
               " and " + std::to_string(args.size()));
    return Term::apply(name, std::move(args));
  }

  std::set<std::string> vars_;

 private:
  [[noreturn]] void fail(ParseError::Kind k, std::size_t line, std::size_t col,
                         const std::string& msg) const {
    throw ParseError(k, line, col, msg);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(text_[pos_]) & 0xC0) != 0x80) {
      ++col_;  // count code points, not UTF-8 continuation bytes
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      advance();
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) {
      std::string found = pos_ < text_.size() ? std::string(1, peek()) : "end of input";
      fail(ParseError::Kind::Syntax, line_, col_,
           std::string("expected '") + c + "' but found '" + found + "'");
    }
    advance();
  }

  static bool delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' ||
           c == ',';
  }

  std::tuple<std::string, std::size_t, std::size_t> word() {
    skip_ws();
    std::size_t line = line_, col = col_;
    std::size_t start = pos_;
    while (pos_ < text_.size() && !delimiter(text_[pos_])) {
      // "->" ends an identifier written without surrounding blanks.
      if (pos_ > start && text_.substr(pos_, 2) == "->") break;
      if (pos_ == start && text_.substr(pos_, 2) == "->") {
        advance();
        advance();
        if (peek() == '=') advance();
        break;
      }
      advance();
    }
    return {std::string(text_.substr(start, pos_ - start)), line, col};
  }

  void skip_balanced() {
    int depth = 1;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      advance();
      if (c == '(') ++depth;
      if (c == ')' && --depth == 0) return;
    }
    fail(ParseError::Kind::Syntax, line_, col_, "unterminated COMMENT section");
  }

  std::string_view text_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
  std::map<std::string, std::size_t> arity_;
};

}  // namespace detail

inline Trs parse_cops(std::string_view text) {
  return detail::CopsParser(text).parse();
}

/// Parses a single term in prefix notation; identifiers in `vars` are
/// variables. Intended for tests and tools.
inline Term parse_term(std::string_view text, const std::set<std::string>& vars = {}) {
  detail::CopsParser p(text);
  p.vars_ = vars;
  return p.term();
}

// ---------------------------------------------------------------------------
// Rewrite steps

struct Step {
  int rule = 0;
  Position position;
  Substitution sigma;
};

/// Applies `step` to `s`; throws TermError if the step does not apply.
inline Term replay(const Trs& R, const Term& s, const Step& step) {
  const Rule& r = R.rule(step.rule);
  const Term& redex = subterm_at(s, step.position);
  if (!(step.sigma.apply(r.lhs) == redex))
    throw TermError("rule " + std::to_string(r.id) + " does not match " +
                    redex.str() + " at " + step.position.str());
  return replace_at(s, step.position, step.sigma.apply(r.rhs));
}

struct RewriteSequence {
  Term start;
  std::vector<Step> steps;
  std::vector<Term> terms;  // terms[0] = start, terms.back() = end

  const Term& end() const { return terms.back(); }
  std::size_t length() const { return steps.size(); }
  RuleSet rules_used() const {
    RuleSet out;
    for (const Step& s : steps) out.insert(s.rule);
    return out;
  }
};

inline RewriteSequence empty_sequence(const Term& t) {
  return RewriteSequence{t, {}, {t}};
}

/// True iff every step replays and the recorded terms agree.
inline bool replays(const Trs& R, const RewriteSequence& seq) {
  if (seq.terms.size() != seq.steps.size() + 1 || !(seq.terms[0] == seq.start))
    return false;
  try {
    Term cur = seq.start;
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
      cur = replay(R, cur, seq.steps[i]);
      if (!(cur == seq.terms[i + 1])) return false;
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

struct Successor {
  Term term;
  Step step;
};

/// One-step reducts in position-lexicographic order, then rule id.
inline std::vector<Successor> successors(const Term& s, const Trs& S) {
  std::vector<Successor> out;
  if (S.empty()) return out;
  for (const Position& p : positions(s)) {
    const Term& sub = subterm_at(s, p);
    if (sub.is_variable()) continue;
    for (const Rule& r : S.rules()) {
      if (r.lhs.symbol() != sub.symbol() || r.lhs.arity() != sub.arity()) continue;
      if (auto sigma = match(r.lhs, sub)) {
        Term t = replace_at(s, p, sigma->apply(r.rhs));
        out.push_back(Successor{t, Step{r.id, p, *sigma}});
      }
    }
  }
  return out;
}

struct ParallelSuccessor {
  Term term;
  PositionSet positions;
  std::vector<Step> steps;  // one per position, in position order
};

struct ParallelSuccessors {
  std::vector<ParallelSuccessor> items;
  bool exhausted = false;  // the combination cap was hit; items is partial
};

inline constexpr std::size_t kParallelCap = 1u << 12;

/// All s ⇻_P t, including (s, ∅). Distinct (t, P) pairs; the enumeration
/// follows the term structure, root alternatives after the argument ones.
inline ParallelSuccessors parallel_successors(const Term& s, const Trs& S,
                                              std::size_t cap = kParallelCap) {
  struct Partial {
    Term term;
    std::vector<Step> steps;
  };
  bool exhausted = false;
  std::function<std::vector<Partial>(const Term&, const Position&)> go =
      [&](const Term& t, const Position& at) -> std::vector<Partial> {
    std::vector<Partial> out;
    if (t.is_variable()) {
      out.push_back({t, {}});
      return out;
    }
    // No contraction at this node: combine argument alternatives.
    std::vector<Partial> acc{{t, {}}};
    std::vector<Term> args = t.args();
    for (std::size_t i = 0; i < t.arity(); ++i) {
      std::vector<Partial> sub = go(t.arg(i), at.child(static_cast<unsigned>(i + 1)));
      if (sub.size() == 1 && sub[0].steps.empty()) continue;
      std::vector<Partial> next;
      for (const Partial& a : acc) {
        for (const Partial& b : sub) {
          if (next.size() >= cap) {
            exhausted = true;
            break;
          }
          std::vector<Term> as = a.term.args();
          as[i] = b.term;
          Partial p{Term::apply(t.symbol(), std::move(as)), a.steps};
          p.steps.insert(p.steps.end(), b.steps.begin(), b.steps.end());
          next.push_back(std::move(p));
        }
      }
      acc = std::move(next);
    }
    out = std::move(acc);
    for (const Rule& r : S.rules()) {
      if (r.lhs.symbol() != t.symbol() || r.lhs.arity() != t.arity()) continue;
      if (auto sigma = match(r.lhs, t)) {
        if (out.size() >= cap) {
          exhausted = true;
          break;
        }
        out.push_back({sigma->apply(r.rhs), {Step{r.id, at, *sigma}}});
      }
    }
    return out;
  };
  ParallelSuccessors res;
  std::set<std::pair<Term, PositionSet>> seen;
  for (Partial& p : go(s, Position::root())) {
    PositionSet ps;
    for (const Step& st : p.steps) ps.insert(st.position);
    if (!seen.emplace(p.term, ps).second) continue;
    std::sort(p.steps.begin(), p.steps.end(),
              [](const Step& a, const Step& b) { return a.position < b.position; });
    res.items.push_back({p.term, std::move(ps), std::move(p.steps)});
  }
  res.exhausted = exhausted;
  return res;
}

/// Applies a parallel step (steps at pairwise parallel positions).
inline Term replay_parallel(const Trs& R, const Term& s, const std::vector<Step>& steps) {
  std::map<Position, Term> repl;
  for (const Step& st : steps) {
    const Rule& r = R.rule(st.rule);
    const Term& redex = subterm_at(s, st.position);
    if (!(st.sigma.apply(r.lhs) == redex))
      throw TermError("rule " + std::to_string(r.id) + " does not match " +
                      redex.str() + " at " + st.position.str());
    if (!repl.emplace(st.position, st.sigma.apply(r.rhs)).second)
      throw TermError("two steps at position " + st.position.str());
  }
  return replace_parallel(s, repl);
}

/// Does s ⇻ t hold? Returns the steps of one witness. Uses a direct
/// structural check instead of enumerating all parallel successors.
inline std::optional<std::vector<Step>> parallel_step_to(const Term& s, const Term& t,
                                                         const Trs& S) {
  std::function<bool(const Term&, const Term&, const Position&, std::vector<Step>&)> go =
      [&](const Term& a, const Term& b, const Position& at, std::vector<Step>& out) {
        if (a == b) return true;
        if (!a.is_variable()) {
          for (const Rule& r : S.rules()) {
            if (r.lhs.symbol() != a.symbol() || r.lhs.arity() != a.arity()) continue;
            if (auto sigma = match(r.lhs, a)) {
              if (sigma->apply(r.rhs) == b) {
                out.push_back(Step{r.id, at, *sigma});
                return true;
              }
            }
          }
          if (!b.is_variable() && a.symbol() == b.symbol() && a.arity() == b.arity()) {
            std::size_t mark = out.size();
            bool ok = true;
            for (std::size_t i = 0; i < a.arity() && ok; ++i)
              ok = go(a.arg(i), b.arg(i), at.child(static_cast<unsigned>(i + 1)), out);
            if (ok) return true;
            out.resize(mark);
          }
        }
        return false;
      };
  std::vector<Step> steps;
  if (!go(s, t, Position::root(), steps)) return std::nullopt;
  return steps;
}

// ---------------------------------------------------------------------------
// Bounded breadth-first exploration

inline constexpr std::size_t kStateCap = 20000;

/// Terms reachable from a start term within a depth bound, with BFS parents.
class Reducts {
 public:
  struct Entry {
    std::size_t depth = 0;
    std::optional<Term> parent;
    Step step;
  };

  Reducts(const Term& start, const Trs& S, std::size_t k,
          std::size_t state_cap = kStateCap)
      : start_(start) {
    entries_.emplace(start, Entry{});
    order_.push_back(start);
    std::deque<Term> queue{start};
    while (!queue.empty()) {
      Term cur = queue.front();
      queue.pop_front();
      std::size_t d = entries_.at(cur).depth;
      if (d >= k) continue;
      for (Successor& succ : successors(cur, S)) {
        if (entries_.contains(succ.term)) continue;
        if (entries_.size() >= state_cap) {
          exhausted_ = true;
          return;
        }
        entries_.emplace(succ.term, Entry{d + 1, cur, succ.step});
        order_.push_back(succ.term);
        queue.push_back(succ.term);
      }
    }
  }

  bool contains(const Term& t) const { return entries_.contains(t); }
  std::size_t depth(const Term& t) const { return entries_.at(t).depth; }
  bool exhausted() const { return exhausted_; }
  /// Reached terms in BFS discovery order.
  const std::vector<Term>& order() const { return order_; }

  RewriteSequence path_to(const Term& t) const {
    std::vector<Term> terms;
    std::vector<Step> steps;
    Term cur = t;
    while (true) {
      const Entry& e = entries_.at(cur);
      terms.push_back(cur);
      if (!e.parent) break;
      steps.push_back(e.step);
      cur = *e.parent;
    }
    std::reverse(terms.begin(), terms.end());
    std::reverse(steps.begin(), steps.end());
    return RewriteSequence{start_, std::move(steps), std::move(terms)};
  }

 private:
  Term start_;
  std::unordered_map<Term, Entry, TermHash> entries_;
  std::vector<Term> order_;
  bool exhausted_ = false;
};

/// Shortest s ->^{<=k} t over S, if any.
inline std::optional<RewriteSequence> reachable(const Term& s, const Term& t,
                                                const Trs& S, std::size_t k) {
  Reducts r(s, S, k);
  if (!r.contains(t)) return std::nullopt;
  return r.path_to(t);
}

}  // namespace confluence
