// SPDX-License-Identifier: Apache-2.0
//
// termination.hpp - Lexicographic path orders and linear polynomial
// interpretations, searched with the SAT core, plus an independent checker
// for the certificates they produce.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "confluence/sat.hpp"
#include "confluence/term.hpp"
#include "confluence/trs.hpp"

namespace confluence {

// ---------------------------------------------------------------------------
// Lexicographic path order

/// Strict precedence as a set of pairs (f, g) meaning f > g.
struct Precedence {
  std::set<std::pair<std::string, std::string>> greater;

  bool gt(const std::string& f, const std::string& g) const {
    return greater.contains({f, g});
  }
  bool is_strict_order() const {
    for (const auto& [f, g] : greater) {
      if (f == g) return false;
      for (const auto& [g2, h] : greater)
        if (g2 == g && !greater.contains({f, h})) return false;
    }
    return true;
  }
  std::string str() const {
    std::string out;
    for (const auto& [f, g] : greater) {
      if (!out.empty()) out += ", ";
      out += f + " > " + g;
    }
    return out.empty() ? "(empty)" : out;
  }
};

inline bool lpo_gt(const Term& s, const Term& t, const Precedence& prec) {
  if (s.is_variable()) return false;
  if (t.is_variable()) return occurs_in(t.as_variable(), s);
  for (const Term& si : s.args())
    if (si == t || lpo_gt(si, t, prec)) return true;
  auto all_args_below = [&] {
    for (const Term& tj : t.args())
      if (!lpo_gt(s, tj, prec)) return false;
    return true;
  };
  if (s.symbol() != t.symbol() || s.arity() != t.arity())
    return prec.gt(s.symbol(), t.symbol()) && all_args_below();
  for (std::size_t i = 0; i < s.arity(); ++i) {
    if (s.arg(i) == t.arg(i)) continue;
    return lpo_gt(s.arg(i), t.arg(i), prec) && all_args_below();
  }
  return false;
}

namespace detail {

inline std::set<std::string> symbols_of(const std::vector<const Trs*>& systems) {
  std::set<std::string> out;
  for (const Trs* R : systems)
    for (const Rule& r : R->rules()) {
      collect_symbols(r.lhs, out);
      collect_symbols(r.rhs, out);
    }
  return out;
}

inline std::map<std::string, std::size_t> arities_of(const std::vector<const Trs*>& systems) {
  std::map<std::string, std::size_t> out;
  for (const Trs* R : systems)
    for (const auto& [f, n] : R->signature()) out.emplace(f, n);
  return out;
}

class LpoEncoder {
 public:
  LpoEncoder(sat::Circuit& c, const std::set<std::string>& symbols) : c_(c) {
    for (const std::string& f : symbols)
      for (const std::string& g : symbols)
        if (f != g) prec_[{f, g}] = c_.fresh();
    for (const auto& [fg, v] : prec_)
      c_.cnf().add({-v, -prec_.at({fg.second, fg.first})});
    for (const std::string& f : symbols)
      for (const std::string& g : symbols)
        for (const std::string& h : symbols)
          if (f != g && g != h && f != h)
            c_.cnf().add({-prec_.at({f, g}), -prec_.at({g, h}), prec_.at({f, h})});
  }

  sat::Lit gt(const Term& s, const Term& t) {
    auto key = std::make_pair(s, t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    sat::Lit res = compute(s, t);
    memo_.emplace(key, res);
    return res;
  }

  Precedence decode(const sat::Model& m) const {
    Precedence p;
    for (const auto& [fg, v] : prec_)
      if (sat::lit_true(m, v)) p.greater.insert(fg);
    return p;
  }

 private:
  sat::Lit compute(const Term& s, const Term& t) {
    if (s.is_variable()) return c_.bottom();
    if (t.is_variable()) return c_.constant(occurs_in(t.as_variable(), s));
    std::vector<sat::Lit> cases;
    for (const Term& si : s.args()) cases.push_back(si == t ? c_.top() : gt(si, t));
    std::vector<sat::Lit> below;
    for (const Term& tj : t.args()) below.push_back(gt(s, tj));
    if (s.symbol() != t.symbol() || s.arity() != t.arity()) {
      auto it = prec_.find({s.symbol(), t.symbol()});
      sat::Lit p = it == prec_.end() ? c_.bottom() : it->second;
      below.push_back(p);
      cases.push_back(c_.and_(below));
    } else {
      for (std::size_t i = 0; i < s.arity(); ++i) {
        if (s.arg(i) == t.arg(i)) continue;
        below.push_back(gt(s.arg(i), t.arg(i)));
        cases.push_back(c_.and_(below));
        break;
      }
    }
    return c_.or_(cases);
  }

  sat::Circuit& c_;
  std::map<std::pair<std::string, std::string>, sat::Lit> prec_;
  std::map<std::pair<Term, Term>, sat::Lit> memo_;
};

}  // namespace detail

/// A precedence under which l >lpo r for every rule, if one exists.
inline std::optional<Precedence> lpo_prove(const Trs& R) {
  sat::Cnf f;
  sat::Circuit c(f);
  detail::LpoEncoder enc(c, detail::symbols_of({&R}));
  for (const Rule& r : R.rules()) c.assert_(enc.gt(r.lhs, r.rhs));
  auto m = sat::solve(f);
  if (!m) return std::nullopt;
  Precedence p = enc.decode(*m);
  for (const Rule& r : R.rules())
    if (!lpo_gt(r.lhs, r.rhs, p)) return std::nullopt;
  return p;
}

// ---------------------------------------------------------------------------
// Linear interpretations

struct LinearFunction {
  std::vector<long long> coeffs;  // c1..cn
  long long constant = 0;         // c0
};

struct LinearInterpretation {
  std::map<std::string, LinearFunction> functions;

  std::string str() const {
    std::string out;
    for (const auto& [f, lf] : functions) {
      if (!out.empty()) out += ", ";
      out += "[" + f + "](";
      std::string body;
      for (std::size_t i = 0; i < lf.coeffs.size(); ++i) {
        if (i) out += ',';
        out += "x" + std::to_string(i + 1);
        if (lf.coeffs[i] == 0) continue;
        if (!body.empty()) body += " + ";
        if (lf.coeffs[i] != 1) body += std::to_string(lf.coeffs[i]);
        body += "x" + std::to_string(i + 1);
      }
      if (lf.constant != 0 || body.empty()) {
        if (!body.empty()) body += " + ";
        body += std::to_string(lf.constant);
      }
      out += ") = " + body;
    }
    return out;
  }
};

/// c0 + Σ c_x · x over naturals.
struct LinearPoly {
  std::map<Variable, long long> coeffs;
  long long constant = 0;
};

/// Throws std::invalid_argument if a symbol is missing or has the wrong arity.
inline LinearPoly interpret(const Term& t, const LinearInterpretation& I) {
  if (t.is_variable()) return LinearPoly{{{t.as_variable(), 1}}, 0};
  auto it = I.functions.find(t.symbol());
  if (it == I.functions.end())
    throw std::invalid_argument("interpretation lacks symbol " + t.symbol());
  const LinearFunction& lf = it->second;
  if (lf.coeffs.size() != t.arity())
    throw std::invalid_argument("interpretation of " + t.symbol() + " has arity " +
                                std::to_string(lf.coeffs.size()) + ", expected " +
                                std::to_string(t.arity()));
  LinearPoly out{{}, lf.constant};
  for (std::size_t i = 0; i < t.arity(); ++i) {
    LinearPoly a = interpret(t.arg(i), I);
    out.constant += lf.coeffs[i] * a.constant;
    for (const auto& [x, c] : a.coeffs) out.coeffs[x] += lf.coeffs[i] * c;
  }
  return out;
}

/// p >= q for all natural values: coefficient-wise comparison.
inline bool poly_geq(const LinearPoly& p, const LinearPoly& q) {
  if (p.constant < q.constant) return false;
  for (const auto& [x, c] : q.coeffs) {
    auto it = p.coeffs.find(x);
    if ((it == p.coeffs.end() ? 0 : it->second) < c) return false;
  }
  return true;
}

/// p > q: coefficient-wise >= and a strictly larger constant.
inline bool poly_gt(const LinearPoly& p, const LinearPoly& q) {
  return poly_geq(p, q) && p.constant > q.constant;
}

struct CertificateStage {
  std::variant<LinearInterpretation, Precedence> order;
  RuleSet removed;  // ids of P-rules oriented strictly at this stage
};

struct RelTerminationCertificate {
  std::vector<CertificateStage> stages;
};

namespace detail {

inline bool stage_weak(const CertificateStage& st, const Rule& r) {
  if (const auto* I = std::get_if<LinearInterpretation>(&st.order))
    return poly_geq(interpret(r.lhs, *I), interpret(r.rhs, *I));
  const auto& p = std::get<Precedence>(st.order);
  return r.lhs == r.rhs || lpo_gt(r.lhs, r.rhs, p);
}

inline bool stage_strict(const CertificateStage& st, const Rule& r) {
  if (const auto* I = std::get_if<LinearInterpretation>(&st.order))
    return poly_gt(interpret(r.lhs, *I), interpret(r.rhs, *I));
  return lpo_gt(r.lhs, r.rhs, std::get<Precedence>(st.order));
}

}  // namespace detail

/// Re-checks every stage symbolically. Throws std::invalid_argument on a
/// malformed certificate (unknown rule ids, missing symbols, bad arities,
/// a non-order precedence).
inline bool verify_certificate(const RelTerminationCertificate& cert, const Trs& P,
                               const Trs& R) {
  RuleSet remaining = P.ids();
  for (const CertificateStage& st : cert.stages) {
    for (int id : st.removed)
      if (!P.has_rule(id))
        throw std::invalid_argument("certificate removes unknown rule " + std::to_string(id));
    if (const auto* I = std::get_if<LinearInterpretation>(&st.order)) {
      for (const auto& [f, lf] : I->functions)
        for (long long c : lf.coeffs)
          if (c < 1) return false;  // not monotone
      for (const auto& [f, lf] : I->functions)
        if (lf.constant < 0) return false;
    } else if (!std::get<Precedence>(st.order).is_strict_order()) {
      throw std::invalid_argument("precedence is not a strict order");
    }
    for (int id : remaining)
      if (!detail::stage_weak(st, P.rule(id))) return false;
    for (const Rule& r : R.rules())
      if (!detail::stage_weak(st, r)) return false;
    for (int id : st.removed) {
      if (!remaining.contains(id)) continue;
      if (!detail::stage_strict(st, P.rule(id))) return false;
    }
    for (int id : st.removed) remaining.erase(id);
  }
  return remaining.empty();
}

namespace detail {

class PolyEncoder {
 public:
  using Bits = sat::Circuit::Bits;
  struct SymPoly {
    std::map<Variable, Bits> coeffs;
    Bits constant;
  };

  PolyEncoder(sat::Circuit& c, const std::map<std::string, std::size_t>& sig,
              long long bound)
      : c_(c) {
    std::size_t width = 0;
    while ((1LL << width) <= bound) ++width;
    Bits bound_bits = c_.constant_bits(static_cast<unsigned long long>(bound));
    for (const auto& [f, n] : sig) {
      Sym s;
      for (std::size_t i = 0; i <= n; ++i) {
        Bits b;
        for (std::size_t k = 0; k < width; ++k) b.push_back(c_.fresh());
        c_.assert_(c_.geq(bound_bits, b));
        if (i > 0) c_.assert_(c_.or_(b));  // argument coefficients >= 1
        s.push_back(std::move(b));
      }
      syms_.emplace(f, std::move(s));
    }
  }

  SymPoly eval(const Term& t) {
    if (auto it = memo_.find(t); it != memo_.end()) return it->second;
    SymPoly out;
    if (t.is_variable()) {
      out.coeffs[t.as_variable()] = {c_.top()};
    } else {
      const Sym& s = syms_.at(t.symbol());
      out.constant = s[0];
      for (std::size_t i = 0; i < t.arity(); ++i) {
        SymPoly a = eval(t.arg(i));
        out.constant = c_.add(out.constant, c_.mul(s[i + 1], a.constant));
        for (const auto& [x, cx] : a.coeffs)
          out.coeffs[x] = c_.add(out.coeffs[x], c_.mul(s[i + 1], cx));
      }
    }
    memo_.emplace(t, out);
    return out;
  }

  sat::Lit weak(const Rule& r) {
    SymPoly l = eval(r.lhs), q = eval(r.rhs);
    std::vector<sat::Lit> parts{c_.geq(l.constant, q.constant)};
    for (const auto& [x, cq] : q.coeffs) parts.push_back(c_.geq(l.coeffs[x], cq));
    return c_.and_(parts);
  }

  sat::Lit strict_constant(const Rule& r) {
    return c_.gt(eval(r.lhs).constant, eval(r.rhs).constant);
  }

  LinearInterpretation decode(const sat::Model& m) const {
    LinearInterpretation I;
    for (const auto& [f, s] : syms_) {
      LinearFunction lf;
      lf.constant = static_cast<long long>(sat::Circuit::eval(s[0], m));
      for (std::size_t i = 1; i < s.size(); ++i)
        lf.coeffs.push_back(static_cast<long long>(sat::Circuit::eval(s[i], m)));
      I.functions.emplace(f, std::move(lf));
    }
    return I;
  }

 private:
  using Sym = std::vector<Bits>;  // [c0, c1, ..., cn]
  sat::Circuit& c_;
  std::map<std::string, Sym> syms_;
  std::map<Term, SymPoly> memo_;
};

}  // namespace detail

/// Rule-removal proof of P/R termination with monotone linear
/// interpretations whose coefficients and constants are at most `bound`.
inline std::optional<RelTerminationCertificate> poly_prove_relative(const Trs& P, const Trs& R,
                                                                    long long bound) {
  if (bound < 1) throw std::invalid_argument("coefficient bound must be at least 1");
  RelTerminationCertificate cert;
  RuleSet remaining = P.ids();
  auto sig = detail::arities_of({&P, &R});
  while (!remaining.empty()) {
    sat::Cnf f;
    sat::Circuit c(f);
    detail::PolyEncoder enc(c, sig, bound);
    std::vector<sat::Lit> some_strict;
    for (int id : remaining) {
      const Rule& r = P.rule(id);
      c.assert_(enc.weak(r));
      some_strict.push_back(enc.strict_constant(r));
    }
    for (const Rule& r : R.rules()) c.assert_(enc.weak(r));
    c.assert_(c.or_(some_strict));
    auto m = sat::solve(f);
    if (!m) return std::nullopt;
    CertificateStage st{enc.decode(*m), {}};
    for (int id : remaining)
      if (detail::stage_strict(st, P.rule(id))) st.removed.insert(id);
    if (st.removed.empty()) return std::nullopt;  // solver/decoder disagreement
    for (int id : st.removed) remaining.erase(id);
    cert.stages.push_back(std::move(st));
  }
  return cert;
}

/// Termination of R alone: LPO first, then linear interpretations with
/// bounds 2 and 3.
inline std::optional<RelTerminationCertificate> prove_termination(const Trs& R) {
  if (auto p = lpo_prove(R)) {
    RelTerminationCertificate cert;
    if (!R.empty()) cert.stages.push_back({*p, R.ids()});
    return cert;
  }
  for (long long b : {2LL, 3LL})
    if (auto cert = poly_prove_relative(R, Trs{}, b)) return cert;
  return std::nullopt;
}

}  // namespace confluence
