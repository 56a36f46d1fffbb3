#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "common.hpp"
#include "confluence/criteria.hpp"
#include "confluence/render.hpp"

using namespace confluence;
using testing_util::corpus;
using testing_util::load;
using testing_util::T;

namespace {

/// Random term over f/2, g/1, a, b and the variables x, y.
Term random_term(std::mt19937& rng, int budget) {
  std::uniform_int_distribution<int> pick(0, 5);
  int c = budget <= 1 ? pick(rng) % 4 : pick(rng);
  switch (c) {
    case 0: return Term::variable("x");
    case 1: return Term::variable("y");
    case 2: return Term::apply("a");
    case 3: return Term::apply("b");
    case 4: return Term::apply("g", {random_term(rng, budget - 1)});
    default: {
      int left = 1 + static_cast<int>(rng() % static_cast<unsigned>(std::max(1, budget - 2)));
      return Term::apply("f", {random_term(rng, left), random_term(rng, budget - 1 - left)});
    }
  }
}

std::vector<Term> small_ground_terms() {
  std::vector<Term> out{T("a"), T("b")};
  for (const char* s : {"g(a)", "g(b)", "g(g(a))", "g(g(b))", "f(a,a)", "f(a,b)", "f(b,a)",
                        "f(b,b)"})
    out.push_back(T(s));
  return out;
}

/// Brute-force parallel successors: every set of pairwise parallel redex
/// positions, every choice of rule at each.
std::set<Term> brute_parallel(const Term& s, const Trs& R) {
  std::vector<std::pair<Position, Term>> redexes;  // (position, contractum)
  for (const Position& p : positions(s))
    for (const Rule& r : R.rules())
      if (auto sigma = match(r.lhs, subterm_at(s, p))) redexes.emplace_back(p, sigma->apply(r.rhs));
  std::set<Term> out;
  std::function<void(std::size_t, std::map<Position, Term>&)> go =
      [&](std::size_t i, std::map<Position, Term>& chosen) {
        if (i == redexes.size()) {
          out.insert(replace_parallel(s, chosen));
          return;
        }
        go(i + 1, chosen);
        const auto& [p, u] = redexes[i];
        for (const auto& [q, _] : chosen)
          if (!p.parallel_to(q)) return;
        chosen.emplace(p, u);
        go(i + 1, chosen);
        chosen.erase(p);
      };
  std::map<Position, Term> chosen;
  go(0, chosen);
  return out;
}

/// Random ground terms over 0, s, +, *.
Term random_arith(std::mt19937& rng, int depth) {
  unsigned c = depth == 0 ? 0 : rng() % 4;
  if (c == 0) return Term::apply("0");
  if (c == 1) return Term::apply("s", {random_arith(rng, depth - 1)});
  return Term::apply(c == 2 ? "+" : "*", {random_arith(rng, depth - 1), random_arith(rng, depth - 1)});
}

void for_each_node(const ProofNode& n, const std::function<void(const ProofNode&)>& f) {
  f(n);
  for (const ProofPtr& c : n.children) for_each_node(*c, f);
}

}  // namespace

TEST(Unification, MguIsSoundAndMostGeneral) {
  std::mt19937 rng(7);
  auto grounds = small_ground_terms();
  Variable x{"x", 0}, y{"y", 0};
  int unifiable = 0;
  for (int i = 0; i < 400; ++i) {
    Term s = random_term(rng, 4), t = random_term(rng, 4);
    auto sigma = unify(s, t);
    EXPECT_EQ(sigma.has_value(), unify(t, s).has_value()) << s.str() << " " << t.str();
    for (const Term& gx : grounds)
      for (const Term& gy : grounds) {
        Substitution theta{{x, gx}, {y, gy}};
        if (sigma) {
          // θ ∘ σ is a unifier, so σ is one too.
          EXPECT_EQ(theta.apply(sigma->apply(s)), theta.apply(sigma->apply(t)));
        }
        if (theta.apply(s) == theta.apply(t)) {
          ASSERT_TRUE(sigma) << s.str() << " =? " << t.str() << " has ground unifier";
          // θ = σθ on Var(s, t).
          EXPECT_EQ(theta.apply(sigma->apply(Term::variable(x))), gx);
          EXPECT_EQ(theta.apply(sigma->apply(Term::variable(y))), gy);
        }
      }
    if (sigma) {
      ++unifiable;
      EXPECT_EQ(sigma->apply(s), sigma->apply(t));
      EXPECT_EQ(sigma->then(*sigma), *sigma);  // idempotent
      VariableSet vs = vars(s);
      for (const Variable& v : vars(t)) vs.insert(v);
      for (const Variable& v : sigma->domain()) EXPECT_TRUE(vs.contains(v));
    }
  }
  EXPECT_GT(unifiable, 40);
}

TEST(Unification, MatchAndReplaceRoundTrip) {
  std::mt19937 rng(11);
  auto grounds = small_ground_terms();
  for (int i = 0; i < 300; ++i) {
    Term p = random_term(rng, 5);
    Substitution sigma{{Variable{"x", 0}, grounds[rng() % grounds.size()]},
                       {Variable{"y", 0}, grounds[rng() % grounds.size()]}};
    if (is_linear(p)) { EXPECT_TRUE(match(p, sigma.apply(p))) << p.str(); }
    auto ps = positions(p);
    const Position& q = ps[rng() % ps.size()];
    Term u = random_term(rng, 3);
    EXPECT_EQ(subterm_at(replace_parallel(p, {{q, u}}), q), u);
  }
}

TEST(Rewriting, StepInclusions) {
  for (const std::string& f : corpus()) {
    Trs R = load(f);
    std::vector<Term> starts;
    for (const Rule& r : R.rules()) starts.insert(starts.end(), {r.lhs, r.rhs});
    for (const Peak& pk : parallel_critical_peaks(R)) starts.push_back(pk.source);
    for (const Term& s : starts) {
      auto par = parallel_successors(s, R);
      std::set<std::pair<Term, PositionSet>> ps;
      for (const auto& p : par.items) ps.emplace(p.term, p.positions);
      for (const Successor& x : successors(s, R)) {
        EXPECT_EQ(replay(R, s, x.step), x.term);
        EXPECT_TRUE(ps.contains({x.term, PositionSet{x.step.position}})) << f << " " << s.str();
      }
      for (const auto& p : par.items) {
        EXPECT_EQ(replay_parallel(R, s, p.steps), p.term);
        auto seq = reachable(s, p.term, R, p.positions.size());
        ASSERT_TRUE(seq) << f << " " << s.str() << " to " << p.term.str();
        EXPECT_TRUE(replays(R, *seq));
        EXPECT_TRUE(reachable(s, p.term, R, p.positions.size() + 1));  // monotone in k
      }
    }
  }
}

TEST(Rewriting, ParallelSuccessorsMatchBruteForce) {
  std::mt19937 rng(3);
  Trs R = load("nat_arith.trs");
  for (int i = 0; i < 150; ++i) {
    Term s = random_arith(rng, 3);
    std::set<Term> got;
    for (const auto& p : parallel_successors(s, R).items) got.insert(p.term);
    std::set<Term> want = brute_parallel(s, R);
    EXPECT_EQ(got, want) << s.str();
    for (const Term& t : want) EXPECT_TRUE(parallel_step_to(s, t, R)) << s.str() << " " << t.str();
  }
}

TEST(Peaks, ReplayAndCriticalPeaksAreSingletonParallelPeaks) {
  for (const std::string& f : corpus()) {
    Trs R = load(f);
    auto pcps = parallel_critical_peaks(R);
    std::set<Peak> all(pcps.begin(), pcps.end());
    EXPECT_EQ(all.size(), pcps.size()) << f;  // duplicate-free
    for (const Peak& pk : pcps) EXPECT_TRUE(peak_replays(pk, R, R)) << f << " " << pk.str();
    std::size_t singletons = 0;
    for (const Peak& pk : pcps) singletons += pk.inner.size() == 1;
    auto cps = critical_peaks(R);
    EXPECT_EQ(cps.size(), singletons) << f;
    for (const Peak& pk : cps) {
      EXPECT_TRUE(peak_replays(pk, R, R));
      bool found = false;
      for (const Peak& q : pcps) {
        Term a[] = {pk.source, pk.left, pk.right}, b[] = {q.source, q.left, q.right};
        found |= q.inner.size() == 1 && q.root == pk.root && are_variants(a, b);
      }
      EXPECT_TRUE(found) << f << " " << pk.str();
    }
  }
}

TEST(Peaks, FilteredPcpsIsStrictlySmallerWithTrivialPeak) {
  Trs R = load("int_plus.trs");  // 0 <- 0+0 -> 0 is trivial
  Cps full = pcps(R, nullptr);
  Cps eq = pcps(R, [](const Term& t, const Term& u) { return t == u; });
  EXPECT_LT(eq.rules.size(), full.rules.size());
  for (const Rule& r : eq.rules.rules()) {
    bool found = false;
    for (const Rule& q : full.rules.rules()) found |= rules_are_variants(r, q);
    EXPECT_TRUE(found);
  }
}

TEST(Proofs, EveryCertificateAndAuditVerifies) {
  std::vector<std::string> files = corpus();
  files.push_back("nonlinear.trs");
  int certificates = 0;
  for (const std::string& f : files) {
    Verdict v = prove_confluence(load(f));
    ASSERT_TRUE(v.confluent) << f;
    EXPECT_TRUE(audit(*v.proof)) << f;
    for_each_node(*v.proof, [&](const ProofNode& n) {
      for (const Witness& w : n.witnesses) {
        if (auto* t = std::get_if<TerminationWitness>(&w)) {
          ++certificates;
          EXPECT_TRUE(verify_certificate(t->cert, t->P, t->R)) << f;
        }
        if (auto* l = std::get_if<LabelingWitness>(&w)) { EXPECT_TRUE(sat::satisfies(l->model, l->cnf)); }
        if (auto* r = std::get_if<ReductionWitness>(&w))
          for (const ReductionStep& st : r->steps) {
            EXPECT_TRUE(verify_reduction_step(st)) << f;
            EXPECT_LT(st.chosen.size(), st.input.size());
          }
      }
    });
  }
  EXPECT_GT(certificates, 0);
}

TEST(Proofs, RenderingIsDeterministic) {
  for (const std::string& f : corpus()) {
    std::string a = render_verdict(prove_confluence(load(f)), true);
    std::string b = render_verdict(prove_confluence(load(f)), true);
    EXPECT_EQ(a, b) << f;
  }
}

TEST(Criteria, HuetImpliesAlmostImpliesToyama) {
  std::vector<std::string> files = corpus();
  files.push_back("nonlinear.trs");
  for (const std::string& f : files) {
    Trs R = load(f);
    Prover p;
    bool huet = static_cast<bool>(p.huet_parallel_closed(R));
    bool almost = static_cast<bool>(p.almost_parallel_closed(R));
    bool t81 = static_cast<bool>(p.toyama_pcp_closed(R));
    if (huet) { EXPECT_TRUE(almost) << f; }
    if (almost) { EXPECT_TRUE(t81) << f; }
  }
}

TEST(Criteria, LabelingLevelZeroSetIsC) {
  Prover p;
  Trs R = load("int_plus.trs");
  for (const RuleSet& C : p.candidates(R)) {
    auto w = p.find_labeling(R, C, 2);
    if (!w) continue;
    RuleSet zero;
    for (const auto& [id, l] : w->phi)
      if (l == 0) zero.insert(id);
    EXPECT_EQ(zero, C);
    EXPECT_TRUE(sat::satisfies(w->model, w->cnf));
  }
}

TEST(Sat, EnumerationMatchesTruthTable) {
  std::mt19937 rng(5);
  for (int i = 0; i < 60; ++i) {
    int n = 3 + static_cast<int>(rng() % 6);
    sat::Cnf f;
    f.reserve_vars(n);
    for (int c = 0; c < 2 * n; ++c) {
      sat::Clause cl;
      for (int j = 0; j < 3; ++j) {
        int v = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
        cl.push_back(rng() % 2 ? v : -v);
      }
      f.add(cl);
    }
    std::set<std::map<int, bool>> want;
    for (unsigned m = 0; m < (1u << n); ++m) {
      sat::Model model(static_cast<std::size_t>(n) + 1);
      std::map<int, bool> proj;
      for (int v = 1; v <= n; ++v) proj[v] = model[static_cast<std::size_t>(v)] = (m >> (v - 1)) & 1;
      if (sat::satisfies(model, f)) want.insert(proj);
    }
    auto en = sat::enumerate_models(f, {}, 1000);
    EXPECT_FALSE(en.truncated);
    std::set<std::map<int, bool>> got(en.projections.begin(), en.projections.end());
    EXPECT_EQ(got.size(), en.projections.size());
    EXPECT_EQ(got, want);
    auto m = sat::solve(f);
    EXPECT_EQ(m.has_value(), !want.empty());
    if (m) { EXPECT_TRUE(sat::satisfies(*m, f)); }
  }
}

TEST(Sat, ReductionEncodingDimacsRoundTrip) {
  Trs R = load("nat_arith.trs");
  Encoding e = encode(R, {1, 2}, compute_sk_table(R, 5));
  sat::Cnf back = sat::parse_dimacs(sat::to_dimacs(e.cnf));
  EXPECT_EQ(back.num_vars(), e.cnf.num_vars());
  EXPECT_EQ(back.clauses(), e.cnf.clauses());
  auto a = sat::enumerate_models(e.cnf, e.rule_vars(), 10).projections;
  auto b = sat::enumerate_models(back, e.rule_vars(), 10).projections;
  EXPECT_EQ(std::set(a.begin(), a.end()), std::set(b.begin(), b.end()));
}
