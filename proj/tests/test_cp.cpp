#include <gtest/gtest.h>

#include "common.hpp"
#include "confluence/cp.hpp"
#include "confluence/search.hpp"

using namespace confluence;
using testing_util::load;
using testing_util::T;

namespace {

using Pair = std::vector<Term>;

Pair canon_pair(const Term& t, const Term& u) {
  Term p[] = {t, u};
  return canonicalize(p);
}

std::set<Pair> nontrivial_pairs(const std::vector<Peak>& peaks) {
  std::set<Pair> out;
  for (const Peak& pk : peaks)
    if (!pk.trivial()) out.insert(canon_pair(pk.left, pk.right));
  return out;
}

}  // namespace

TEST(CriticalPeaks, SimpleOverlap) {
  Trs R = parse_cops("(VAR x)(RULES f(g(x)) -> a g(b) -> c)");
  auto cps = critical_peaks(R);
  ASSERT_EQ(cps.size(), 1u);
  EXPECT_EQ(cps[0].source, T("f(g(b))"));
  EXPECT_EQ(cps[0].left, T("f(c)"));
  EXPECT_EQ(cps[0].right, T("a"));
  EXPECT_FALSE(cps[0].overlay());
  EXPECT_TRUE(peak_replays(cps[0], R, R));
}

TEST(CriticalPeaks, RootSelfOverlapOfTheSameRuleIsExcluded) {
  Trs R = parse_cops("(VAR x)(RULES f(x) -> g(x))");
  EXPECT_TRUE(critical_peaks(R).empty());
  EXPECT_TRUE(parallel_critical_peaks(R).empty());
}

TEST(CriticalPeaks, OrthogonalSystemHasNone) {
  EXPECT_TRUE(parallel_critical_peaks(load("orthogonal.trs")).empty());
}

TEST(ParallelCriticalPeaks, AlmostClosed) {
  Trs R = load("almost_closed.trs");
  auto cps = critical_peaks(R);
  EXPECT_EQ(cps.size(), 4u);  // the 3/4 overlay in both orientations
  std::set<std::set<Term>> unordered;
  for (const Peak& pk : cps) unordered.insert({pk.left, pk.right});
  EXPECT_EQ(unordered.size(), 3u);
  auto pcps = parallel_critical_peaks(R);
  EXPECT_EQ(pcps.size(), 5u);
  // The peak with both a-redexes contracted in parallel.
  bool found = false;
  for (const Peak& pk : pcps)
    if (pk.positions() == PositionSet{Position({1}), Position({2})}) {
      found = true;
      EXPECT_EQ(pk.source, T("f(a(x),a(y))"));
      EXPECT_EQ(pk.left, T("f(b(x),b(y))"));
      EXPECT_EQ(pk.right, T("g(f(a(x),a(y)))"));
      EXPECT_EQ(pk.root, 2);
    }
  EXPECT_TRUE(found);
  for (const Peak& pk : pcps) EXPECT_TRUE(peak_replays(pk, R, R)) << pk.str();
}

TEST(ParallelCriticalPeaks, Cops62HasSixNontrivialPairs) {
  Trs R = load("cops62.trs");
  std::set<Pair> want;
  for (auto [t, u] : std::vector<std::pair<std::string, std::string>>{
           {"x", "gcd(0,mod(x,0))"},
           {"y", "gcd(y,mod(0,y))"},
           {"0", "if(<(0,s(y)),0,mod(-(0,s(y)),s(y)))"}}) {
    want.insert(canon_pair(T(t), T(u)));
    want.insert(canon_pair(T(u), T(t)));
  }
  EXPECT_EQ(nontrivial_pairs(parallel_critical_peaks(R)), want);
}

TEST(ParallelCriticalPeaks, SuccPredInfMatchesCriticalPairs) {
  Trs R = load("succ_pred_inf.trs");
  auto cps = critical_peaks(R);
  ASSERT_EQ(cps.size(), 2u);
  std::set<Term> sources{cps[0].source, cps[1].source};
  Term a = T("s(p(s(x)))"), b = T("p(s(p(x)))");
  EXPECT_EQ(sources.size(), 2u);
  for (const Peak& pk : cps) EXPECT_TRUE(are_variants(pk.source, a) || are_variants(pk.source, b));
}

TEST(Pcps, IntPlusWithC3MatchesEightRules) {
  Trs R = load("int_plus.trs");
  Trs C = R.subsystem({3});
  Cps P = pcps(R, [&](const Term& t, const Term& u) {
    return convertible(t, u, C, 10).conversion.has_value();
  });
  std::set<Pair> got;
  for (const Rule& r : P.rules.rules()) got.insert(canon_pair(r.lhs, r.rhs));
  std::set<Pair> want;
  for (auto [l, r] : std::vector<std::pair<std::string, std::string>>{
           {"+(0,s(x))", "s(+(0,x))"},
           {"+(0,s(x))", "+(s(x),0)"},
           {"+(0,p(x))", "p(+(0,x))"},
           {"+(0,p(x))", "+(p(x),0)"},
           {"+(x,s(p(y)))", "s(+(x,p(y)))"},
           {"+(x,s(p(y)))", "+(x,y)"},
           {"+(x,p(s(y)))", "p(+(x,s(y)))"},
           {"+(x,p(s(y)))", "+(x,y)"}})
    want.insert(canon_pair(T(l), T(r)));
  EXPECT_EQ(got, want);
  // Without the oracle the peak 0 <- 0+0 -> 0+0 contributes 0+0 -> 0+0.
  Cps full = pcps(R, nullptr);
  bool loop = false;
  for (const Rule& r : full.rules.rules()) loop |= r.lhs == T("+(0,0)") && r.rhs == r.lhs;
  EXPECT_TRUE(loop);
}

TEST(Pcps, RulesAreNumberedFromOne) {
  Cps P = pcps(load("succ_pred_inf.trs"), nullptr);
  ASSERT_FALSE(P.rules.empty());
  EXPECT_EQ(*P.rules.ids().begin(), 1);
  EXPECT_EQ(P.rules.size(), 4u);
}
