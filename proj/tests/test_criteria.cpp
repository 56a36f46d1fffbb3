#include <gtest/gtest.h>

#include "common.hpp"
#include "confluence/criteria.hpp"
#include "confluence/render.hpp"

using namespace confluence;
using testing_util::load;
using testing_util::T;

namespace {

SubProver by_kb(Prover& p) {
  return [&p](const Trs& C) { return p.knuth_bendix(C).proof; };
}

SubProver by_default(Prover& p) {
  return [&p](const Trs& C) { return p.prove(C, 4, Prover::Strategy::Default); };
}

template <class W>
std::vector<W> all_of(const ProofNode& n) {
  std::vector<W> out;
  for (const Witness& w : n.witnesses)
    if (const W* p = std::get_if<W>(&w)) out.push_back(*p);
  return out;
}

bool mentions(const Outcome& o, const std::string& s) {
  for (const std::string& n : o.notes)
    if (n.find(s) != std::string::npos) return true;
  return false;
}

}  // namespace

// -- Knuth-Bendix -------------------------------------------------------------

TEST(KnuthBendix, TerminatingAndJoinable) {
  Prover p;
  Trs C = load("assoc_unit.trs").subsystem({1, 2});
  Outcome o = p.knuth_bendix(C);
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  EXPECT_TRUE(p.knuth_bendix(Trs{}));
}

TEST(KnuthBendix, NonTerminatingIsAbsent) {
  Prover p;
  Outcome o = p.knuth_bendix(load("almost_closed.trs"));
  EXPECT_FALSE(o);
  EXPECT_TRUE(mentions(o, "termination"));
}

TEST(KnuthBendix, HandlesNonLeftLinearSystems) {
  Prover p;
  Outcome o = p.knuth_bendix(load("nonlinear.trs"));
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  EXPECT_TRUE(p.huet_parallel_closed(load("nonlinear.trs")).inapplicable);
}

// -- Closedness ----------------------------------------------------------------

TEST(Huet, Examples) {
  Prover p;
  EXPECT_FALSE(p.huet_parallel_closed(load("pcp_closed.trs")));
  EXPECT_TRUE(p.huet_parallel_closed(load("orthogonal.trs")));
  // The inner pairs close by one parallel step, the overlay does not.
  Trs R = load("almost_closed.trs");
  EXPECT_FALSE(p.huet_parallel_closed(R));
  for (const Peak& pk : critical_peaks(R))
    if (!pk.overlay()) { EXPECT_TRUE(parallel_step_to(pk.left, pk.right, R)) << pk.str(); }
}

TEST(Almost, Examples) {
  Prover p;
  Outcome o = p.almost_parallel_closed(load("almost_closed.trs"));
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  EXPECT_FALSE(p.almost_parallel_closed(load("pcp_closed.trs")));
  EXPECT_TRUE(p.almost_parallel_closed(load("orthogonal.trs")));
}

TEST(Gramlich, AlmostClosedObstructionIsReported) {
  Prover p;
  Outcome o = p.gramlich(load("almost_closed.trs"));
  EXPECT_FALSE(o);
  EXPECT_TRUE(mentions(o, "f(b(x),b(y)) -/->* g(f(a(x),a(y)))"));
  EXPECT_TRUE(p.gramlich(load("orthogonal.trs")));
}

TEST(Toyama, AlmostClosedWitness) {
  Prover p;
  Outcome o = p.toyama_pcp_closed(load("almost_closed.trs"));
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  bool seen = false;
  for (const auto& w : all_of<VarCondWitness>(*o.proof)) {
    if (w.peak.positions() != PositionSet{Position({1}), Position({2})}) continue;
    seen = true;
    EXPECT_EQ(w.seq.end(), T("g(f(a(x),b(y)))"));
    EXPECT_EQ(w.p_prime, PositionSet{Position({1, 2})});
    EXPECT_EQ(vars_at(w.seq.end(), w.p_prime), (VariableSet{{"y", 0}}));
    EXPECT_EQ(vars_at(w.peak.source, w.peak.positions()), (VariableSet{{"x", 0}, {"y", 0}}));
  }
  EXPECT_TRUE(seen);
  EXPECT_TRUE(p.toyama_pcp_closed(load("pcp_closed.trs")));
  EXPECT_TRUE(p.toyama_pcp_closed(load("orthogonal.trs")));
}

// -- Compositional criteria -----------------------------------------------------

TEST(OrthogonalityComp, Cops62) {
  Prover p;
  Trs R = load("cops62.trs");
  RuleSet C{5, 7, 8, 10, 11, 13};
  Outcome o = p.orthogonality_comp(R, C, [&](const Trs& sub) {
    return p.orthogonality_comp(sub, {}, [](const Trs& e) -> ProofPtr {
             auto n = std::make_shared<ProofNode>();
             n->criterion = "empty";
             n->system = e;
             return e.empty() ? n : nullptr;
           }).proof;
  });
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  EXPECT_EQ(o.proof->children.at(0)->criterion, "ortho");
  EXPECT_EQ(o.proof->children.at(0)->children.at(0)->criterion, "empty");
}

TEST(OrthogonalityComp, TrivialPeaksWithEmptyC) {
  Prover p;
  Trs R = parse_cops("(VAR x)(RULES s(p(x)) -> x p(s(x)) -> x)");
  Outcome o = p.orthogonality_comp(R, {}, by_default(p));
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  EXPECT_FALSE(p.orthogonality_comp(load("almost_closed.trs"), {}, by_default(p)));
}

TEST(RuleLabeling, AssocUnit) {
  Prover p;
  Trs R = load("assoc_unit.trs");
  Outcome o = p.rule_labeling_comp(R, {1, 2}, 2, by_kb(p));
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  auto lab = all_of<LabelingWitness>(*o.proof).at(0);
  EXPECT_EQ(lab.phi, (std::map<int, int>{{1, 0}, {2, 0}, {3, 1}}));
  EXPECT_EQ(lab.phi, lab.psi);
  EXPECT_EQ(o.proof->children.at(0)->criterion, "kb");
}

TEST(RuleLabeling, AssocBothNeedsIndependentLabels) {
  Config shared;
  Prover p1(shared);
  Trs R = load("assoc_both.trs");
  EXPECT_FALSE(p1.rule_labeling_comp(R, {}, 2, by_default(p1)));

  Config indep;
  indep.independent_labels = true;
  Prover p2(indep);
  Outcome o = p2.rule_labeling_comp(R, {}, 2, by_default(p2));
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof, indep));
  auto lab = all_of<LabelingWitness>(*o.proof).at(0);
  EXPECT_EQ(lab.phi, (std::map<int, int>{{1, 1}, {2, 1}}));
  EXPECT_EQ(lab.psi, (std::map<int, int>{{1, 2}, {2, 2}}));
}

TEST(RuleLabeling, IntPlusFailsWithoutSubsystem) {
  Prover p;
  Trs R = load("int_plus.trs");
  for (int b = 1; b <= 3; ++b) EXPECT_FALSE(p.find_labeling(R, {}, b)) << b;
}

TEST(RuleLabeling, LevelZeroSetEqualsC) {
  Prover p;
  Trs R = load("int_plus.trs");
  for (const RuleSet& C : p.candidates(R)) {
    auto lab = p.find_labeling(R, C, 2);
    if (!lab) continue;
    RuleSet zero;
    for (const auto& [id, l] : lab->phi)
      if (l == 0) zero.insert(id);
    EXPECT_EQ(zero, C);
    EXPECT_TRUE(sat::satisfies(lab->model, lab->cnf));
  }
}

TEST(Pcpsc, IntPlusWithC3) {
  Prover p;
  Trs R = load("int_plus.trs");
  Outcome o = p.pcpsc(R, {3}, by_default(p));
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  auto tw = all_of<TerminationWitness>(*o.proof).at(0);
  EXPECT_EQ(tw.P.size(), 8u);
  EXPECT_EQ(o.proof->children.at(0)->criterion, "orthogonal");
}

TEST(Pcpsc, AssocSuccChain) {
  Prover p;
  Trs R = load("assoc_succ.trs");
  EXPECT_FALSE(p.pcpsc(R, {}, by_default(p)));
  Outcome o = p.pcpsc(R, {1, 2, 3}, [&](const Trs& C) {
    return p.pcpsc(C, {}, [](const Trs& e) -> ProofPtr {
             auto n = std::make_shared<ProofNode>();
             n->criterion = "empty";
             n->system = e;
             return e.empty() ? n : nullptr;
           }).proof;
  });
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
  EXPECT_TRUE(all_of<TerminationWitness>(*o.proof).at(0).P.empty());
}

TEST(Pcpsc, SuccPredInfWithEmptyC) {
  Prover p;
  Outcome o = p.pcpsc(load("succ_pred_inf.trs"), {}, by_default(p));
  ASSERT_TRUE(o);
  EXPECT_TRUE(audit(*o.proof));
}

TEST(Pcpsc, NonLeftLinearIsInapplicable) {
  Prover p;
  EXPECT_TRUE(p.pcpsc(load("nonlinear.trs"), {}, by_default(p)).inapplicable);
  EXPECT_TRUE(p.rule_labeling_comp(load("nonlinear.trs"), {}, 2, by_default(p)).inapplicable);
  EXPECT_TRUE(p.orthogonality_comp(load("nonlinear.trs"), {}, by_default(p)).inapplicable);
}

// -- Driver ---------------------------------------------------------------------

TEST(Driver, Verdicts) {
  for (const char* f : {"empty.trs", "orthogonal.trs", "cops62.trs", "nat_arith.trs", "almost_closed.trs",
                        "assoc_unit.trs", "succ_pred_inf.trs", "int_plus.trs", "assoc_succ.trs", "pcp_closed.trs"}) {
    Verdict v = prove_confluence(load(f));
    EXPECT_TRUE(v.confluent) << f;
    ASSERT_TRUE(v.proof) << f;
    EXPECT_TRUE(audit(*v.proof)) << f;
  }
}

TEST(Driver, NatArithReducesToEmpty) {
  Verdict v = prove_confluence(load("nat_arith.trs"));
  ASSERT_TRUE(v.confluent);
  EXPECT_EQ(v.proof->criterion, "reduce");
  auto rw = all_of<ReductionWitness>(*v.proof).at(0);
  ASSERT_EQ(rw.steps.size(), 2u);
  EXPECT_EQ(rw.steps[0].chosen, (RuleSet{1, 2, 3}));
  EXPECT_EQ(rw.steps[1].chosen, RuleSet{});
}

TEST(Driver, CriteriaSelectionIsRespected) {
  Config cfg;
  cfg.criteria = {"huet"};
  Verdict v = prove_confluence(load("almost_closed.trs"), cfg);
  EXPECT_FALSE(v.confluent);
  EXPECT_FALSE(v.notes.empty());
  cfg.criteria = {"almost"};
  EXPECT_TRUE(prove_confluence(load("almost_closed.trs"), cfg).confluent);
  cfg.criteria = {"cps"};
  Verdict c = prove_confluence(load("assoc_succ.trs"), cfg);
  ASSERT_TRUE(c.confluent);
  EXPECT_EQ(c.proof->criterion, "cps");
}

TEST(Driver, NonConfluentSystemIsMaybe) {
  Trs R = parse_cops("(RULES a -> b a -> c)");
  Verdict v = prove_confluence(R);
  EXPECT_FALSE(v.confluent);
  EXPECT_FALSE(v.proof);
  Trs S = parse_cops("(VAR x)(RULES f(x,x) -> a f(x,g(x)) -> b c -> g(c))");
  EXPECT_FALSE(prove_confluence(S).confluent);
}

TEST(Driver, CandidatesStartEmptyAndExcludeR) {
  Prover p;
  Trs R = load("nat_arith.trs");
  auto c = p.candidates(R);
  ASSERT_FALSE(c.empty());
  EXPECT_EQ(c[0], RuleSet{});
  std::set<RuleSet> unique(c.begin(), c.end());
  EXPECT_EQ(unique.size(), c.size());
  EXPECT_EQ(c.size(), 63u);  // all proper subsets of six rules
  for (const RuleSet& s : c) EXPECT_LT(s.size(), R.size());
}

TEST(Driver, TimeoutGivesMaybe) {
  Config cfg;
  cfg.timeout_seconds = 0;
  Verdict v = prove_confluence(load("cops62.trs"), cfg);
  EXPECT_FALSE(v.confluent);
}

// -- Audit ----------------------------------------------------------------------

TEST(Audit, RejectsTamperedProofs) {
  Verdict v = prove_confluence(load("cops62.trs"));
  ASSERT_TRUE(v.confluent);
  ProofNode bad = *v.proof;
  for (Witness& w : bad.witnesses)
    if (auto* c = std::get_if<ConversionWitness>(&w); c && !c->conv.steps.empty()) {
      c->conv.terms.back() = T("unrelated");
      break;
    }
  EXPECT_FALSE(audit(bad));

  ProofNode no_child = *v.proof;
  no_child.children.clear();
  EXPECT_FALSE(audit(no_child));

  ProofNode wrong_c = *v.proof;
  wrong_c.subsystem = RuleSet{5};
  EXPECT_FALSE(audit(wrong_c));

  Prover p;
  Outcome o = p.rule_labeling_comp(load("assoc_unit.trs"), {1, 2}, 2, by_kb(p));
  ASSERT_TRUE(o);
  ProofNode lab = *o.proof;
  std::get<LabelingWitness>(lab.witnesses[0]).phi[3] = 0;
  EXPECT_FALSE(audit(lab));
}

TEST(Render, ProofMentionsCriteriaAndLabels) {
  Prover p;
  Outcome o = p.rule_labeling_comp(load("assoc_unit.trs"), {1, 2}, 2, by_kb(p));
  ASSERT_TRUE(o);
  std::string text = render_proof(*o.proof);
  EXPECT_NE(text.find("compositional rule labeling"), std::string::npos);
  EXPECT_NE(text.find("rule 3: 1"), std::string::npos);
  EXPECT_NE(text.find("Knuth-Bendix"), std::string::npos);
  EXPECT_NE(text.find("SAT assignment"), std::string::npos);
  Verdict v;
  EXPECT_EQ(render_verdict(v, false), "MAYBE\n");
}
