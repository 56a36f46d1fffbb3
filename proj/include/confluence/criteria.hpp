// SPDX-License-Identifier: Apache-2.0
//
// criteria.hpp - Confluence criteria producing proof trees, the recursive
// compositional driver, and the audit that re-checks every proof.

#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "confluence/cp.hpp"
#include "confluence/reduction.hpp"
#include "confluence/sat.hpp"
#include "confluence/search.hpp"
#include "confluence/termination.hpp"
#include "confluence/trs.hpp"

namespace confluence {

// ---------------------------------------------------------------------------
// Configuration

inline const std::vector<std::string>& criterion_names() {
  static const std::vector<std::string> names{"reduce", "ortho", "rl",     "cps",     "kb",
                                              "huet",   "almost", "gramlich", "t81"};
  return names;
}

struct Config {
  std::size_t join_bound = 5;
  std::size_t conversion_budget = 10;
  int label_bound = 2;
  int label_bound_max = 3;
  std::size_t k = 5;
  int depth = 8;
  std::vector<std::string> criteria = criterion_names();
  bool independent_labels = false;
  double timeout_seconds = 60;
  std::string dimacs_dir;
  std::size_t candidate_cap = 4096;
  std::size_t diagram_budget = 5;
  std::size_t diagram_cap = kDiagramCap;
  long long poly_bound = 2;
  long long poly_bound_max = 3;

  bool enabled(const std::string& name) const {
    return std::find(criteria.begin(), criteria.end(), name) != criteria.end();
  }
};

class Timeout : public std::runtime_error {
 public:
  Timeout() : std::runtime_error("timeout") {}
};

class Deadline {
 public:
  explicit Deadline(double seconds)
      : end_(std::chrono::steady_clock::now() +
             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 std::chrono::duration<double>(seconds))) {}
  void check() const {
    if (std::chrono::steady_clock::now() > end_) throw Timeout();
  }

 private:
  std::chrono::steady_clock::time_point end_;
};

// ---------------------------------------------------------------------------
// Witnesses and proof trees

/// t ⇻ v by `par`, and u ->* v by `back` (empty when v = u).
struct ParallelCloseWitness {
  Peak peak;
  std::vector<Step> par;
  Term v;
  RewriteSequence back;
};

/// t ->* u.
struct ReachWitness {
  Peak peak;
  RewriteSequence seq;
};

/// t ->* v and u ⇻_{P'} v with Var(v, P') ⊆ Var(s, P).
struct VarCondWitness {
  Peak peak;
  RewriteSequence seq;
  std::vector<Step> par;
  PositionSet p_prime;
};

/// t ↔* u within the subsystem of the node.
struct ConversionWitness {
  Peak peak;
  Conversion conv;
};

struct JoinWitness {
  Peak peak;
  Join join;
};

struct DiagramChoice {
  Peak peak;
  bool mirrored = false;  // the (φ,ψ) orientation of the peak
  ClosingDiagram diagram;
};

struct LabelingWitness {
  std::map<int, int> phi, psi;
  int bound = 0;
  std::vector<DiagramChoice> choices;
  sat::Cnf cnf;
  sat::Model model;
};

struct TerminationWitness {
  Trs P;
  Trs R;
  RelTerminationCertificate cert;
};

struct ReductionWitness {
  std::vector<ReductionStep> steps;
};

using Witness = std::variant<ParallelCloseWitness, ReachWitness, VarCondWitness,
                             ConversionWitness, JoinWitness, LabelingWitness,
                             TerminationWitness, ReductionWitness>;

struct ProofNode;
using ProofPtr = std::shared_ptr<const ProofNode>;

struct ProofNode {
  std::string criterion;  // empty, orthogonal, huet, almost, gramlich, t81, ortho, rl, cps, kb, reduce
  Trs system;
  std::optional<RuleSet> subsystem;  // C for compositional criteria
  std::vector<Witness> witnesses;
  std::vector<ProofPtr> children;
};

struct Verdict {
  bool confluent = false;
  ProofPtr proof;
  std::vector<std::string> notes;
};

/// Result of a single criterion attempt.
struct Outcome {
  ProofPtr proof;
  std::vector<std::string> notes;
  bool inapplicable = false;

  explicit operator bool() const { return proof != nullptr; }
};

using SubProver = std::function<ProofPtr(const Trs&)>;

inline std::string criterion_title(const std::string& c) {
  static const std::map<std::string, std::string> titles{
      {"empty", "empty system"},
      {"orthogonal", "orthogonality (left-linear, no critical pairs)"},
      {"huet", "parallel closedness"},
      {"almost", "almost parallel closedness"},
      {"gramlich", "parallel critical pair closedness (Gramlich)"},
      {"t81", "parallel critical pair closedness with variable condition (Toyama)"},
      {"ortho", "compositional orthogonality"},
      {"rl", "compositional rule labeling"},
      {"cps", "parallel critical pair systems"},
      {"kb", "Knuth-Bendix criterion"},
      {"reduce", "reduction method"}};
  auto it = titles.find(c);
  return it == titles.end() ? c : it->second;
}

// ---------------------------------------------------------------------------
// Labels

struct Labels {
  std::map<int, int> phi, psi;
};

/// Numeric check of decreasingness for one peak orientation and diagram.
/// left_lab labels the ⇻ side of the peak, root_lab its root step; steps on
/// the t side use fwd, steps on the u side use bwd.
inline bool diagram_decreasing(const Peak& peak, const ClosingDiagram& d,
                               const std::map<int, int>& left_lab,
                               const std::map<int, int>& root_lab,
                               const std::map<int, int>& fwd, const std::map<int, int>& bwd) {
  int k = 0;
  for (int id : peak.left_rules()) k = std::max(k, left_lab.at(id));
  int m = root_lab.at(peak.root);
  int km = std::max(k, m);
  for (int g : d.left_atoms.prefix)
    if (!(fwd.at(g) < k)) return false;
  for (int g : d.left_atoms.parallel)
    if (!(fwd.at(g) <= m)) return false;
  for (int g : d.left_atoms.middle)
    if (!(fwd.at(g) < km)) return false;
  for (int g : d.right_atoms.prefix)
    if (!(bwd.at(g) < m)) return false;
  for (int g : d.right_atoms.parallel)
    if (!(bwd.at(g) <= k)) return false;
  for (int g : d.right_atoms.middle)
    if (!(bwd.at(g) < km)) return false;
  return true;
}

/// Whether a peak is at level (0,0), i.e. uses only rules of C.
inline bool level_zero(const Peak& peak, const RuleSet& C) {
  if (!C.contains(peak.root)) return false;
  for (int id : peak.left_rules())
    if (!C.contains(id)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Audit

namespace detail {

template <class W>
std::vector<const W*> witnesses_of(const ProofNode& n) {
  std::vector<const W*> out;
  for (const Witness& w : n.witnesses)
    if (const W* p = std::get_if<W>(&w)) out.push_back(p);
  return out;
}

template <class W>
const W* witness_for(const ProofNode& n, const Peak& pk) {
  for (const Witness& w : n.witnesses)
    if (const W* p = std::get_if<W>(&w))
      if (p->peak == pk) return p;
  return nullptr;
}

inline bool parallel_close_ok(const Trs& R, const ParallelCloseWitness& w, bool allow_back) {
  try {
    if (!(replay_parallel(R, w.peak.left, w.par) == w.v)) return false;
  } catch (const std::exception&) {
    return false;
  }
  PositionSet ps;
  for (const Step& s : w.par) ps.insert(s.position);
  if (ps.size() != w.par.size() || !is_parallel_set(ps)) return false;
  if (!allow_back && !w.back.steps.empty()) return false;
  return w.back.start == w.peak.right && w.back.end() == w.v && replays(R, w.back);
}

inline bool same_ids(const Trs& a, const RuleSet& ids) { return a.ids() == ids; }

}  // namespace detail

/// Mechanically re-checks a proof tree: recomputes the peaks each criterion
/// quantifies over and replays or re-verifies every witness.
inline bool audit(const ProofNode& n, const Config& cfg = {}) {
  const Trs& R = n.system;
  const std::string& c = n.criterion;
  auto child_ok = [&](const RuleSet& C) {
    return n.children.size() == 1 && detail::same_ids(n.children[0]->system, C) &&
           n.children[0]->system.rules().size() == C.size() && audit(*n.children[0], cfg);
  };
  try {
    if (c == "empty") return R.empty();
    if (c == "orthogonal") return is_left_linear(R) && critical_peaks(R).empty();
    if (c == "huet" || c == "almost" || c == "gramlich" || c == "t81") {
      if (!is_left_linear(R)) return false;
      for (const Peak& pk : critical_peaks(R)) {
        const auto* w = detail::witness_for<ParallelCloseWitness>(n, pk);
        bool back = (c != "huet") && (c != "almost" || pk.overlay());
        if (!w || !detail::parallel_close_ok(R, *w, back)) return false;
      }
      if (c == "gramlich") {
        for (const Peak& pk : parallel_critical_peaks(R)) {
          if (pk.overlay()) continue;
          const auto* w = detail::witness_for<ReachWitness>(n, pk);
          if (!w || !(w->seq.start == pk.left) || !(w->seq.end() == pk.right) ||
              !replays(R, w->seq))
            return false;
        }
      }
      if (c == "t81") {
        for (const Peak& pk : parallel_critical_peaks(R)) {
          const auto* w = detail::witness_for<VarCondWitness>(n, pk);
          if (!w || !(w->seq.start == pk.left) || !replays(R, w->seq)) return false;
          if (!(replay_parallel(R, pk.right, w->par) == w->seq.end())) return false;
          PositionSet ps;
          for (const Step& s : w->par) ps.insert(s.position);
          if (ps != w->p_prime || !is_parallel_set(ps)) return false;
          VariableSet vs = vars_at(w->seq.end(), ps);
          VariableSet allowed = vars_at(pk.source, pk.positions());
          if (!std::includes(allowed.begin(), allowed.end(), vs.begin(), vs.end())) return false;
        }
      }
      return true;
    }
    if (c == "kb") {
      auto tw = detail::witnesses_of<TerminationWitness>(n);
      if (tw.size() != 1 || tw[0]->P.ids() != R.ids() || !tw[0]->R.empty()) return false;
      for (const Rule& r : R.rules())
        if (!(tw[0]->P.rule(r.id).lhs == r.lhs) || !(tw[0]->P.rule(r.id).rhs == r.rhs))
          return false;
      if (!verify_certificate(tw[0]->cert, tw[0]->P, tw[0]->R)) return false;
      for (const Peak& pk : critical_peaks(R)) {
        const auto* w = detail::witness_for<JoinWitness>(n, pk);
        if (!w || !(w->join.left.start == pk.left) || !(w->join.right.start == pk.right) ||
            !(w->join.left.end() == w->join.right.end()) || !replays(R, w->join.left) ||
            !replays(R, w->join.right))
          return false;
      }
      return true;
    }
    if (!n.subsystem && c != "reduce") return false;
    if (c == "ortho") {
      const RuleSet& C = *n.subsystem;
      if (!is_left_linear(R)) return false;
      Trs sub = R.subsystem(C);
      for (const Peak& pk : parallel_critical_peaks(R)) {
        const auto* w = detail::witness_for<ConversionWitness>(n, pk);
        if (!w || !(w->conv.start() == pk.left) || !(w->conv.end() == pk.right) ||
            !replays(sub, w->conv))
          return false;
      }
      return child_ok(C);
    }
    if (c == "cps") {
      const RuleSet& C = *n.subsystem;
      if (!is_left_linear(R)) return false;
      Trs sub = R.subsystem(C);
      auto tw = detail::witnesses_of<TerminationWitness>(n);
      if (tw.size() != 1) return false;
      const Trs& P = tw[0]->P;
      if (tw[0]->R.ids() != R.ids()) return false;
      for (const Rule& r : R.rules())
        if (!(tw[0]->R.rule(r.id).lhs == r.lhs) || !(tw[0]->R.rule(r.id).rhs == r.rhs))
          return false;
      auto in_P = [&](const Term& s, const Term& t) {
        Term pair[] = {s, t};
        for (const Rule& r : P.rules()) {
          Term q[] = {r.lhs, r.rhs};
          if (are_variants(pair, q)) return true;
        }
        return false;
      };
      for (const Peak& pk : parallel_critical_peaks(R)) {
        const auto* j = detail::witness_for<JoinWitness>(n, pk);
        if (!j || !(j->join.left.start == pk.left) || !(j->join.right.start == pk.right) ||
            !(j->join.left.end() == j->join.right.end()) || !replays(R, j->join.left) ||
            !replays(R, j->join.right))
          return false;
        bool covered = in_P(pk.source, pk.left) && in_P(pk.source, pk.right);
        if (!covered) {
          const auto* cw = detail::witness_for<ConversionWitness>(n, pk);
          if (!cw || !(cw->conv.start() == pk.left) || !(cw->conv.end() == pk.right) ||
              !replays(sub, cw->conv))
            return false;
        }
      }
      if (!verify_certificate(tw[0]->cert, P, tw[0]->R)) return false;
      return child_ok(C);
    }
    if (c == "rl") {
      const RuleSet& C = *n.subsystem;
      if (!is_left_linear(R)) return false;
      auto lw = detail::witnesses_of<LabelingWitness>(n);
      if (lw.size() != 1) return false;
      const LabelingWitness& L = *lw[0];
      for (const Rule& r : R.rules()) {
        for (const auto* lab : {&L.phi, &L.psi}) {
          auto it = lab->find(r.id);
          if (it == lab->end() || it->second < 0 || it->second > L.bound) return false;
          if ((it->second == 0) != C.contains(r.id)) return false;
        }
      }
      if (!sat::satisfies(L.model, L.cnf)) return false;
      bool independent = L.phi != L.psi;
      for (const Peak& pk : parallel_critical_peaks(R)) {
        if (level_zero(pk, C)) continue;
        for (bool mirrored : {false, true}) {
          if (mirrored && !independent) continue;
          const DiagramChoice* ch = nullptr;
          for (const DiagramChoice& d : L.choices)
            if (d.peak == pk && d.mirrored == mirrored) ch = &d;
          if (!ch || !diagram_valid(ch->diagram, pk, R, cfg.diagram_budget)) return false;
          bool ok = mirrored ? diagram_decreasing(pk, ch->diagram, L.psi, L.phi, L.phi, L.psi)
                             : diagram_decreasing(pk, ch->diagram, L.phi, L.psi, L.psi, L.phi);
          if (!ok) return false;
        }
      }
      return child_ok(C);
    }
    if (c == "reduce") {
      auto rw = detail::witnesses_of<ReductionWitness>(n);
      if (rw.size() != 1 || rw[0]->steps.empty()) return false;
      RuleSet cur = R.ids();
      for (const ReductionStep& st : rw[0]->steps) {
        if (st.input.ids() != cur || !verify_reduction_step(st)) return false;
        for (const Rule& r : st.input.rules())
          if (!(R.rule(r.id).lhs == r.lhs) || !(R.rule(r.id).rhs == r.rhs)) return false;
        cur = st.chosen;
      }
      return is_left_linear(R) && child_ok(cur);
    }
  } catch (const std::exception&) {
    return false;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Prover

class Prover {
 public:
  explicit Prover(Config cfg = {}) : cfg_(std::move(cfg)), deadline_(cfg_.timeout_seconds) {}

  const Config& config() const { return cfg_; }

  // -- Closedness criteria ---------------------------------------------------

  Outcome huet_parallel_closed(const Trs& R) {
    if (!is_left_linear(R)) return inapplicable("huet");
    auto node = make_node("huet", R);
    for (const Peak& pk : critical_peaks(R)) {
      tick();
      auto par = parallel_step_to(pk.left, pk.right, R);
      if (!par)
        return fail("huet: critical pair not closed by a parallel step: " + pk.left.str() +
                    " -/||-> " + pk.right.str());
      node->witnesses.push_back(
          ParallelCloseWitness{pk, *par, pk.right, empty_sequence(pk.right)});
    }
    return done(node);
  }

  Outcome almost_parallel_closed(const Trs& R) {
    if (!is_left_linear(R)) return inapplicable("almost");
    auto node = make_node("almost", R);
    for (const Peak& pk : critical_peaks(R)) {
      tick();
      if (!pk.overlay()) {
        auto par = parallel_step_to(pk.left, pk.right, R);
        if (!par)
          return fail("almost: inner critical pair not closed by a parallel step: " +
                      pk.left.str() + " -/||-> " + pk.right.str());
        node->witnesses.push_back(
            ParallelCloseWitness{pk, *par, pk.right, empty_sequence(pk.right)});
        continue;
      }
      auto w = parallel_then_back(pk, R);
      if (!w)
        return fail("almost: overlay pair not closed by ||-> . <-*: " + pk.left.str() +
                    " / " + pk.right.str());
      node->witnesses.push_back(*w);
    }
    return done(node);
  }

  Outcome gramlich(const Trs& R) {
    if (!is_left_linear(R)) return inapplicable("gramlich");
    auto node = make_node("gramlich", R);
    for (const Peak& pk : critical_peaks(R)) {
      tick();
      auto w = parallel_then_back(pk, R);
      if (!w)
        return fail("gramlich: critical pair not closed by ||-> . <-*: " + pk.left.str() +
                    " / " + pk.right.str());
      node->witnesses.push_back(*w);
    }
    for (const Peak& pk : parallel_critical_peaks(R)) {
      tick();
      if (pk.overlay()) continue;
      auto seq = reachable(pk.left, pk.right, R, cfg_.join_bound);
      if (!seq)
        return fail("gramlich: " + pk.left.str() + " -/->* " + pk.right.str() +
                    " (within " + std::to_string(cfg_.join_bound) + " steps)");
      node->witnesses.push_back(ReachWitness{pk, *seq});
    }
    return done(node);
  }

  Outcome toyama_pcp_closed(const Trs& R) {
    if (!is_left_linear(R)) return inapplicable("t81");
    auto node = make_node("t81", R);
    for (const Peak& pk : critical_peaks(R)) {
      tick();
      auto w = parallel_then_back(pk, R);
      if (!w)
        return fail("t81: critical pair not closed by ||-> . <-*: " + pk.left.str() + " / " +
                    pk.right.str());
      node->witnesses.push_back(*w);
    }
    for (const Peak& pk : parallel_critical_peaks(R)) {
      tick();
      auto w = var_condition_close(pk, R);
      if (!w)
        return fail("t81: no t ->* v <-||-_P' u with Var(v,P') in Var(s,P) for " +
                    pk.str());
      node->witnesses.push_back(*w);
    }
    return done(node);
  }

  /// t ->* v <-||-_{P'} u with the variable condition; v in BFS order from t.
  std::optional<VarCondWitness> var_condition_close(const Peak& pk, const Trs& R) {
    VariableSet allowed = vars_at(pk.source, pk.positions());
    Reducts fwd(pk.left, R, cfg_.join_bound);
    ParallelSuccessors ps = parallel_successors(pk.right, R);
    std::optional<VarCondWitness> best;
    std::size_t best_depth = SIZE_MAX;
    std::size_t best_order = SIZE_MAX;
    std::map<Term, std::size_t> order;
    for (std::size_t i = 0; i < fwd.order().size(); ++i) order.emplace(fwd.order()[i], i);
    for (const ParallelSuccessor& p : ps.items) {
      auto it = order.find(p.term);
      if (it == order.end()) continue;
      VariableSet vs = vars_at(p.term, p.positions);
      if (!std::includes(allowed.begin(), allowed.end(), vs.begin(), vs.end())) continue;
      std::size_t d = fwd.depth(p.term);
      if (d < best_depth || (d == best_depth && it->second < best_order)) {
        best_depth = d;
        best_order = it->second;
        best = VarCondWitness{pk, fwd.path_to(p.term), p.steps, p.positions};
      }
    }
    return best;
  }

  // -- Knuth-Bendix ----------------------------------------------------------

  Outcome knuth_bendix(const Trs& R) {
    auto cert = prove_termination(R);
    if (!cert) return fail("kb: termination not shown");
    auto node = make_node("kb", R);
    node->witnesses.push_back(TerminationWitness{R, Trs{}, *cert});
    for (const Peak& pk : critical_peaks(R)) {
      tick();
      auto j = join_terminating(pk.left, pk.right, R);
      if (!j)
        return fail("kb: critical pair not joinable: " + pk.left.str() + " / " +
                    pk.right.str());
      node->witnesses.push_back(JoinWitness{pk, *j});
    }
    return done(node);
  }

  // -- Compositional criteria ------------------------------------------------

  Outcome orthogonality_comp(const Trs& R, const RuleSet& C, const SubProver& prove_C) {
    if (!is_left_linear(R)) return inapplicable("ortho");
    Trs sub = R.subsystem(C);
    auto node = make_node("ortho", R);
    node->subsystem = C;
    for (const Peak& pk : peaks(R)) {
      tick();
      ConversionResult c = convertible(pk.left, pk.right, sub, cfg_.conversion_budget);
      if (!c.conversion)
        return fail("ortho " + to_string(C) + ": no conversion " + pk.left.str() +
                    " <->* " + pk.right.str() + (c.exhausted ? " (search exhausted)" : ""));
      node->witnesses.push_back(ConversionWitness{pk, *c.conversion});
    }
    return with_child(node, sub, prove_C, "ortho " + to_string(C));
  }

  Outcome rule_labeling_comp(const Trs& R, const RuleSet& C, int bound,
                             const SubProver& prove_C) {
    if (!is_left_linear(R)) return inapplicable("rl");
    auto lab = find_labeling(R, C, bound);
    if (!lab) return fail("rl " + to_string(C) + ": no labeling with bound " +
                          std::to_string(bound));
    auto node = make_node("rl", R);
    node->subsystem = C;
    node->witnesses.push_back(std::move(*lab));
    return with_child(node, R.subsystem(C), prove_C, "rl " + to_string(C));
  }

  /// Labels in [0, bound], zero exactly on C, making every peak outside
  /// level (0,0) decreasing via one of its candidate diagrams.
  std::optional<LabelingWitness> find_labeling(const Trs& R, const RuleSet& C, int bound) {
    sat::Cnf f;
    sat::Circuit c(f);
    bool indep = cfg_.independent_labels;
    // ge[lab][id][i] : label >= i, i = 1..bound
    std::map<int, std::vector<sat::Lit>> ge_phi, ge_psi;
    for (const Rule& r : R.rules()) {
      for (auto* ge : {&ge_phi, &ge_psi}) {
        if (ge == &ge_psi && !indep) continue;
        std::vector<sat::Lit> v(static_cast<std::size_t>(bound) + 1, c.top());
        for (int i = 1; i <= bound; ++i) {
          if (C.contains(r.id)) v[i] = c.bottom();
          else if (i == 1) v[i] = c.top();
          else v[i] = c.fresh();
        }
        for (int i = 2; i <= bound; ++i) f.add({-v[i], v[i - 1]});
        (*ge)[r.id] = std::move(v);
      }
    }
    if (!indep) ge_psi = ge_phi;
    auto ge = [&](const std::map<int, std::vector<sat::Lit>>& lab, int id, int i) {
      if (i <= 0) return c.top();
      if (i > bound) return c.bottom();
      return lab.at(id)[i];
    };
    auto lt = [&](const auto& la, int a, const auto& lb, int b) {
      std::vector<sat::Lit> alts;
      for (int i = 1; i <= bound; ++i) alts.push_back(c.and_(ge(lb, b, i), -ge(la, a, i)));
      return c.or_(alts);
    };
    auto le = [&](const auto& la, int a, const auto& lb, int b) {
      std::vector<sat::Lit> parts;
      for (int i = 1; i <= bound; ++i) parts.push_back(c.implies(ge(la, a, i), ge(lb, b, i)));
      return c.and_(parts);
    };

    struct Slot {
      const Peak* peak;
      bool mirrored;
      std::vector<std::pair<sat::Lit, const ClosingDiagram*>> options;
    };
    std::vector<Slot> slots;
    for (const Peak& pk : peaks(R)) {
      if (level_zero(pk, C)) continue;
      tick();
      const DiagramResult& dr = diagrams(R, pk);
      for (bool mirrored : {false, true}) {
        if (mirrored && !indep) continue;
        const auto& L = mirrored ? ge_psi : ge_phi;    // labels the ⇻ side
        const auto& M = mirrored ? ge_phi : ge_psi;    // labels the root step
        const auto& F = M;                             // t-side steps
        const auto& B = L;                             // u-side steps
        RuleSet left = pk.left_rules();
        auto lt_k = [&](const auto& lab, int g) {
          std::vector<sat::Lit> alts;
          for (int a : left) alts.push_back(lt(lab, g, L, a));
          return c.or_(alts);
        };
        auto le_k = [&](const auto& lab, int g) {
          std::vector<sat::Lit> alts;
          for (int a : left) alts.push_back(le(lab, g, L, a));
          return c.or_(alts);
        };
        Slot slot{&pk, mirrored, {}};
        for (const ClosingDiagram& d : dr.diagrams) {
          std::vector<sat::Lit> parts;
          for (int g : d.left_atoms.prefix) parts.push_back(lt_k(F, g));
          for (int g : d.left_atoms.parallel) parts.push_back(le(F, g, M, pk.root));
          for (int g : d.left_atoms.middle)
            parts.push_back(c.or_(lt_k(F, g), lt(F, g, M, pk.root)));
          for (int g : d.right_atoms.prefix) parts.push_back(lt(B, g, M, pk.root));
          for (int g : d.right_atoms.parallel) parts.push_back(le_k(B, g));
          for (int g : d.right_atoms.middle)
            parts.push_back(c.or_(lt_k(B, g), lt(B, g, M, pk.root)));
          sat::Lit sel = c.and_(parts);
          if (sel == c.bottom()) continue;
          slot.options.emplace_back(sel, &d);
        }
        if (slot.options.empty()) return std::nullopt;
        std::vector<sat::Lit> any;
        for (const auto& [sel, _] : slot.options) any.push_back(sel);
        c.assert_(c.or_(any));
        slots.push_back(std::move(slot));
      }
    }
    auto m = sat::solve(f);
    if (!m) return std::nullopt;
    LabelingWitness w;
    w.bound = bound;
    w.cnf = f;
    w.model = *m;
    auto decode = [&](const std::map<int, std::vector<sat::Lit>>& lab) {
      std::map<int, int> out;
      for (const auto& [id, v] : lab) {
        int val = 0;
        for (int i = 1; i <= bound; ++i)
          if (sat::lit_true(*m, v[i])) val = i;
        out[id] = val;
      }
      return out;
    };
    w.phi = decode(ge_phi);
    w.psi = indep ? decode(ge_psi) : w.phi;
    for (const Slot& s : slots) {
      const ClosingDiagram* chosen = nullptr;
      for (const auto& [sel, d] : s.options) {
        bool ok = s.mirrored ? diagram_decreasing(*s.peak, *d, w.psi, w.phi, w.phi, w.psi)
                             : diagram_decreasing(*s.peak, *d, w.phi, w.psi, w.psi, w.phi);
        if (ok) {
          chosen = d;
          break;
        }
      }
      if (!chosen) return std::nullopt;  // encoding and decoding disagree
      w.choices.push_back(DiagramChoice{*s.peak, s.mirrored, *chosen});
    }
    return w;
  }

  Outcome pcpsc(const Trs& R, const RuleSet& C, const SubProver& prove_C) {
    if (!is_left_linear(R)) return inapplicable("cps");
    std::string tag = "cps " + to_string(C);
    auto node = make_node("cps", R);
    node->subsystem = C;
    for (const Peak& pk : peaks(R)) {
      tick();
      const JoinResult& j = join(R, pk);
      if (!j.join)
        return fail(tag + ": parallel critical pair not joinable: " + pk.left.str() + " / " +
                    pk.right.str());
      node->witnesses.push_back(JoinWitness{pk, *j.join});
    }
    Trs sub = R.subsystem(C);
    std::map<std::pair<Term, Term>, Conversion> convs;
    Cps P = pcps(R, [&](const Term& t, const Term& u) {
      tick();
      ConversionResult cr = convertible(t, u, sub, cfg_.conversion_budget);
      if (cr.conversion) convs.emplace(std::make_pair(t, u), *cr.conversion);
      return cr.conversion.has_value();
    });
    for (const Peak& pk : P.peaks) {
      auto it = convs.find({pk.left, pk.right});
      if (it != convs.end()) node->witnesses.push_back(ConversionWitness{pk, it->second});
    }
    std::optional<RelTerminationCertificate> cert;
    for (long long b = cfg_.poly_bound; b <= cfg_.poly_bound_max && !cert; ++b) {
      tick();
      cert = poly_prove_relative(P.rules, R, b);
    }
    if (!cert)
      return fail(tag + ": relative termination of PCPS(R,C)/R not shown (" +
                  std::to_string(P.rules.size()) + " rules)");
    node->witnesses.push_back(TerminationWitness{P.rules, R, *cert});
    return with_child(node, sub, prove_C, tag);
  }

  // -- Driver ----------------------------------------------------------------

  Verdict prove_confluence(const Trs& R) {
    Verdict v;
    try {
      ProofPtr p = prove(R, cfg_.depth, Strategy::Default);
      if (p && audit(*p, cfg_)) {
        v.confluent = true;
        v.proof = p;
      } else if (p) {
        notes_.push_back("internal: proof failed the audit");
      }
    } catch (const Timeout&) {
      notes_.push_back("timeout after " + std::to_string(cfg_.timeout_seconds) + " s");
    }
    if (!v.confluent) v.notes = notes_;
    return v;
  }

  enum class Strategy { Default, LabelingFirst, CpsFirst };

  /// Recursive prover used for subsystems.
  ProofPtr prove(const Trs& R, int depth, Strategy strategy) {
    tick();
    std::string key = memo_key(R);
    if (auto it = proved_.find(key); it != proved_.end()) return rebase(it->second, R);
    if (auto it = failed_.find(key); it != failed_.end() && it->second >= depth) return nullptr;

    ProofPtr p = prove_uncached(R, depth, strategy);
    if (p) proved_[key] = p;
    else failed_[key] = std::max(depth, failed_[key]);
    return p;
  }

  const std::vector<std::string>& notes() const { return notes_; }

  /// Subsystem candidates: ∅, the closing-witness union, then all proper
  /// subsets by ascending size, without repetition, at most candidate_cap.
  std::vector<RuleSet> candidates(const Trs& R) {
    std::vector<RuleSet> out;
    std::set<RuleSet> seen;
    auto add = [&](const RuleSet& C) {
      if (C.size() >= R.size() || out.size() >= cfg_.candidate_cap) return;
      if (seen.insert(C).second) out.push_back(C);
    };
    add({});
    ClosingSubsystem cs = find_closing_subsystem(peaks(R), R, cfg_.conversion_budget);
    if (cs.rules) add(*cs.rules);
    RuleSet all = R.ids();
    std::vector<int> ids(all.begin(), all.end());
    std::size_t n = ids.size();
    for (std::size_t size = 1; size < n && out.size() < cfg_.candidate_cap; ++size) {
      std::vector<std::size_t> idx(size);
      for (std::size_t i = 0; i < size; ++i) idx[i] = i;
      while (true) {
        RuleSet C;
        for (std::size_t i : idx) C.insert(ids[i]);
        add(C);
        if (out.size() >= cfg_.candidate_cap) break;
        std::size_t i = size;
        while (i > 0 && idx[i - 1] == n - size + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
      }
    }
    return out;
  }

 private:
  using NodePtr = std::shared_ptr<ProofNode>;

  static NodePtr make_node(const std::string& criterion, const Trs& R) {
    auto n = std::make_shared<ProofNode>();
    n->criterion = criterion;
    n->system = R;
    return n;
  }

  Outcome done(const NodePtr& n) { return Outcome{n, {}, false}; }
  Outcome fail(const std::string& note) { return Outcome{nullptr, {note}, false}; }
  Outcome inapplicable(const std::string& name) {
    return Outcome{nullptr, {name + ": not applicable (not left-linear)"}, true};
  }

  Outcome with_child(const NodePtr& node, const Trs& sub, const SubProver& prove_C,
                     const std::string& tag) {
    ProofPtr child = prove_C ? prove_C(sub) : nullptr;
    if (!child) return fail(tag + ": subsystem not proved confluent");
    node->children.push_back(child);
    return done(node);
  }

  void tick() const { deadline_.check(); }

  std::optional<ParallelCloseWitness> parallel_then_back(const Peak& pk, const Trs& R) {
    Reducts back(pk.right, R, cfg_.join_bound);
    for (const Term& v : back.order()) {
      if (auto par = parallel_step_to(pk.left, v, R))
        return ParallelCloseWitness{pk, *par, v, back.path_to(v)};
    }
    return std::nullopt;
  }

  /// Bounded join, then comparison of innermost normal forms.
  std::optional<Join> join_terminating(const Term& t, const Term& u, const Trs& R) {
    JoinResult j = joinable(t, u, R, cfg_.join_bound);
    if (j.join) return j.join;
    RewriteSequence a = normalize(t, R), b = normalize(u, R);
    if (a.end() == b.end()) return Join{a, b};
    return std::nullopt;
  }

  RewriteSequence normalize(const Term& t, const Trs& R, std::size_t max_steps = 10000) {
    RewriteSequence seq = empty_sequence(t);
    for (std::size_t i = 0; i < max_steps; ++i) {
      std::vector<Successor> succ = successors(seq.end(), R);
      if (succ.empty()) break;
      // Innermost: the deepest redex position, leftmost among those.
      const Successor* pick = &succ[0];
      for (const Successor& s : succ)
        if (s.step.position.depth() > pick->step.position.depth()) pick = &s;
      seq.steps.push_back(pick->step);
      seq.terms.push_back(pick->term);
    }
    return seq;
  }

  // Per-system caches.
  const std::vector<Peak>& peaks(const Trs& R) {
    std::string key = memo_key(R);
    auto it = peak_cache_.find(key);
    if (it == peak_cache_.end()) it = peak_cache_.emplace(key, parallel_critical_peaks(R)).first;
    return it->second;
  }
  const DiagramResult& diagrams(const Trs& R, const Peak& pk) {
    auto key = std::make_pair(memo_key(R), pk.str());
    auto it = diagram_cache_.find(key);
    if (it == diagram_cache_.end())
      it = diagram_cache_
               .emplace(key, closing_diagrams(pk, R, cfg_.diagram_budget, cfg_.diagram_cap))
               .first;
    return it->second;
  }
  const JoinResult& join(const Trs& R, const Peak& pk) {
    auto key = std::make_pair(memo_key(R), pk.str());
    auto it = join_cache_.find(key);
    if (it == join_cache_.end())
      it = join_cache_.emplace(key, joinable(pk.left, pk.right, R, cfg_.join_bound)).first;
    return it->second;
  }

  /// Rules with their ids; proofs refer to ids, so ids are part of the key.
  static std::string memo_key(const Trs& R) { return R.str(); }

  static ProofPtr rebase(const ProofPtr& p, const Trs&) { return p; }

  SubProver sub_prover(int depth, Strategy s) {
    return [this, depth, s](const Trs& C) -> ProofPtr {
      if (depth <= 0) return nullptr;
      return prove(C, depth - 1, s);
    };
  }

  ProofPtr prove_uncached(const Trs& R, int depth, Strategy strategy) {
    if (R.empty()) return make_node("empty", R);
    bool ll = is_left_linear(R);
    if (ll && critical_peaks(R).empty()) return make_node("orthogonal", R);

    auto record = [&](const Outcome& o) {
      for (const std::string& s : o.notes)
        if (notes_.size() < 200) notes_.push_back(s);
    };

    if (ll && cfg_.enabled("reduce")) {
      ReductionOptions ro;
      ro.conversion_budget = cfg_.conversion_budget;
      if (!cfg_.dimacs_dir.empty()) {
        ro.on_encoding = [this](const Encoding& e) {
          std::filesystem::create_directories(cfg_.dimacs_dir);
          std::ofstream(std::filesystem::path(cfg_.dimacs_dir) /
                        ("reduction-" + std::to_string(++dimacs_count_) + ".cnf"))
              << sat::to_dimacs(e.cnf);
        };
      }
      std::vector<ReductionStep> steps = reduce_fixpoint(R, cfg_.k, ro);
      tick();
      if (!steps.empty()) {
        Trs C = R.subsystem(steps.back().chosen);
        ProofPtr child = prove(C, depth, strategy);
        if (child) {
          auto node = make_node("reduce", R);
          node->witnesses.push_back(ReductionWitness{std::move(steps)});
          node->children.push_back(child);
          return node;
        }
        record(fail("reduce: reduced system " + to_string(C.ids()) + " not proved confluent"));
      }
    }

    std::vector<std::string> order;
    for (const std::string& c : criterion_names())
      if (c != "reduce" && cfg_.enabled(c)) order.push_back(c);
    if (strategy == Strategy::CpsFirst) {
      auto rl = std::find(order.begin(), order.end(), "rl");
      auto cps = std::find(order.begin(), order.end(), "cps");
      if (rl != order.end() && cps != order.end() && rl < cps) std::iter_swap(rl, cps);
    }

    std::vector<RuleSet> cands;
    bool have_cands = false;
    auto get_cands = [&]() -> const std::vector<RuleSet>& {
      if (!have_cands) {
        cands = candidates(R);
        have_cands = true;
      }
      return cands;
    };

    for (const std::string& crit : order) {
      Outcome o;
      if (crit == "kb") {
        o = knuth_bendix(R);
      } else if (!ll) {
        continue;
      } else if (crit == "huet") {
        o = huet_parallel_closed(R);
      } else if (crit == "almost") {
        o = almost_parallel_closed(R);
      } else if (crit == "gramlich") {
        o = gramlich(R);
      } else if (crit == "t81") {
        o = toyama_pcp_closed(R);
      } else if (crit == "ortho") {
        for (const RuleSet& C : get_cands()) {
          o = orthogonality_comp(R, C, sub_prover(depth, strategy));
          if (o) break;
        }
        if (!o) o = fail("ortho: no candidate subsystem succeeded");
      } else if (crit == "rl") {
        for (int b = cfg_.label_bound; b <= cfg_.label_bound_max && !o; ++b)
          for (const RuleSet& C : get_cands()) {
            o = rule_labeling_comp(R, C, b, sub_prover(depth, Strategy::CpsFirst));
            if (o) break;
          }
        if (!o) o = fail("rl: no candidate subsystem succeeded");
      } else if (crit == "cps") {
        for (const RuleSet& C : get_cands()) {
          o = pcpsc(R, C, sub_prover(depth, Strategy::LabelingFirst));
          if (o) break;
        }
        if (!o) o = fail("cps: no candidate subsystem succeeded");
      }
      if (o) return o.proof;
      record(o);
    }
    return nullptr;
  }

  Config cfg_;
  Deadline deadline_;
  std::vector<std::string> notes_;
  std::map<std::string, ProofPtr> proved_;
  std::map<std::string, int> failed_;
  std::map<std::string, std::vector<Peak>> peak_cache_;
  std::map<std::pair<std::string, std::string>, DiagramResult> diagram_cache_;
  std::map<std::pair<std::string, std::string>, JoinResult> join_cache_;
  int dimacs_count_ = 0;
};

// Convenience wrappers with a default configuration.

inline Verdict prove_confluence(const Trs& R, const Config& cfg = {}) {
  return Prover(cfg).prove_confluence(R);
}

}  // namespace confluence
