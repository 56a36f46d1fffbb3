// SPDX-License-Identifier: Apache-2.0
//
// render.hpp - Plain-text rendering of verdicts and proof trees.

#pragma once

#include <sstream>
#include <string>
#include <variant>

#include "confluence/criteria.hpp"

namespace confluence {

namespace detail {

inline std::string pad(int depth) { return std::string(static_cast<std::size_t>(depth) * 2, ' '); }

inline void render_sequence(std::ostream& os, const RewriteSequence& seq, int depth) {
  os << pad(depth) << seq.start.str() << "\n";
  for (std::size_t i = 0; i < seq.steps.size(); ++i)
    os << pad(depth) << "-> " << seq.terms[i + 1].str() << "   [rule " << seq.steps[i].rule
       << " at " << seq.steps[i].position.str() << "]\n";
}

inline void render_parallel(std::ostream& os, const std::vector<Step>& steps, int depth) {
  os << pad(depth) << "parallel step:";
  if (steps.empty()) os << " (empty)";
  for (const Step& s : steps) os << " rule " << s.rule << "@" << s.position.str();
  os << "\n";
}

inline void render_stage(std::ostream& os, const CertificateStage& st, int depth) {
  if (const auto* li = std::get_if<LinearInterpretation>(&st.order)) {
    os << pad(depth) << "interpretation:\n";
    for (const auto& [f, fn] : li->functions) {
      os << pad(depth + 1) << "[" << f << "] = ";
      bool first = true;
      for (std::size_t i = 0; i < fn.coeffs.size(); ++i) {
        if (fn.coeffs[i] == 0) continue;
        if (!first) os << " + ";
        if (fn.coeffs[i] != 1) os << fn.coeffs[i] << "*";
        os << "x" << (i + 1);
        first = false;
      }
      if (first || fn.constant != 0) os << (first ? "" : " + ") << fn.constant;
      os << "\n";
    }
  } else {
    os << pad(depth) << "lexicographic path order, precedence "
       << std::get<Precedence>(st.order).str() << "\n";
  }
  os << pad(depth) << "removes " << to_string(st.removed) << "\n";
}

inline void render_assignment(std::ostream& os, const sat::Model& m, int depth) {
  os << pad(depth) << "SAT assignment (true variables):";
  int shown = 0;
  for (std::size_t v = 1; v < m.size(); ++v)
    if (m[v]) {
      if (shown++ == 64) {
        os << " ...";
        break;
      }
      os << " " << v;
    }
  os << "\n";
}

struct WitnessPrinter {
  std::ostream& os;
  int depth;

  void peak(const Peak& pk) const { os << pad(depth) << "peak " << pk.str() << "\n"; }

  void operator()(const ParallelCloseWitness& w) const {
    peak(w.peak);
    render_parallel(os, w.par, depth + 1);
    if (!w.back.steps.empty()) {
      os << pad(depth + 1) << "back from u:\n";
      render_sequence(os, w.back, depth + 2);
    }
  }
  void operator()(const ReachWitness& w) const {
    peak(w.peak);
    render_sequence(os, w.seq, depth + 1);
  }
  void operator()(const VarCondWitness& w) const {
    peak(w.peak);
    render_sequence(os, w.seq, depth + 1);
    os << pad(depth + 1) << "v = " << w.seq.end().str() << ", P' = " << to_string(w.p_prime)
       << "\n";
    render_parallel(os, w.par, depth + 1);
  }
  void operator()(const ConversionWitness& w) const {
    peak(w.peak);
    os << pad(depth + 1) << w.conv.start().str() << "\n";
    for (std::size_t i = 0; i < w.conv.steps.size(); ++i) {
      const ConversionStep& s = w.conv.steps[i];
      os << pad(depth + 1) << (s.forward ? "-> " : "<- ") << w.conv.terms[i + 1].str()
         << "   [rule " << s.step.rule << " at " << s.step.position.str() << "]\n";
    }
  }
  void operator()(const JoinWitness& w) const {
    peak(w.peak);
    os << pad(depth + 1) << "join at " << w.join.meet().str() << "\n";
    render_sequence(os, w.join.left, depth + 2);
    render_sequence(os, w.join.right, depth + 2);
  }
  void operator()(const LabelingWitness& w) const {
    bool same = w.phi == w.psi;
    os << pad(depth) << "labeling (bound " << w.bound << (same ? "" : ", phi / psi") << "):\n";
    for (const auto& [id, l] : w.phi) {
      os << pad(depth + 1) << "rule " << id << ": " << l;
      if (!same) os << " / " << w.psi.at(id);
      os << "\n";
    }
    for (const DiagramChoice& c : w.choices) {
      os << pad(depth) << (c.mirrored ? "mirrored " : "") << "peak " << c.peak.str() << "\n";
      os << pad(depth + 1) << "meets at " << c.diagram.meet.str();
      if (c.diagram.p_prime) os << ", P' = " << to_string(*c.diagram.p_prime);
      os << "\n";
      for (const auto* side : {&c.diagram.left, &c.diagram.right}) {
        for (const DiagramMove& m : *side) {
          os << pad(depth + 1) << (side == &c.diagram.left ? "t-side " : "u-side ")
             << to_string(m.segment) << ":";
          for (const Step& s : m.steps) os << " rule " << s.rule << "@" << s.position.str();
          os << " -> " << m.to.str() << "\n";
        }
      }
    }
    render_assignment(os, w.model, depth);
  }
  void operator()(const TerminationWitness& w) const {
    os << pad(depth) << "relative termination of " << w.P.size() << " rule(s) over "
       << w.R.size() << " rule(s):\n";
    for (const Rule& r : w.P.rules()) os << pad(depth + 1) << r.str() << "\n";
    for (const CertificateStage& st : w.cert.stages) render_stage(os, st, depth + 1);
  }
  void operator()(const ReductionWitness& w) const {
    for (const ReductionStep& st : w.steps) {
      os << pad(depth) << "reduce " << to_string(st.input.ids()) << " to "
         << to_string(st.chosen) << " (C0 = " << to_string(st.c0) << ")\n";
      for (const auto& [id, seq] : st.restriction_witnesses) {
        os << pad(depth + 1) << "rule " << id << " simulated:\n";
        render_sequence(os, seq, depth + 2);
      }
      os << pad(depth + 1) << "rule variables:";
      for (const auto& [id, v] : st.encoding.rule_var)
        os << " x" << id << "=" << (st.model[v] ? 1 : 0);
      os << "\n";
    }
  }
};

inline void render_node(std::ostream& os, const ProofNode& n, int depth) {
  os << pad(depth) << criterion_title(n.criterion) << ": rules " << to_string(n.system.ids());
  if (n.subsystem) os << ", C = " << to_string(*n.subsystem);
  os << "\n";
  for (const Rule& r : n.system.rules()) os << pad(depth + 1) << r.str() << "\n";
  for (const Witness& w : n.witnesses) std::visit(WitnessPrinter{os, depth + 1}, w);
  for (const ProofPtr& c : n.children) render_node(os, *c, depth + 1);
}

}  // namespace detail

inline std::string render_proof(const ProofNode& n) {
  std::ostringstream os;
  detail::render_node(os, n, 1);
  return os.str();
}

inline std::string render_verdict(const Verdict& v, bool with_proof) {
  std::ostringstream os;
  os << (v.confluent ? "YES" : "MAYBE") << "\n";
  if (!with_proof) return os.str();
  if (v.confluent && v.proof) {
    os << render_proof(*v.proof);
  } else {
    for (const std::string& n : v.notes) os << "  " << n << "\n";
  }
  return os.str();
}

}  // namespace confluence
