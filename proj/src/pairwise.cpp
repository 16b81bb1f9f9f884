#include "formation/pairwise.hpp"

#include <algorithm>

namespace formation {

const PairAnalysis* PairwiseReport::find(NodeId from, NodeId to) const {
  for (const auto& p : pairs) {
    if (p.edge.from == from && p.edge.to == to) return &p;
  }
  return nullptr;
}

bool PairwiseReport::all_stable() const {
  return std::all_of(pairs.begin(), pairs.end(),
                     [](const PairAnalysis& p) { return p.verdict == Verdict::kStable; });
}

PairwiseReport analyze_pairs(const FormationSpec& spec, const Tolerances& tol, Execution exec) {
  std::vector<const Edge*> edges;
  for (const auto& e : spec.edges) edges.push_back(&e);
  std::sort(edges.begin(), edges.end(), [](const Edge* a, const Edge* b) {
    return EdgeKey{a->from, a->to} < EdgeKey{b->from, b->to};
  });

  PairwiseReport report;
  report.pairs.resize(edges.size());
  parallel_for(edges.size(), exec, [&](std::size_t k) {
    const Edge& e = *edges[k];
    const auto& follower = spec.agent(e.from);
    const auto& leader = spec.agent(e.to);
    PairAnalysis& p = report.pairs[k];
    p.edge = {e.from, e.to};
    p.stabilizability = is_stabilizable(follower.A, follower.B, tol);
    p.gain = solve_matrix_equation(follower.B, leader.A - follower.A, tol);
    p.offset = solve_matrix_equation(follower.B, follower.A * e.d, tol);
    const bool ok = p.stabilizability.stabilizable && p.gain.solvable && p.offset.solvable;
    p.verdict = ok ? Verdict::kStable : Verdict::kUnstable;
  });
  return report;
}

const char* to_string(Discrepancy d) {
  switch (d) {
    case Discrepancy::kBothStable: return "both-stable";
    case Discrepancy::kBothUnstable: return "both-unstable";
    case Discrepancy::kPairsStableFormationUnstable: return "pairs-stable-formation-unstable";
    case Discrepancy::kFormationStablePairUnstable: return "formation-stable-pair-unstable";
  }
  return "unknown";
}

CrossComparison cross_compare(const FormationSpec& spec, const LevelDecomposition& decomp,
                              const Tolerances& tol, Execution exec) {
  CrossComparison out;
  out.formation = check(spec, decomp, tol, exec);
  out.pairs = analyze_pairs(spec, tol, exec);
  const bool formation_stable = out.formation.overall == Verdict::kStable;
  const bool pairs_stable = out.pairs.all_stable();
  if (formation_stable) {
    out.kind = pairs_stable ? Discrepancy::kBothStable : Discrepancy::kFormationStablePairUnstable;
  } else {
    out.kind =
        pairs_stable ? Discrepancy::kPairsStableFormationUnstable : Discrepancy::kBothUnstable;
  }
  return out;
}

}  // namespace formation
