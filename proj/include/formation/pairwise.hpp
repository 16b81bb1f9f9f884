#pragma once

#include <vector>

#include "formation/criterion.hpp"

namespace formation {

/// Two-agent subformation {i, j} cut out of a formation along edge (i, j).
struct PairAnalysis {
  EdgeKey edge;
  StabilizabilityReport stabilizability;  // (A_i, B_i)
  LinearSolveReport gain;                 // B_i N_ij = A_j - A_i
  LinearSolveReport offset;               // B_i k~_ij = A_i d_ij
  Verdict verdict = Verdict::kUnstable;
};

struct PairwiseReport {
  std::vector<PairAnalysis> pairs;  // ascending (from, to)

  const PairAnalysis* find(NodeId from, NodeId to) const;
  bool all_stable() const;
};

/// Analyzes every edge as an isolated leader-follower pair, independently of
/// the global decomposition. Per-edge work runs through parallel_for.
PairwiseReport analyze_pairs(const FormationSpec& spec, const Tolerances& tol = {},
                             Execution exec = Execution::kParallel);

enum class Discrepancy {
  kBothStable,
  kBothUnstable,
  kPairsStableFormationUnstable,
  kFormationStablePairUnstable,
};

const char* to_string(Discrepancy d);

struct CrossComparison {
  CriterionReport formation;
  PairwiseReport pairs;
  Discrepancy kind = Discrepancy::kBothUnstable;
};

CrossComparison cross_compare(const FormationSpec& spec, const LevelDecomposition& decomp,
                              const Tolerances& tol = {}, Execution exec = Execution::kParallel);

}  // namespace formation
