#pragma once

#include <optional>
#include <vector>

#include "formation/controller.hpp"
#include "formation/model.hpp"
#include "formation/numerics.hpp"
#include "formation/parallel.hpp"

namespace formation {

enum class Verdict { kStable, kUnstable };

/// Structural special cases of the criterion.
enum class Corollary {
  kNone,
  kMultiLeader,  // more than one leader
  kInTree,       // one leader, every follower has exactly one parent
};

struct FollowerStabilizability {
  NodeId node;
  StabilizabilityReport pbh;
  HurwitzReport open_loop;
};

/// Condition 1: every follower pair (A_i, B_i) is stabilizable.
struct StabilizabilityCondition {
  std::vector<FollowerStabilizability> followers;
  // Implied by conditions 2 and 4 for multi-leader formations; still
  // computed, but not binding.
  bool implied = false;
  bool pass = true;
};

struct FollowerSolvability {
  NodeId node;
  LinearSolveReport gain;    // B_i N_i = A_1 - A_i
  LinearSolveReport offset;  // B_i k~_i = A_i D_i
  bool pass() const { return gain.solvable && offset.solvable; }
};

/// Condition 2: the gain and offset equations are solvable for every follower.
struct SolvabilityCondition {
  std::vector<FollowerSolvability> followers;
  bool pass = true;
};

struct EdgeDisplacement {
  EdgeKey edge;
  Vector defect;  // d_ij - (D_i - D_j)
  double defect_norm = 0.0;
  bool pass = true;
};

/// Condition 3: d_ij = D_i - D_j on every edge.
struct DisplacementCondition {
  std::vector<EdgeDisplacement> edges;
  bool vacuous = false;  // in-tree: holds by construction
  bool pass = true;
};

struct LeaderDefect {
  NodeId node;
  double defect = 0.0;  // ||A_i - A_1||_F
};

/// Condition 4 (binding only with more than one leader): all leader matrices
/// coincide and A_1 is Hurwitz. For a single leader the Hurwitz report is
/// informational.
struct LeaderCondition {
  bool binding = false;
  std::vector<LeaderDefect> leaders;
  HurwitzReport reference;
  bool pass = true;
};

struct CriterionReport {
  Verdict overall = Verdict::kUnstable;
  NodeId reference_leader;
  int leader_count = 0;
  double scale = 1.0;  // 1 + ||A_1||_F + max ||d||
  Corollary applicable_corollary = Corollary::kNone;
  StabilizabilityCondition condition1;
  SolvabilityCondition condition2;
  DisplacementCondition condition3;
  LeaderCondition condition4;

  const FollowerSolvability* solvability(NodeId id) const;
};

/// Evaluates every condition of the criterion for every follower, edge and
/// leader (no short-circuit). Per-follower work runs through parallel_for.
CriterionReport check(const FormationSpec& spec, const LevelDecomposition& decomp,
                      const Tolerances& tol = {}, Execution exec = Execution::kParallel);

Corollary classify(const FormationSpec& spec, const LevelDecomposition& decomp);

struct EdgeControllerDefect {
  EdgeKey edge;
  double gain_defect = 0.0;    // ||M_i - M_j||_F
  double offset_defect = 0.0;  // ||m_i - m_j||
};

struct ControllerVerification {
  std::vector<EdgeControllerDefect> edges;
  double max_gain_defect = 0.0;
  double max_offset_defect = 0.0;
  double tolerance = 0.0;  // eps_solve * scale
  std::vector<NodeId> non_hurwitz;  // followers whose A_i + B_i S_i is not Hurwitz
  bool pass = false;
};

/// Checks the matching conditions M_i = M_j, m_i = m_j on every edge, where
/// M_i = A_i + B_i (S_i + sum K_is) and m_i = B_i (k_i - S_i D_i -
/// sum K_is D_s) - A_i D_i (leaders use zero gains), and that every closed
/// follower matrix is Hurwitz.
ControllerVerification verify_controller(const FormationSpec& spec,
                                         const LevelDecomposition& decomp,
                                         const ControllerSet& ctrl, const Tolerances& tol = {});

/// 1 + ||A_ref||_F + max ||d_ij||.
double defect_scale(const FormationSpec& spec, const LevelDecomposition& decomp);

}  // namespace formation
