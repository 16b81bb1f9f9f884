#pragma once

#include <map>
#include <vector>

#include "formation/model.hpp"
#include "formation/types.hpp"

namespace formation {

/// Affine feedback of one follower, u_i = S_i x_i + sum_s K_is x_s + k_i,
/// together with its reparametrisation N_i = S_i + sum_s K_is and
/// k~_i = k_i - S_i D_i - sum_s K_is D_s.
struct FollowerController {
  NodeId node;
  Matrix S;                   // m x n
  std::map<NodeId, Matrix> K;  // keyed by parent s in L_i
  Vector k;                   // m
  Matrix N;                   // m x n
  Vector k_tilde;             // m
};

/// Feedback for every follower of a formation. Leaders carry no entry:
/// their inputs are exogenous.
struct ControllerSet {
  int n = 0;
  int m = 0;
  std::vector<FollowerController> followers;  // ascending node id

  const FollowerController* find(NodeId id) const;
};

/// Derives N_i and k~_i from the raw gains.
FollowerController controller_from_gains(NodeId node, Matrix S, std::map<NodeId, Matrix> K,
                                         Vector k, const LevelDecomposition& decomp);

/// Builds the raw offset k_i = k~_i + S_i D_i + sum_s K_is D_s from the
/// reparametrised form; N_i and k~_i are stored as given.
FollowerController controller_from_parametrization(NodeId node, Matrix S,
                                                   std::map<NodeId, Matrix> K, Matrix N,
                                                   Vector k_tilde,
                                                   const LevelDecomposition& decomp);

/// Largest relative violation of sum K = N - S and of the k / k~ identity
/// over all followers.
double parametrization_defect(const ControllerSet& ctrl, const LevelDecomposition& decomp);

/// Throws DimensionMismatch unless ctrl has one entry per follower of decomp,
/// every gain has the right shape and K is keyed exactly by L_i.
void check_controller_shape(const ControllerSet& ctrl, const FormationSpec& spec,
                            const LevelDecomposition& decomp);

}  // namespace formation
