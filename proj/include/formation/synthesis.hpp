#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "formation/controller.hpp"
#include "formation/criterion.hpp"

namespace formation {

/// How the coupling N_i - S_i is split among the parents of follower i.
struct SplitStrategy {
  enum class Kind {
    kParentOnly,  // everything on the designated parent p(i)
    kUniform,     // equal shares
    kCustom,      // weights per follower and parent, each set summing to 1
  };
  Kind kind = Kind::kParentOnly;
  std::map<NodeId, std::map<NodeId, double>> weights;  // used by kCustom

  static SplitStrategy parent_only() { return {}; }
  static SplitStrategy uniform() { return {Kind::kUniform, {}}; }
};

enum class GainChoice {
  kBass,        // S_i stabilizes (A_i, B_i) by Bass's method
  kLeaderFree,  // S_i = N_i, K_is = 0 (multi-leader formations only)
};

struct SynthesisOptions {
  SplitStrategy split;
  GainChoice gains = GainChoice::kBass;
};

/// Weights w_s (summing to 1) used to split N_i - S_i for follower `node`.
/// Throws InvalidInput for malformed custom weights.
std::map<NodeId, double> split_weights(const SplitStrategy& strategy, NodeId node,
                                       const LevelDecomposition& decomp);

/// Builds a controller realizing the criterion: S_i from stabilize (or N_i),
/// N_i and k~_i from the report, K_is = w_s (N_i - S_i),
/// k_i = k~_i + S_i D_i + sum K_is D_s. Throws NotStable for an unstable
/// report, SynthesisFailure from numerics.
ControllerSet synthesize(const FormationSpec& spec, const LevelDecomposition& decomp,
                         const CriterionReport& report, const SynthesisOptions& options = {},
                         const Tolerances& tol = {});

/// S_i x_i + sum_s K_is x_s + k_i for follower i; zero for a leader.
/// Throws MissingState when a required state is absent.
Vector control_input(const ControllerSet& ctrl, NodeId node,
                     const std::map<NodeId, Vector>& states);

/// Per-follower affine parametrisation of all solutions: N_i = N_i^0 + Z_i W,
/// k~_i = k~_i^0 + Z_i w, with Z_i an orthonormal null-space basis of B_i.
struct FamilyBasis {
  NodeId node;
  Matrix N0;
  Vector k_tilde0;
  Matrix kernel;  // m x q
};

std::vector<FamilyBasis> family_basis(const FormationSpec& spec,
                                      const LevelDecomposition& decomp,
                                      const CriterionReport& report, const Tolerances& tol = {});

struct FamilyOptions {
  int count = 1;
  std::uint64_t seed = 0;
  // Relative size of the random perturbation of S_i.
  double gain_perturbation = 0.5;
  int max_rejections = 50;
};

/// Samples the controller family: entry 0 is synthesize() with default
/// options; entry k > 0 draws a perturbed stabilizing S_i, kernel
/// coordinates for N_i and k~_i, and random split weights from a generator
/// seeded by (seed, k). Same seed, same controllers, on either execution path.
std::vector<ControllerSet> enumerate_family(const FormationSpec& spec,
                                            const LevelDecomposition& decomp,
                                            const CriterionReport& report,
                                            const FamilyOptions& options,
                                            const Tolerances& tol = {},
                                            Execution exec = Execution::kParallel);

}  // namespace formation
