#include "formation/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "formation/errors.hpp"

namespace formation {

namespace {

void require_stable(const CriterionReport& report) {
  if (report.overall != Verdict::kStable) {
    throw Error(ErrorCode::kNotStable,
                "synthesis: the criterion report is unstable; no stabilizing controller exists");
  }
}

const FollowerSolvability& solutions_for(const CriterionReport& report, NodeId id) {
  const auto* sol = report.solvability(id);
  if (!sol) {
    throw Error(ErrorCode::kInvalidInput,
                "synthesis: report has no solvability entry for follower " +
                    std::to_string(id.value));
  }
  return *sol;
}

std::map<NodeId, Matrix> split_coupling(const Matrix& coupling,
                                        const std::map<NodeId, double>& weights) {
  std::map<NodeId, Matrix> K;
  for (const auto& [s, w] : weights) {
    K.emplace(s, w == 1.0 ? coupling : (w == 0.0 ? Matrix::Zero(coupling.rows(), coupling.cols())
                                                 : Matrix(w * coupling)));
  }
  return K;
}

void require_verified(const FormationSpec& spec, const LevelDecomposition& decomp,
                      const ControllerSet& ctrl, const Tolerances& tol) {
  const auto v = verify_controller(spec, decomp, ctrl, tol);
  if (!v.pass) {
    throw Error(ErrorCode::kSynthesisFailure,
                "synthesis: controller failed verification (gain defect " +
                    std::to_string(v.max_gain_defect) + ", offset defect " +
                    std::to_string(v.max_offset_defect) + ", tolerance " +
                    std::to_string(v.tolerance) + ")");
  }
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finaliser over (seed, k).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  }
  return G;
}

}  // namespace

std::map<NodeId, double> split_weights(const SplitStrategy& strategy, NodeId node,
                                       const LevelDecomposition& decomp) {
  const auto& L = decomp.parents(node);
  std::map<NodeId, double> w;
  switch (strategy.kind) {
    case SplitStrategy::Kind::kParentOnly:
      for (NodeId s : L) w[s] = (s == decomp.parent_of(node)) ? 1.0 : 0.0;
      break;
    case SplitStrategy::Kind::kUniform:
      for (NodeId s : L) w[s] = L.size() == 1 ? 1.0 : 1.0 / static_cast<double>(L.size());
      break;
    case SplitStrategy::Kind::kCustom: {
      auto it = strategy.weights.find(node);
      if (it == strategy.weights.end()) {
        throw Error(ErrorCode::kInvalidInput,
                    "split: no custom weights for follower " + std::to_string(node.value));
      }
      double total = 0.0;
      for (NodeId s : L) {
        auto ws = it->second.find(s);
        if (ws == it->second.end()) {
          throw Error(ErrorCode::kInvalidInput, "split: follower " + std::to_string(node.value) +
                                                    " has no weight for parent " +
                                                    std::to_string(s.value));
        }
        w[s] = ws->second;
        total += ws->second;
      }
      if (it->second.size() != L.size() || std::abs(total - 1.0) > 1e-12) {
        throw Error(ErrorCode::kInvalidInput,
                    "split: weights of follower " + std::to_string(node.value) +
                        " must cover exactly its parents and sum to 1");
      }
      break;
    }
  }
  return w;
}

ControllerSet synthesize(const FormationSpec& spec, const LevelDecomposition& decomp,
                         const CriterionReport& report, const SynthesisOptions& options,
                         const Tolerances& tol) {
  require_stable(report);
  if (options.gains == GainChoice::kLeaderFree && decomp.leader_count() < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "synthesis: leader-free gains apply to formations with more than one leader");
  }

  ControllerSet ctrl{spec.n, spec.m, {}};
  auto followers = decomp.followers();
  std::sort(followers.begin(), followers.end());
  for (NodeId id : followers) {
    const auto& agent = spec.agent(id);
    const auto& sol = solutions_for(report, id);
    const Matrix& N = sol.gain.solution;
    const Vector k_tilde = sol.offset.solution.col(0);

    if (options.gains == GainChoice::kLeaderFree) {
      std::map<NodeId, Matrix> K;
      for (NodeId s : decomp.parents(id)) K.emplace(s, Matrix::Zero(spec.m, spec.n));
      ctrl.followers.push_back(controller_from_parametrization(id, N, std::move(K), N, k_tilde, decomp));
      continue;
    }
    Matrix S = stabilize(agent.A, agent.B, tol);
    auto K = split_coupling(N - S, split_weights(options.split, id, decomp));
    ctrl.followers.push_back(
        controller_from_parametrization(id, std::move(S), std::move(K), N, k_tilde, decomp));
  }
  require_verified(spec, decomp, ctrl, tol);
  return ctrl;
}

Vector control_input(const ControllerSet& ctrl, NodeId node,
                     const std::map<NodeId, Vector>& states) {
  const auto* f = ctrl.find(node);
  if (!f) return Vector::Zero(ctrl.m);
  auto state = [&](NodeId id) -> const Vector& {
    auto it = states.find(id);
    if (it == states.end()) {
      throw Error(ErrorCode::kMissingState,
                  "control_input: state of agent " + std::to_string(id.value) + " is required");
    }
    return it->second;
  };
  Vector u = f->S * state(node) + f->k;
  for (const auto& [s, Ks] : f->K) u += Ks * state(s);
  return u;
}

std::vector<FamilyBasis> family_basis(const FormationSpec& spec,
                                      const LevelDecomposition& decomp,
                                      const CriterionReport& report, const Tolerances& tol) {
  auto followers = decomp.followers();
  std::sort(followers.begin(), followers.end());
  std::vector<FamilyBasis> out;
  for (NodeId id : followers) {
    const auto& sol = solutions_for(report, id);
    out.push_back({id, sol.gain.solution, sol.offset.solution.col(0),
                   null_space_basis(spec.agent(id).B, tol)});
  }
  return out;
}

std::vector<ControllerSet> enumerate_family(const FormationSpec& spec,
                                            const LevelDecomposition& decomp,
                                            const CriterionReport& report,
                                            const FamilyOptions& options, const Tolerances& tol,
                                            Execution exec) {
  require_stable(report);
  if (options.count < 1) {
    throw Error(ErrorCode::kInvalidInput, "enumerate_family: count must be at least 1");
  }
  const auto bases = family_basis(spec, decomp, report, tol);
  std::vector<Matrix> base_gains(bases.size());
  for (std::size_t f = 0; f < bases.size(); ++f) {
    const auto& agent = spec.agent(bases[f].node);
    base_gains[f] = stabilize(agent.A, agent.B, tol);
  }

  std::vector<ControllerSet> family(static_cast<std::size_t>(options.count));
  parallel_for(family.size(), exec, [&](std::size_t k) {
    if (k == 0) {
      family[0] = synthesize(spec, decomp, report, {}, tol);
      return;
    }
    std::mt19937_64 rng(mix(options.seed, k));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ControllerSet ctrl{spec.n, spec.m, {}};
    for (std::size_t f = 0; f < bases.size(); ++f) {
      const auto& basis = bases[f];
      const auto& agent = spec.agent(basis.node);

      Matrix S = base_gains[f];
      const double size = options.gain_perturbation * (1.0 + S.norm());
      for (int attempt = 0; attempt < options.max_rejections; ++attempt) {
        Matrix G = gaussian(rng, spec.m, spec.n);
        if (G.norm() > 0.0) G *= size * unit(rng) / G.norm();
        const Matrix candidate = base_gains[f] + G;
        if (is_hurwitz(agent.A + agent.B * candidate, tol.eps_hurwitz).is_hurwitz) {
          S = candidate;
          break;
        }
      }

      Matrix N = basis.N0;
      Vector k_tilde = basis.k_tilde0;
      const Eigen::Index q = basis.kernel.cols();
      if (q > 0) {
        N += basis.kernel * gaussian(rng, q, spec.n);
        k_tilde += basis.kernel * gaussian(rng, q, 1).col(0);
      }

      const auto& L = decomp.parents(basis.node);
      std::map<NodeId, double> weights;
      double total = 0.0;
      for (NodeId s : L) total += (weights[s] = 0.05 + unit(rng));
      for (auto& [s, w] : weights) w /= total;
      if (L.size() == 1) weights.begin()->second = 1.0;

      auto K = split_coupling(N - S, weights);
      ctrl.followers.push_back(controller_from_parametrization(basis.node, std::move(S),
                                                               std::move(K), std::move(N),
                                                               std::move(k_tilde), decomp));
    }
    require_verified(spec, decomp, ctrl, tol);
    family[k] = std::move(ctrl);
  });
  return family;
}

}  // namespace formation
