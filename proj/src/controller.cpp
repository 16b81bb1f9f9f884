#include "formation/controller.hpp"

#include <algorithm>
#include <string>

#include "formation/errors.hpp"

namespace formation {

const FollowerController* ControllerSet::find(NodeId id) const {
  auto it = std::lower_bound(followers.begin(), followers.end(), id,
                             [](const FollowerController& f, NodeId v) { return f.node < v; });
  return (it != followers.end() && it->node == id) ? &*it : nullptr;
}

FollowerController controller_from_gains(NodeId node, Matrix S, std::map<NodeId, Matrix> K,
                                         Vector k, const LevelDecomposition& decomp) {
  FollowerController c{node, std::move(S), std::move(K), std::move(k), {}, {}};
  c.N = c.S;
  c.k_tilde = c.k - c.S * decomp.offset_of(node);
  for (const auto& [s, Ks] : c.K) {
    c.N += Ks;
    c.k_tilde -= Ks * decomp.offset_of(s);
  }
  return c;
}

FollowerController controller_from_parametrization(NodeId node, Matrix S,
                                                   std::map<NodeId, Matrix> K, Matrix N,
                                                   Vector k_tilde,
                                                   const LevelDecomposition& decomp) {
  FollowerController c{node, std::move(S), std::move(K), {}, std::move(N), std::move(k_tilde)};
  c.k = c.k_tilde + c.S * decomp.offset_of(node);
  for (const auto& [s, Ks] : c.K) c.k += Ks * decomp.offset_of(s);
  return c;
}

double parametrization_defect(const ControllerSet& ctrl, const LevelDecomposition& decomp) {
  double worst = 0.0;
  for (const auto& f : ctrl.followers) {
    Matrix sumK = Matrix::Zero(f.N.rows(), f.N.cols());
    Vector k = f.k_tilde + f.S * decomp.offset_of(f.node);
    for (const auto& [s, Ks] : f.K) {
      sumK += Ks;
      k += Ks * decomp.offset_of(s);
    }
    const double gain_scale = 1.0 + f.N.norm() + f.S.norm();
    worst = std::max(worst, (sumK - (f.N - f.S)).norm() / gain_scale);
    worst = std::max(worst, (k - f.k).norm() / (1.0 + f.k.norm() + f.k_tilde.norm()));
  }
  return worst;
}

void check_controller_shape(const ControllerSet& ctrl, const FormationSpec& spec,
                            const LevelDecomposition& decomp) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kDimensionMismatch, "controller: " + what);
  };
  if (ctrl.n != spec.n || ctrl.m != spec.m) {
    fail("dimensions (n=" + std::to_string(ctrl.n) + ", m=" + std::to_string(ctrl.m) +
         ") do not match the formation (n=" + std::to_string(spec.n) +
         ", m=" + std::to_string(spec.m) + ")");
  }
  const auto followers = decomp.followers();
  if (ctrl.followers.size() != followers.size()) {
    fail("expected " + std::to_string(followers.size()) + " follower entries, got " +
         std::to_string(ctrl.followers.size()));
  }
  auto check = [&](const Matrix& M, Eigen::Index r, Eigen::Index c, const std::string& what) {
    if (M.rows() != r || M.cols() != c) fail(what + " has the wrong shape");
  };
  for (NodeId id : followers) {
    const auto* f = ctrl.find(id);
    if (!f) fail("missing entry for follower " + std::to_string(id.value));
    const std::string tag = "follower " + std::to_string(id.value);
    check(f->S, spec.m, spec.n, tag + " S");
    check(f->N, spec.m, spec.n, tag + " N");
    check(f->k, spec.m, 1, tag + " k");
    check(f->k_tilde, spec.m, 1, tag + " k_tilde");
    const auto& L = decomp.parents(id);
    if (f->K.size() != L.size()) fail(tag + " K must have one entry per parent");
    for (NodeId s : L) {
      auto it = f->K.find(s);
      if (it == f->K.end()) fail(tag + " K is missing parent " + std::to_string(s.value));
      check(it->second, spec.m, spec.n, tag + " K");
    }
  }
}

}  // namespace formation
