#include "generators.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace formation::testing {

Matrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix G(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) G(i, j) = normal(rng);
  }
  return G;
}

FormationSpec random_dag(Rng& rng, const DagOptions& options, int n, int m) {
  const int count = options.nodes;
  const int leaders = std::clamp(options.leaders, 1, std::max(1, count - 1));
  std::vector<int> id(count);  // position -> 1-based id
  std::iota(id.begin(), id.end(), 1);
  if (options.shuffle_ids) std::shuffle(id.begin(), id.end(), rng);

  std::vector<std::vector<bool>> link(count, std::vector<bool>(count, false));
  auto pick = [&](int below) { return std::uniform_int_distribution<int>(0, below - 1)(rng); };
  for (int k = leaders; k < count; ++k) link[k][pick(k)] = true;
  for (int l = 0; l < leaders; ++l) {
    bool reached = false;
    for (int k = leaders; k < count; ++k) reached = reached || link[k][l];
    if (!reached && count > leaders) {
      link[std::uniform_int_distribution<int>(leaders, count - 1)(rng)][l] = true;
    }
  }
  // Join weak components: every component holds a leader, so the latest
  // follower of one component may follow a leader of another.
  std::vector<int> root(count);
  std::iota(root.begin(), root.end(), 0);
  std::function<int(int)> find = [&](int a) { return root[a] == a ? a : root[a] = find(root[a]); };
  for (int k = 0; k < count; ++k) {
    for (int j = 0; j < count; ++j) {
      if (link[k][j]) root[find(k)] = find(j);
    }
  }
  for (int l = 1; l < leaders; ++l) {
    if (find(l) == find(0)) continue;
    int latest = count - 1;
    while (find(latest) != find(0) && find(latest) != find(l)) --latest;
    const int target = find(latest) == find(0) ? l : 0;
    link[latest][target] = true;
    root[find(l)] = find(0);
  }
  std::bernoulli_distribution extra(options.extra_edge_probability);
  for (int k = leaders; k < count; ++k) {
    for (int j = 0; j < k; ++j) {
      if (!link[k][j] && extra(rng)) link[k][j] = true;
    }
  }

  FormationSpec spec;
  spec.n = n;
  spec.m = m;
  spec.agents.assign(count, {Matrix::Zero(n, n), Matrix::Zero(n, m)});
  for (int k = 0; k < count; ++k) {
    for (int j = 0; j < count; ++j) {
      if (link[k][j]) spec.edges.push_back({NodeId(id[k]), NodeId(id[j]), Vector::Zero(n)});
    }
  }
  std::shuffle(spec.edges.begin(), spec.edges.end(), rng);
  return spec;
}

FormationSpec random_integer_instance(Rng& rng, const DagOptions& options, int n, int m) {
  FormationSpec spec = random_dag(rng, options, n, m);
  std::uniform_int_distribution<int> digit(-9, 9);
  for (auto& e : spec.edges) {
    for (int c = 0; c < n; ++c) e.d(c) = digit(rng);
  }
  return spec;
}

FeasibleInstance feasible_instance(Rng& rng, const FeasibleOptions& options) {
  std::uniform_int_distribution<int> nodes_dist(2, options.max_nodes);
  std::uniform_int_distribution<int> n_dist(1, options.max_n);
  const int nodes = nodes_dist(rng);
  const int n = n_dist(rng);
  const int m = std::uniform_int_distribution<int>(1, std::min(n, options.max_m))(rng);
  int leaders = 1;
  if (nodes >= 3 && std::bernoulli_distribution(options.multi_leader_probability)(rng)) {
    leaders = std::uniform_int_distribution<int>(2, std::min(3, nodes - 1))(rng);
  }

  FormationSpec spec = random_dag(rng, {nodes, leaders, 0.35, true}, n, m);
  const auto decomp = decompose(spec);

  // Common leader matrix with a prescribed spectral abscissa.
  double hi = options.leader_abscissa_max;
  if (leaders > 1) hi = std::min(hi, -0.1);
  const double target =
      std::uniform_real_distribution<double>(options.leader_abscissa_min, hi)(rng);
  Matrix A1 = gaussian(rng, n, n, 1.0 / std::sqrt(static_cast<double>(n)));
  double abscissa = -1e300;
  const Eigen::EigenSolver<Matrix> eig(A1, false);
  for (const auto& z : eig.eigenvalues()) {
    abscissa = std::max(abscissa, z.real());
  }
  A1 -= (abscissa - target) * Matrix::Identity(n, n);

  FeasibleInstance inst;
  inst.offsets.assign(nodes, Vector::Zero(n));
  inst.gains.assign(nodes, Matrix());
  for (int i = 0; i < nodes; ++i) {
    const NodeId id = NodeId::from_index(i);
    auto& agent = spec.agents[i];
    if (decomp.is_leader(id)) {
      agent = {A1, gaussian(rng, n, m)};
      continue;
    }
    for (;;) {
      Matrix B = gaussian(rng, n, m);
      Matrix N = gaussian(rng, m, n, 0.5);
      Matrix A = A1 - B * N;
      Eigen::JacobiSVD<Matrix> svd(A);
      const auto& s = svd.singularValues();
      if (s(n - 1) < 1e-3 * s(0) || s(n - 1) < 1e-3) continue;
      // D_i = A_i^{-1} B_i k~ keeps A_i D_i in range(B_i).
      const Vector k_tilde = gaussian(rng, m, 1).col(0);
      inst.offsets[i] = A.fullPivLu().solve(B * k_tilde);
      inst.gains[i] = N;
      agent = {A, B};
      break;
    }
  }
  for (auto& e : spec.edges) e.d = inst.offsets[e.from.index()] - inst.offsets[e.to.index()];
  inst.spec = std::move(spec);
  return inst;
}

Pair random_controllable_pair(Rng& rng, int n, int m) {
  for (;;) {
    Pair p{gaussian(rng, n, n), gaussian(rng, n, m)};
    Matrix C(n, n * m);
    Matrix block = p.B;
    for (int k = 0; k < n; ++k) {
      C.middleCols(k * m, m) = block;
      block = p.A * block;
    }
    Eigen::JacobiSVD<Matrix> svd(C);
    const auto& s = svd.singularValues();
    if (s(n - 1) > 1e-6 * s(0)) return p;
  }
}

Matrix with_spectrum(Rng& rng, const std::vector<double>& real,
                     const std::vector<std::pair<double, double>>& complex_pairs) {
  const Eigen::Index n = static_cast<Eigen::Index>(real.size() + 2 * complex_pairs.size());
  Matrix J = Matrix::Zero(n, n);
  Eigen::Index k = 0;
  for (double r : real) J(k, k) = r, ++k;
  for (const auto& [a, b] : complex_pairs) {
    J(k, k) = a;
    J(k + 1, k + 1) = a;
    J(k, k + 1) = b;
    J(k + 1, k) = -b;
    k += 2;
  }
  // Similarity Q (I + 0.3 G) with Q orthogonal keeps the conditioning mild.
  Matrix Q = Eigen::HouseholderQR<Matrix>(gaussian(rng, n, n)).householderQ();
  Matrix T = Q * (Matrix::Identity(n, n) + 0.3 / std::sqrt(static_cast<double>(n)) *
                                               gaussian(rng, n, n));
  return T * J * T.inverse();
}

}  // namespace formation::testing
