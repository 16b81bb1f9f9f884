#include "formation/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "formation/errors.hpp"

namespace formation {

namespace {

double max_closed_loop_norm(const FormationSpec& spec, const ControllerSet& ctrl) {
  double worst = 0.0;
  for (int i = 0; i < spec.agent_count(); ++i) {
    const NodeId id = NodeId::from_index(i);
    const auto& agent = spec.agent(id);
    const auto* f = ctrl.find(id);
    const double norm = f ? (agent.A + agent.B * f->S).norm() : agent.A.norm();
    worst = std::max(worst, norm);
  }
  return worst;
}

// Closed loop in offset coordinates. With y_i = x_i + D_i, leaders keep
// their absolute state y_l and follower i carries w_i = y_i - y_p(i). Every
// y_i equals y_{l_i} + W_i with W_i the sum of w along the p-chain, and
//   y_i' = M_i y_{l_i} + g_i,
//   g_i  = M_i W_i - B_i sum_s K_is (y_i - y_s) + B_i k~_i - A_i D_i,
// with M_i = A_i + B_i N_i (leaders: M = A, g = B u). Hence
//   w_i' = (M_i - M_p(i)) y_{l_i} + g_i - g_p(i),
// which keeps the common leader motion out of the error coordinates.
class OffsetDynamics {
 public:
  OffsetDynamics(const FormationSpec& spec, const LevelDecomposition& decomp,
                 const ControllerSet& ctrl, const std::map<NodeId, LeaderSignal>& signals)
      : spec_(spec), decomp_(decomp), ctrl_(ctrl), signals_(signals) {
    const int l = spec.agent_count();
    const int n = spec.n;
    M_.resize(l);
    drift_.resize(l);
    bias_.resize(l);
    for (int i = 0; i < l; ++i) {
      const NodeId id = NodeId::from_index(i);
      const auto& agent = spec.agent(id);
      if (const auto* f = ctrl.find(id)) {
        M_[i] = agent.A + agent.B * f->N;
        bias_[i] = agent.B * f->k_tilde - agent.A * decomp.offset_of(id);
      } else {
        M_[i] = agent.A;
        bias_[i] = Vector::Zero(n);
      }
    }
    for (int i = 0; i < l; ++i) {
      const NodeId id = NodeId::from_index(i);
      if (!decomp.is_leader(id)) drift_[i] = M_[i] - M_[decomp.parent_of(id).index()];
    }
    W_.assign(l, Vector::Zero(n));
    g_.assign(l, Vector::Zero(n));
  }

  Vector initial(const std::vector<Vector>& x0) const {
    const int n = spec_.n;
    Vector xi(n * spec_.agent_count());
    for (int i = 0; i < spec_.agent_count(); ++i) {
      const NodeId id = NodeId::from_index(i);
      if (decomp_.is_leader(id)) {
        xi.segment(i * n, n) = x0[i];
      } else {
        const NodeId p = decomp_.parent_of(id);
        xi.segment(i * n, n) =
            (x0[i] + decomp_.offset_of(id)) - (x0[p.index()] + decomp_.offset_of(p));
      }
    }
    return xi;
  }

  // Fills W_ from the stacked state.
  void reconstruct(const Vector& xi) {
    const int n = spec_.n;
    for (NodeId id : decomp_.renumbering) {
      const std::size_t i = id.index();
      if (decomp_.is_leader(id)) {
        W_[i].setZero();
      } else {
        W_[i] = xi.segment(i * n, n) + W_[decomp_.parent_of(id).index()];
      }
    }
  }

  const Vector& W(std::size_t i) const { return W_[i]; }

  Vector leader_state(const Vector& xi, NodeId id) const {
    const int n = spec_.n;
    return xi.segment(decomp_.leader_of(id).index() * n, n);
  }

  // y_i - y_s, with the leader part cancelled exactly when both share a leader.
  Vector relative(const Vector& xi, NodeId i, NodeId s) const {
    Vector out = W_[i.index()] - W_[s.index()];
    if (decomp_.leader_of(i) != decomp_.leader_of(s)) {
      out += leader_state(xi, i) - leader_state(xi, s);
    }
    return out;
  }

  Vector leader_input(NodeId id, double t, double probe) const {
    auto it = signals_.find(id);
    if (it == signals_.end()) return Vector::Zero(spec_.m);
    return it->second.on_piece(t, probe, spec_.m);
  }

  // u_i = N_i y_i - sum_s K_is (y_i - y_s) + k~_i for followers.
  Vector follower_input(const Vector& xi, NodeId id) const {
    const auto* f = ctrl_.find(id);
    Vector u = f->N * (leader_state(xi, id) + W_[id.index()]) + f->k_tilde;
    for (const auto& [s, Ks] : f->K) u -= Ks * relative(xi, id, s);
    return u;
  }

  void derivative(double t, double probe, const Vector& xi, Vector& out) {
    const int n = spec_.n;
    reconstruct(xi);
    for (NodeId id : decomp_.renumbering) {
      const std::size_t i = id.index();
      const auto& agent = spec_.agent(id);
      if (decomp_.is_leader(id)) {
        g_[i] = agent.B * leader_input(id, t, probe);
        continue;
      }
      const auto* f = ctrl_.find(id);
      Vector coupling = Vector::Zero(spec_.m);
      for (const auto& [s, Ks] : f->K) coupling += Ks * relative(xi, id, s);
      g_[i] = M_[i] * W_[i] - agent.B * coupling + bias_[i];
    }
    for (int i = 0; i < spec_.agent_count(); ++i) {
      const NodeId id = NodeId::from_index(i);
      if (decomp_.is_leader(id)) {
        out.segment(i * n, n) = spec_.agent(id).A * xi.segment(i * n, n) + g_[i];
      } else {
        out.segment(i * n, n) = drift_[i] * leader_state(xi, id) + g_[i] -
                                g_[decomp_.parent_of(id).index()];
      }
    }
  }

 private:
  const FormationSpec& spec_;
  const LevelDecomposition& decomp_;
  const ControllerSet& ctrl_;
  const std::map<NodeId, LeaderSignal>& signals_;
  std::vector<Matrix> M_;
  std::vector<Matrix> drift_;
  std::vector<Vector> bias_;
  std::vector<Vector> W_;
  std::vector<Vector> g_;
};

void record(SimulationTrace& trace, OffsetDynamics& dyn, const FormationSpec& spec,
            const LevelDecomposition& decomp, const std::map<NodeId, LeaderSignal>& signals,
            const Vector& xi, double t) {
  const int l = spec.agent_count();
  dyn.reconstruct(xi);
  std::vector<Vector> x(l), u(l);
  for (int i = 0; i < l; ++i) {
    const NodeId id = NodeId::from_index(i);
    x[i] = dyn.leader_state(xi, id) + dyn.W(i) - decomp.offset_of(id);
    u[i] = decomp.is_leader(id) ? dyn.leader_input(id, t, t) : dyn.follower_input(xi, id);
  }
  std::vector<Vector> z(spec.edges.size());
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const auto& edge = spec.edges[e];
    z[e] = dyn.relative(xi, edge.from, edge.to) +
           (edge.d - decomp.offset_of(edge.from) + decomp.offset_of(edge.to));
  }
  double sup = 0.0;
  for (const auto& [id, sig] : signals) sup += sig.sup_norm(t);

  trace.times.push_back(t);
  trace.states.push_back(std::move(x));
  trace.inputs.push_back(std::move(u));
  trace.errors.push_back(std::move(z));
  trace.input_sup.push_back(sup);
}

}  // namespace

double default_step(const FormationSpec& spec, const ControllerSet& ctrl) {
  return std::min(1e-2, 0.1 / (1.0 + max_closed_loop_norm(spec, ctrl)));
}

double step_cap(const FormationSpec& spec, const ControllerSet& ctrl) {
  const double norm = max_closed_loop_norm(spec, ctrl);
  return norm > 0.0 ? 1.0 / norm : std::numeric_limits<double>::infinity();
}

std::size_t SimulationTrace::edge_index(NodeId from, NodeId to) const {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].from == from && edges[e].to == to) return e;
  }
  throw Error(ErrorCode::kInvalidInput, "trace: no edge (" + std::to_string(from.value) + "," +
                                            std::to_string(to.value) + ")");
}

double SimulationTrace::error_norm(std::size_t k) const {
  double sq = 0.0;
  for (const auto& z : errors[k]) sq += z.squaredNorm();
  return std::sqrt(sq);
}

std::vector<Vector> ideal_initial_states(const LevelDecomposition& decomp, const Vector& x0) {
  std::vector<Vector> out;
  for (int i = 0; i < decomp.node_count(); ++i) out.push_back(x0 - decomp.offset[i]);
  return out;
}

SimulationTrace simulate(const FormationSpec& spec, const LevelDecomposition& decomp,
                         const ControllerSet& ctrl, const std::vector<Vector>& x0,
                         const std::map<NodeId, LeaderSignal>& signals,
                         const SimulationOptions& options) {
  check_controller_shape(ctrl, spec, decomp);
  if (parametrization_defect(ctrl, decomp) > 1e-10) {
    throw Error(ErrorCode::kInvalidInput,
                "simulate: controller violates sum K = N - S or the k / k~ identity");
  }
  const int l = spec.agent_count();
  if (static_cast<int>(x0.size()) != l) {
    throw Error(ErrorCode::kDimensionMismatch, "simulate: need one initial state per agent");
  }
  for (const auto& x : x0) {
    if (x.size() != spec.n) {
      throw Error(ErrorCode::kDimensionMismatch, "simulate: initial states must have length n");
    }
  }
  std::vector<double> breaks;
  for (const auto& [id, sig] : signals) {
    if (id.value < 1 || id.value > l || !decomp.is_leader(id)) {
      throw Error(ErrorCode::kInvalidInput,
                  "simulate: signal for agent " + std::to_string(id.value) + ", which is not a leader");
    }
    sig.check(spec.m);
    const auto b = sig.breakpoints(options.horizon);
    breaks.insert(breaks.end(), b.begin(), b.end());
  }
  if (!(options.horizon > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "simulate: horizon must be positive");
  }
  const double dt = options.dt > 0.0 ? options.dt : default_step(spec, ctrl);
  if (dt * max_closed_loop_norm(spec, ctrl) > 1.0) {
    std::ostringstream os;
    os << "simulate: step " << dt << " exceeds the stability cap " << step_cap(spec, ctrl);
    throw Error(ErrorCode::kStepTooLarge, os.str());
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  SimulationTrace trace;
  trace.step = dt;
  trace.breakpoints = breaks;
  for (const auto& e : spec.edges) {
    trace.edges.push_back({e.from, e.to});
    trace.displacements.push_back(e.d);
  }

  OffsetDynamics dyn(spec, decomp, ctrl, signals);
  Vector xi = dyn.initial(x0);
  const Eigen::Index size = xi.size();
  Vector k1(size), k2(size), k3(size), k4(size), tmp(size);
  record(trace, dyn, spec, decomp, signals, xi, 0.0);

  std::vector<double> knots{0.0};
  knots.insert(knots.end(), breaks.begin(), breaks.end());
  knots.push_back(options.horizon);
  for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
    const double a = knots[seg], b = knots[seg + 1];
    const long steps = std::max(1L, static_cast<long>(std::ceil((b - a) / dt - 1e-9)));
    const double h = (b - a) / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
      const double t = a + static_cast<double>(s) * h;
      const double probe = t + 0.5 * h;
      dyn.derivative(t, probe, xi, k1);
      tmp = xi + 0.5 * h * k1;
      dyn.derivative(t + 0.5 * h, probe, tmp, k2);
      tmp = xi + 0.5 * h * k2;
      dyn.derivative(t + 0.5 * h, probe, tmp, k3);
      tmp = xi + h * k3;
      dyn.derivative(t + h, probe, tmp, k4);
      xi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double t_next = (s + 1 == steps) ? b : a + static_cast<double>(s + 1) * h;
      if (!xi.allFinite()) {
        std::ostringstream os;
        os << "simulate: state became non-finite at t = " << t_next;
        throw Error(ErrorCode::kNonFiniteState, os.str());
      }
      record(trace, dyn, spec, decomp, signals, xi, t_next);
    }
  }
  return trace;
}

double error_recompute_defect(const SimulationTrace& trace) {
  double worst = 0.0;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    double scale = 0.0;
    for (const auto& x : trace.states[k]) scale = std::max(scale, x.norm());
    for (std::size_t e = 0; e < trace.edges.size(); ++e) {
      const auto& edge = trace.edges[e];
      const Vector z = trace.states[k][edge.from.index()] - trace.states[k][edge.to.index()] +
                       trace.displacements[e];
      worst = std::max(worst, (z - trace.errors[k][e]).norm() / (1.0 + scale));
    }
  }
  return worst;
}

EnvelopeRuns envelope_runs(const FormationSpec& spec, const LevelDecomposition& decomp,
                           const ControllerSet& ctrl, const std::vector<Vector>& x0,
                           const std::map<NodeId, LeaderSignal>& signals,
                           const SimulationOptions& options, Execution exec) {
  EnvelopeRuns runs;
  const std::map<NodeId, LeaderSignal> silent;
  const auto ideal = ideal_initial_states(decomp, Vector::Zero(spec.n));
  parallel_for(3, exec, [&](std::size_t which) {
    switch (which) {
      case 0: runs.full = simulate(spec, decomp, ctrl, x0, signals, options); break;
      case 1: runs.homogeneous = simulate(spec, decomp, ctrl, x0, silent, options); break;
      default: runs.forced = simulate(spec, decomp, ctrl, ideal, signals, options); break;
    }
  });
  return runs;
}

std::vector<double> chain_residual(const SimulationTrace& trace, const LevelDecomposition& decomp,
                                   NodeId i, NodeId j, NodeId s) {
  const auto& L = decomp.parents(i);
  const bool siblings = j != s && std::find(L.begin(), L.end(), j) != L.end() &&
                        std::find(L.begin(), L.end(), s) != L.end();
  if (!siblings) {
    throw Error(ErrorCode::kNotSiblingParents,
                "chain_residual: " + std::to_string(j.value) + " and " + std::to_string(s.value) +
                    " are not distinct parents of " + std::to_string(i.value));
  }
  auto chain = [&](NodeId start) {
    std::vector<std::size_t> edges;
    for (NodeId a = start; !decomp.is_leader(a); a = decomp.parent_of(a)) {
      edges.push_back(trace.edge_index(a, decomp.parent_of(a)));
    }
    return edges;
  };
  const auto from_j = chain(j);
  const auto from_s = chain(s);
  const std::size_t ij = trace.edge_index(i, j);
  const std::size_t is = trace.edge_index(i, s);
  const NodeId lj = decomp.leader_of(j), ls = decomp.leader_of(s);

  std::vector<double> out;
  out.reserve(trace.times.size());
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const auto& z = trace.errors[k];
    Vector r = z[is] - z[ij];
    for (std::size_t e : from_j) r -= z[e];
    for (std::size_t e : from_s) r += z[e];
    if (lj != ls) r -= trace.states[k][lj.index()] - trace.states[k][ls.index()];
    out.push_back(r.norm());
  }
  return out;
}

double error_dynamics_check(const SimulationTrace& trace, const FormationSpec& spec,
                            const LevelDecomposition& decomp, const ControllerSet& ctrl) {
  const Matrix& A1 = spec.agent(decomp.reference_leader()).A;
  auto is_break = [&](double t) {
    return std::any_of(trace.breakpoints.begin(), trace.breakpoints.end(),
                       [t](double b) { return std::abs(b - t) <= 1e-12 * (1.0 + b); });
  };
  // sum_s K_as z_as at grid point k, as an m-vector (zero for leaders).
  auto coupled = [&](NodeId a, std::size_t k) {
    Vector acc = Vector::Zero(spec.m);
    if (const auto* f = ctrl.find(a)) {
      for (const auto& [s, Ks] : f->K) acc += Ks * trace.errors[k][trace.edge_index(a, s)];
    }
    return acc;
  };

  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < trace.times.size(); ++k) {
    if (is_break(trace.times[k])) continue;
    const double h1 = trace.times[k] - trace.times[k - 1];
    const double h2 = trace.times[k + 1] - trace.times[k];
    const double c_prev = -h2 / (h1 * (h1 + h2));
    const double c_mid = (h2 - h1) / (h1 * h2);
    const double c_next = h1 / (h2 * (h1 + h2));
    for (std::size_t e = 0; e < trace.edges.size(); ++e) {
      const NodeId i = trace.edges[e].from, j = trace.edges[e].to;
      const Vector fd = c_prev * trace.errors[k - 1][e] + c_mid * trace.errors[k][e] +
                        c_next * trace.errors[k + 1][e];
      Vector rhs = A1 * trace.errors[k][e] - spec.agent(i).B * coupled(i, k) +
                   spec.agent(j).B * coupled(j, k);
      if (decomp.is_leader(j)) rhs -= spec.agent(j).B * trace.inputs[k][j.index()];
      worst = std::max(worst, (fd - rhs).norm());
    }
  }
  return worst;
}

}  // namespace formation
