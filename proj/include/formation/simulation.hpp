#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "formation/controller.hpp"
#include "formation/model.hpp"
#include "formation/parallel.hpp"

namespace formation {

/// Exogenous input of one leader.
struct LeaderSignal {
  enum class Kind { kZero, kConstant, kSinusoid, kPiecewiseConstant };

  Kind kind = Kind::kZero;
  Vector value;      // kConstant: c; kSinusoid: amplitude
  double omega = 0.0;
  double phase = 0.0;
  // kPiecewiseConstant: breakpoints t_1 < ... < t_K and K + 1 values;
  // values[0] holds on [0, t_1), values[k] on [t_k, t_{k+1}).
  std::vector<double> times;
  std::vector<Vector> values;

  static LeaderSignal zero() { return {}; }
  static LeaderSignal constant(Vector c);
  static LeaderSignal sinusoid(Vector amplitude, double omega, double phase = 0.0);
  static LeaderSignal piecewise_constant(std::vector<double> times, std::vector<Vector> values);

  /// u(t); right-continuous at breakpoints.
  Vector at(double t, int m) const;
  /// Value on the piece containing `probe`, evaluated at t (identical to at()
  /// except for piecewise signals, where `probe` selects the piece).
  Vector on_piece(double t, double probe, int m) const;
  /// sup over [0, t] of ||u||, in closed form.
  double sup_norm(double t) const;
  /// Breakpoints inside (0, horizon).
  std::vector<double> breakpoints(double horizon) const;
  void check(int m) const;
};

struct SimulationOptions {
  double horizon = 20.0;
  double dt = 0.0;  // 0 selects min(1e-2, 0.1 / (1 + max ||A~_i||_F))
};

/// Stepsize rule and stability cap.
double default_step(const FormationSpec& spec, const ControllerSet& ctrl);
double step_cap(const FormationSpec& spec, const ControllerSet& ctrl);

struct SimulationTrace {
  std::vector<double> times;
  std::vector<std::vector<Vector>> states;  // [time][agent index]
  std::vector<EdgeKey> edges;               // spec edge order
  std::vector<Vector> displacements;        // d per edge
  std::vector<std::vector<Vector>> errors;  // [time][edge]
  std::vector<std::vector<Vector>> inputs;  // [time][agent index]
  // sum over leaders of sup_{[0, t]} ||u_s||, per time, exact.
  std::vector<double> input_sup;
  std::vector<double> breakpoints;
  std::string integrator = "rk4";
  double step = 0.0;

  std::size_t edge_index(NodeId from, NodeId to) const;
  /// Frobenius norm of the stacked error at grid point k.
  double error_norm(std::size_t k) const;
};

/// Integrates the closed loop x_i' = A~_i x_i + B_i (sum K_is x_s + k_i +
/// delta_i u_i) with classical RK4 on the stacked state. Steps are aligned
/// to signal breakpoints. Leaders without an entry in `signals` get zero
/// input. Throws StepTooLarge, NonFiniteState, DimensionMismatch.
SimulationTrace simulate(const FormationSpec& spec, const LevelDecomposition& decomp,
                         const ControllerSet& ctrl, const std::vector<Vector>& x0,
                         const std::map<NodeId, LeaderSignal>& signals,
                         const SimulationOptions& options);

/// Initial states on the ideal manifold: x_i = x0 - D_i.
std::vector<Vector> ideal_initial_states(const LevelDecomposition& decomp, const Vector& x0);

/// max over the trace of |z - (x_i - x_j + d)| relative to 1 + max |x|.
double error_recompute_defect(const SimulationTrace& trace);

struct EnvelopeOptions {
  double tail_fraction = 0.5;  // regression window: last part of the horizon
  double floor = 1e-13;        // samples below floor * peak are ignored
  double tolerance = 1e-6;     // violation tolerance, times (1 + ||z(0)||)
};

struct EdgeEnvelope {
  EdgeKey edge;
  double C = 0.0;
  double alpha = 0.0;  // NaN when the zero-input error vanishes on this edge
  double beta = 0.0;
  double max_violation = 0.0;
};

struct EnvelopeFit {
  std::vector<EdgeEnvelope> edges;
  double initial_error = 0.0;  // ||z(0)||
  bool degenerate = false;     // z(0) = 0 and no input: vacuous
  bool pass = false;
  double max_violation = 0.0;
};

/// The full run plus its two linear components: same x0 with zero leader
/// inputs, and ideal initial states with the same inputs.
struct EnvelopeRuns {
  SimulationTrace full;
  SimulationTrace homogeneous;
  SimulationTrace forced;
};

EnvelopeRuns envelope_runs(const FormationSpec& spec, const LevelDecomposition& decomp,
                           const ControllerSet& ctrl, const std::vector<Vector>& x0,
                           const std::map<NodeId, LeaderSignal>& signals,
                           const SimulationOptions& options,
                           Execution exec = Execution::kParallel);

/// Fits ||z_ij(t)|| <= C e^{-alpha t} ||z(0)|| + beta sum sup ||u_s|| per
/// edge and checks it on every grid point of the full run.
EnvelopeFit fit_envelope(const EnvelopeRuns& runs, const EnvelopeOptions& options = {});

/// Single-trace form for zero-input traces (the trace is its own
/// homogeneous component).
EnvelopeFit fit_envelope(const SimulationTrace& trace, const LevelDecomposition& decomp,
                         const EnvelopeOptions& options = {});

/// Norm of z_is - z_ij - R_js(z) - (x_{l_j} - x_{l_s}) at every grid point,
/// where R_js sums the errors along the p-chains from j and from s.
/// Throws NotSiblingParents unless j and s are distinct parents of i.
std::vector<double> chain_residual(const SimulationTrace& trace, const LevelDecomposition& decomp,
                                   NodeId i, NodeId j, NodeId s);

/// Largest gap between central differences of z_ij and the error dynamics
/// A_1 z_ij - B_i sum K_is z_is + B_j sum K_jv z_jv - delta_j B_j u_j
/// over interior grid points (points next to breakpoints are skipped).
double error_dynamics_check(const SimulationTrace& trace, const FormationSpec& spec,
                            const LevelDecomposition& decomp, const ControllerSet& ctrl);

}  // namespace formation
