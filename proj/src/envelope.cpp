#include <algorithm>
#include <cmath>
#include <limits>

#include "formation/errors.hpp"
#include "formation/simulation.hpp"

namespace formation {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Rate {
  double alpha = kNaN;
  bool vanishing = false;  // the homogeneous error is identically zero
  bool fitted = false;
};

// Least-squares slope of log ||z|| against t; alpha is minus the slope.
Rate decay_rate(const std::vector<double>& t, const std::vector<double>& norm,
                const EnvelopeOptions& options) {
  Rate rate;
  const double peak = *std::max_element(norm.begin(), norm.end());
  if (!(peak > 0.0)) {
    rate.vanishing = true;
    return rate;
  }
  const double cutoff = options.floor * peak;
  const double window = (1.0 - options.tail_fraction) * t.back();
  auto collect = [&](bool tail_only) {
    std::vector<std::size_t> picked;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (norm[k] > cutoff && (!tail_only || t[k] >= window)) picked.push_back(k);
    }
    return picked;
  };
  auto picked = collect(true);
  if (picked.size() < 8) picked = collect(false);
  if (picked.size() < 2) return rate;

  double mt = 0.0, my = 0.0;
  for (std::size_t k : picked) {
    mt += t[k];
    my += std::log(norm[k]);
  }
  mt /= static_cast<double>(picked.size());
  my /= static_cast<double>(picked.size());
  double stt = 0.0, sty = 0.0;
  for (std::size_t k : picked) {
    stt += (t[k] - mt) * (t[k] - mt);
    sty += (t[k] - mt) * (std::log(norm[k]) - my);
  }
  if (!(stt > 0.0)) return rate;
  rate.alpha = -sty / stt;
  rate.fitted = true;
  return rate;
}

std::vector<double> edge_norms(const SimulationTrace& trace, std::size_t e) {
  std::vector<double> out(trace.times.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = trace.errors[k][e].norm();
  return out;
}

EnvelopeFit fit(const SimulationTrace& full, const SimulationTrace& homogeneous,
                const SimulationTrace* forced, const EnvelopeOptions& options) {
  if (full.times.empty()) throw Error(ErrorCode::kInvalidInput, "fit_envelope: empty trace");
  if (homogeneous.times.size() != full.times.size() ||
      (forced && forced->times.size() != full.times.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "fit_envelope: runs use different grids");
  }
  EnvelopeFit out;
  out.initial_error = full.error_norm(0);
  const double z0 = out.initial_error;
  const auto& U = full.input_sup;
  const bool has_input = std::any_of(U.begin(), U.end(), [](double u) { return u > 0.0; });
  out.degenerate = !(z0 > 0.0) && !has_input;
  const double tol = options.tolerance * (1.0 + z0);

  bool all_ok = true;
  for (std::size_t e = 0; e < full.edges.size(); ++e) {
    EdgeEnvelope env;
    env.edge = full.edges[e];
    const auto z = edge_norms(full, e);

    if (forced) {
      const auto f = edge_norms(*forced, e);
      for (std::size_t k = 0; k < f.size(); ++k) {
        if (U[k] > 0.0) env.beta = std::max(env.beta, f[k] / U[k]);
      }
    }

    const Rate rate = decay_rate(homogeneous.times, edge_norms(homogeneous, e), options);
    env.alpha = rate.alpha;
    // C = max (||z|| - beta U) e^{alpha t} / ||z(0)||, evaluated in logs.
    if (rate.fitted && z0 > 0.0) {
      double log_c = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < z.size(); ++k) {
        const double excess = z[k] - env.beta * U[k];
        if (excess > 0.0) {
          log_c = std::max(log_c, std::log(excess) + env.alpha * full.times[k] - std::log(z0));
        }
      }
      env.C = std::exp(log_c);
    }
    for (std::size_t k = 0; k < z.size(); ++k) {
      double bound = env.beta * U[k];
      if (rate.fitted && env.C > 0.0) {
        bound += std::exp(std::log(env.C) - env.alpha * full.times[k] + std::log(z0));
      }
      env.max_violation = std::max(env.max_violation, z[k] - bound);
    }
    out.max_violation = std::max(out.max_violation, env.max_violation);

    const bool rate_ok = rate.vanishing || (rate.fitted && env.alpha > 0.0);
    const bool finite = std::isfinite(env.C) && std::isfinite(env.beta);
    all_ok = all_ok && rate_ok && finite && env.max_violation <= tol;
    out.edges.push_back(env);
  }
  out.pass = out.degenerate || all_ok;
  return out;
}

}  // namespace

EnvelopeFit fit_envelope(const EnvelopeRuns& runs, const EnvelopeOptions& options) {
  return fit(runs.full, runs.homogeneous, &runs.forced, options);
}

EnvelopeFit fit_envelope(const SimulationTrace& trace, const LevelDecomposition& decomp,
                         const EnvelopeOptions& options) {
  for (const auto& row : trace.inputs) {
    for (NodeId leader : decomp.leaders()) {
      if (row[leader.index()].squaredNorm() > 0.0) {
        throw Error(ErrorCode::kInvalidInput,
                    "fit_envelope: single-trace form needs zero leader inputs");
      }
    }
  }
  return fit(trace, trace, nullptr, options);
}

}  // namespace formation
