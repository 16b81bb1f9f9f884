#include <algorithm>
#include <cmath>
#include <numbers>

#include "formation/errors.hpp"
#include "formation/simulation.hpp"

namespace formation {

LeaderSignal LeaderSignal::constant(Vector c) {
  LeaderSignal s;
  s.kind = Kind::kConstant;
  s.value = std::move(c);
  return s;
}

LeaderSignal LeaderSignal::sinusoid(Vector amplitude, double omega, double phase) {
  LeaderSignal s;
  s.kind = Kind::kSinusoid;
  s.value = std::move(amplitude);
  s.omega = omega;
  s.phase = phase;
  return s;
}

LeaderSignal LeaderSignal::piecewise_constant(std::vector<double> times,
                                              std::vector<Vector> values) {
  LeaderSignal s;
  s.kind = Kind::kPiecewiseConstant;
  s.times = std::move(times);
  s.values = std::move(values);
  return s;
}

namespace {

std::size_t piece_index(const std::vector<double>& times, double t) {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

}  // namespace

Vector LeaderSignal::at(double t, int m) const { return on_piece(t, t, m); }

Vector LeaderSignal::on_piece(double t, double probe, int m) const {
  switch (kind) {
    case Kind::kZero: return Vector::Zero(m);
    case Kind::kConstant: return value;
    case Kind::kSinusoid: return value * std::sin(omega * t + phase);
    case Kind::kPiecewiseConstant: return values[piece_index(times, probe)];
  }
  return Vector::Zero(m);
}

double LeaderSignal::sup_norm(double t) const {
  switch (kind) {
    case Kind::kZero: return 0.0;
    case Kind::kConstant: return value.norm();
    case Kind::kSinusoid: {
      const double a = phase, b = omega * t + phase;
      const double lo = std::min(a, b), hi = std::max(a, b);
      constexpr double kPi = std::numbers::pi;
      // Does [lo, hi] contain a peak pi/2 + k pi of |sin|?
      const double k = std::ceil((lo - kPi / 2) / kPi);
      const double peak = kPi / 2 + k * kPi;
      const double s = peak <= hi ? 1.0 : std::max(std::abs(std::sin(lo)), std::abs(std::sin(hi)));
      return value.norm() * s;
    }
    case Kind::kPiecewiseConstant: {
      double best = 0.0;
      const std::size_t last = piece_index(times, t);
      for (std::size_t k = 0; k <= last && k < values.size(); ++k) {
        best = std::max(best, values[k].norm());
      }
      return best;
    }
  }
  return 0.0;
}

std::vector<double> LeaderSignal::breakpoints(double horizon) const {
  std::vector<double> out;
  if (kind != Kind::kPiecewiseConstant) return out;
  for (double t : times) {
    if (t > 0.0 && t < horizon) out.push_back(t);
  }
  return out;
}

void LeaderSignal::check(int m) const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidInput, "leader signal: " + what);
  };
  switch (kind) {
    case Kind::kZero: return;
    case Kind::kConstant:
    case Kind::kSinusoid:
      if (value.size() != m) fail("vector must have length m = " + std::to_string(m));
      if (!value.allFinite() || !std::isfinite(omega) || !std::isfinite(phase)) fail("non-finite");
      return;
    case Kind::kPiecewiseConstant:
      if (values.size() != times.size() + 1) fail("needs one more value than breakpoints");
      for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
          fail("breakpoints must be positive and strictly increasing");
        }
      }
      for (const auto& v : values) {
        if (v.size() != m) fail("values must have length m = " + std::to_string(m));
      }
      return;
  }
}

}  // namespace formation
