#pragma once

#include <cstdint>
#include <string>

#include "formation/numerics.hpp"
#include "formation/simulation.hpp"

namespace formation {

/// Settings shared by every CLI command.
struct RunConfig {
  Tolerances tolerances;
  double dt = 0.0;  // 0 selects the default step rule
  double horizon = 20.0;
  EnvelopeOptions envelope;
  std::string out_dir = ".";
  std::uint64_t seed = 0;

  SimulationOptions simulation() const { return {horizon, dt}; }
  /// Throws InvalidInput unless every tolerance is positive (rank_factor may
  /// be 0 for the default), dt >= 0 and horizon > dt.
  void check() const;
};

}  // namespace formation
