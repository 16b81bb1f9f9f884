#include "formation/config.hpp"

#include <cmath>

#include "formation/errors.hpp"

namespace formation {

void RunConfig::check() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidInput, "config: " + what);
  };
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(tolerances.eps_solve)) fail("eps_solve must be positive");
  if (!positive(tolerances.eps_hurwitz)) fail("eps_hurwitz must be positive");
  if (!positive(tolerances.pbh_floor)) fail("pbh_floor must be positive");
  if (!std::isfinite(tolerances.rank_factor) || tolerances.rank_factor < 0.0) {
    fail("rank_factor must be non-negative (0 selects max(rows, cols))");
  }
  if (!std::isfinite(dt) || dt < 0.0) fail("dt must be non-negative (0 selects the default)");
  if (!positive(horizon) || !(horizon > dt)) fail("T must be positive and larger than dt");
  if (!(envelope.tail_fraction > 0.0 && envelope.tail_fraction <= 1.0)) {
    fail("envelope.tail_fraction must lie in (0, 1]");
  }
  if (!positive(envelope.floor)) fail("envelope.floor must be positive");
  if (!positive(envelope.tolerance)) fail("envelope.tolerance must be positive");
}

}  // namespace formation
