#pragma once

#include <iosfwd>
#include <string>

#include "formation/criterion.hpp"
#include "formation/pairwise.hpp"
#include "formation/simulation.hpp"

namespace formation::report {

/// Plain-text tables listing every condition with pass/fail and residuals.
std::string criterion_table(const CriterionReport& report);
std::string verification_table(const ControllerVerification& v);
std::string pairwise_table(const PairwiseReport& report);
std::string envelope_table(const EnvelopeFit& fit);

/// Line chart of ||z_ij(t)|| per edge, log-scaled, as a standalone SVG.
void write_error_svg(std::ostream& os, const SimulationTrace& trace);

}  // namespace formation::report
