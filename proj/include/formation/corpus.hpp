#pragma once

#include <string>
#include <vector>

#include "formation/model.hpp"

namespace formation::corpus {

/// Three identical Hurwitz agents (A = -I, n = 2, m = 1) on the acyclic
/// triangle {(2,1), (3,1), (3,2)} with every d equal to e1 and B = A e1.
/// Every two-agent pair is stable; the formation is not.
FormationSpec example1();

/// Chain 3 -> 2 -> 1 with an unstable, uncontrolled leader. The formation
/// is stable; the pair {3, 2} is not.
FormationSpec example2();

/// Two leaders (1, 2) followed by agent 3 with d_31 != d_32.
FormationSpec remark5();

/// Double integrators on the acyclic triangle with consistent
/// displacements d_31 = d_32 + d_21.
FormationSpec triangle();

/// Names accepted by by_name, in a fixed order.
const std::vector<std::string>& names();

/// Throws InvalidInput for an unknown name.
FormationSpec by_name(const std::string& name);

}  // namespace formation::corpus
