#pragma once

#include <compare>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace formation {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// 1-based agent identifier as it appears in spec files and reports.
struct NodeId {
  int value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(int v) : value(v) {}

  constexpr std::size_t index() const { return static_cast<std::size_t>(value - 1); }
  static constexpr NodeId from_index(std::size_t i) { return NodeId(static_cast<int>(i) + 1); }

  auto operator<=>(const NodeId&) const = default;
};

/// Directed link "from follows to".
struct EdgeKey {
  NodeId from;
  NodeId to;

  auto operator<=>(const EdgeKey&) const = default;
};

}  // namespace formation
