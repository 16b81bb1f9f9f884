#pragma once

#include <optional>
#include <string>
#include <vector>

#include "formation/errors.hpp"
#include "formation/types.hpp"

namespace formation {

struct AgentDynamics {
  Matrix A;  // n x n
  Matrix B;  // n x m
};

/// A follower-to-leader link carrying the desired displacement d_ij:
/// ideally x_from + d = x_to.
struct Edge {
  NodeId from;
  NodeId to;
  Vector d;
};

/// A complete formation instance. Agents are numbered 1..l in list order.
struct FormationSpec {
  int n = 0;
  int m = 0;
  std::vector<AgentDynamics> agents;
  std::vector<Edge> edges;

  int agent_count() const { return static_cast<int>(agents.size()); }
  const AgentDynamics& agent(NodeId id) const { return agents.at(id.index()); }
  /// Edge (from, to), or nullptr.
  const Edge* find_edge(NodeId from, NodeId to) const;
};

enum class ViolationKind {
  kCycleDetected,
  kDimensionMismatch,
  kNotWeaklyConnected,
  kDuplicateEdge,
  kSelfLoop,
  kInvalidNode,
};

struct Violation {
  ViolationKind kind;
  std::string message;
  // Cycle witness (closed walk, first node repeated at the end), offending
  // agent, or the edge endpoints, depending on kind.
  std::vector<NodeId> nodes;
  // Weak components, for kNotWeaklyConnected.
  std::vector<std::vector<NodeId>> components;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const { return violations_; }
  bool has(ViolationKind kind) const;

 private:
  std::vector<Violation> violations_;
};

/// Every invariant violation of the instance (empty when valid).
std::vector<Violation> find_violations(const FormationSpec& spec);

/// Returns spec unchanged when valid; otherwise throws ValidationError
/// listing all violations.
const FormationSpec& validate(const FormationSpec& spec);

/// Weak components in ascending order of their smallest id; each sorted.
std::vector<std::vector<NodeId>> weak_components(const FormationSpec& spec);

/// The sub-instance induced by `nodes` (ascending), renumbered 1..k in
/// that order.
FormationSpec induced_subformation(const FormationSpec& spec,
                                   const std::vector<NodeId>& nodes);

/// Level sets, order function, designated parents, cumulative offsets and
/// leader reach of an acyclic formation graph. All per-node vectors are
/// indexed by NodeId::index().
struct LevelDecomposition {
  std::vector<std::vector<NodeId>> levels;      // V_0..V_r, ascending ids
  std::vector<int> order;                       // O(i)
  std::vector<NodeId> parent;                   // p(i); p(i) = i for leaders
  std::vector<Vector> offset;                   // D_i
  std::vector<NodeId> leader_reach;             // l_i = p^{O(i)}(i)
  std::vector<std::vector<NodeId>> parents_of;  // L_i, ascending ids
  std::vector<NodeId> renumbering;              // new position k -> original id
  std::vector<int> new_index;                   // original id -> 1-based new index

  const std::vector<NodeId>& leaders() const { return levels.front(); }
  int leader_count() const { return static_cast<int>(levels.front().size()); }
  int node_count() const { return static_cast<int>(order.size()); }
  bool is_leader(NodeId id) const { return order[id.index()] == 0; }

  int order_of(NodeId id) const { return order[id.index()]; }
  NodeId parent_of(NodeId id) const { return parent[id.index()]; }
  const Vector& offset_of(NodeId id) const { return offset[id.index()]; }
  NodeId leader_of(NodeId id) const { return leader_reach[id.index()]; }
  const std::vector<NodeId>& parents(NodeId id) const { return parents_of[id.index()]; }

  /// The leader whose A plays the role of A_1: first in the renumbering.
  NodeId reference_leader() const { return renumbering.front(); }
  /// Non-leaders in renumbered order.
  std::vector<NodeId> followers() const;
};

/// Builds the level decomposition. Requires an acyclic graph with valid
/// node ids; throws ValidationError otherwise. Weak connectivity is not
/// required here.
LevelDecomposition decompose(const FormationSpec& spec);

struct MultiLeaderWitness {
  NodeId vertex;
  NodeId first_leader;
  NodeId second_leader;
  std::vector<NodeId> path_to_first;   // vertex ... first_leader
  std::vector<NodeId> path_to_second;  // vertex ... second_leader
};

/// A vertex with directed paths to two distinct leaders; none when the
/// formation has a single leader.
std::optional<MultiLeaderWitness> find_multi_leader_witness(
    const LevelDecomposition& decomp, const FormationSpec& spec);

}  // namespace formation
