#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "formation/corpus.hpp"
#include "formation/model.hpp"
#include "generators.hpp"

using namespace formation;
using formation::testing::Rng;

namespace {

FormationSpec graph(int nodes, std::vector<std::pair<int, int>> edges, int n = 1) {
  FormationSpec spec;
  spec.n = n;
  spec.m = 1;
  spec.agents.assign(nodes, {Matrix::Zero(n, n), Matrix::Zero(n, 1)});
  for (auto [i, j] : edges) spec.edges.push_back({NodeId(i), NodeId(j), Vector::Ones(n)});
  return spec;
}

std::vector<NodeId> ids(std::initializer_list<int> v) {
  std::vector<NodeId> out;
  for (int x : v) out.push_back(NodeId(x));
  return out;
}

// Longest directed path from each node to a sink, by exhaustive recursion.
std::vector<int> longest_path_oracle(const FormationSpec& spec) {
  const int l = spec.agent_count();
  std::function<int(int)> depth = [&](int i) {
    int best = 0;
    for (const auto& e : spec.edges) {
      if (e.from.value == i) best = std::max(best, 1 + depth(e.to.value));
    }
    return best;
  };
  std::vector<int> out(l);
  for (int i = 1; i <= l; ++i) out[i - 1] = depth(i);
  return out;
}

// Leaders reachable from each node.
std::set<int> reachable_leaders(const FormationSpec& spec, int i) {
  std::set<int> out;
  bool has_out = false;
  for (const auto& e : spec.edges) {
    if (e.from.value == i) {
      has_out = true;
      auto sub = reachable_leaders(spec, e.to.value);
      out.insert(sub.begin(), sub.end());
    }
  }
  if (!has_out) out.insert(i);
  return out;
}

}  // namespace

TEST_CASE("validate accepts the acyclic triangle") {
  const auto spec = corpus::triangle();
  CHECK(find_violations(spec).empty());
  CHECK_NOTHROW(validate(spec));
}

TEST_CASE("validate reports a 2-cycle with a closed-walk witness") {
  const auto spec = graph(2, {{1, 2}, {2, 1}});
  try {
    validate(spec);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.has(ViolationKind::kCycleDetected));
    CHECK(e.code() == ErrorCode::kCycleDetected);
    for (const auto& v : e.violations()) {
      if (v.kind != ViolationKind::kCycleDetected) continue;
      REQUIRE(v.nodes.size() == 3);
      CHECK(v.nodes.front() == v.nodes.back());
      for (std::size_t k = 0; k + 1 < v.nodes.size(); ++k) {
        CHECK(spec.find_edge(v.nodes[k], v.nodes[k + 1]) != nullptr);
      }
    }
  }
}

TEST_CASE("validate reports disconnected components") {
  const auto spec = graph(2, {});
  try {
    validate(spec);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.has(ViolationKind::kNotWeaklyConnected));
    for (const auto& v : e.violations()) {
      if (v.kind == ViolationKind::kNotWeaklyConnected) {
        CHECK(v.components == std::vector<std::vector<NodeId>>{ids({1}), ids({2})});
      }
    }
  }
}

TEST_CASE("validate is exhaustive") {
  auto spec = graph(4, {{1, 1}, {2, 1}, {2, 1}});
  spec.agents[2].A = Matrix::Zero(2, 2);
  spec.edges.push_back({NodeId(7), NodeId(1), Vector::Ones(1)});
  const auto v = find_violations(spec);
  auto has = [&](ViolationKind k) {
    return std::any_of(v.begin(), v.end(), [k](const Violation& x) { return x.kind == k; });
  };
  CHECK(has(ViolationKind::kSelfLoop));
  CHECK(has(ViolationKind::kDuplicateEdge));
  CHECK(has(ViolationKind::kDimensionMismatch));
  CHECK(has(ViolationKind::kInvalidNode));
  CHECK(has(ViolationKind::kNotWeaklyConnected));
}

TEST_CASE("dimension mismatch names the agent and the shapes") {
  auto spec = corpus::example2();
  spec.agents[1].B = Matrix::Zero(3, 1);
  spec.edges[0].d = Vector::Zero(3);
  const auto v = find_violations(spec);
  REQUIRE(v.size() == 2);
  CHECK(v[0].kind == ViolationKind::kDimensionMismatch);
  CHECK(v[0].message.find("agent 2") != std::string::npos);
  CHECK(v[0].message.find("3x1") != std::string::npos);
}

TEST_CASE("decompose: triangle levels, parent and offsets") {
  const auto spec = corpus::triangle();
  const auto dec = decompose(spec);
  CHECK(dec.levels == std::vector<std::vector<NodeId>>{ids({1}), ids({2}), ids({3})});
  CHECK(dec.parent_of(NodeId(3)) == NodeId(2));
  CHECK(dec.offset_of(NodeId(1)) == Vector::Zero(2));
  CHECK(dec.offset_of(NodeId(2)) == spec.find_edge(NodeId(2), NodeId(1))->d);
  CHECK(dec.offset_of(NodeId(3)) ==
        spec.find_edge(NodeId(3), NodeId(2))->d + spec.find_edge(NodeId(2), NodeId(1))->d);
  CHECK(dec.parents(NodeId(3)) == ids({1, 2}));
}

TEST_CASE("decompose: chain") {
  const auto dec = decompose(corpus::example2());
  CHECK(dec.levels == std::vector<std::vector<NodeId>>{ids({1}), ids({2}), ids({3})});
  CHECK(dec.leader_of(NodeId(3)) == NodeId(1));
  CHECK(dec.order_of(NodeId(3)) == 2);
  CHECK(dec.offset_of(NodeId(3)) == (Vector(2) << 4, 4).finished());
}

TEST_CASE("decompose: single agent") {
  FormationSpec spec = graph(1, {});
  const auto dec = decompose(spec);
  CHECK(dec.levels.size() == 1);
  CHECK(dec.order_of(NodeId(1)) == 0);
  CHECK(dec.offset_of(NodeId(1)) == Vector::Zero(1));
  CHECK(dec.leader_of(NodeId(1)) == NodeId(1));
}

TEST_CASE("decompose renumbers when ids are not order-consistent") {
  // 1 follows 3, 3 follows 2: levels {2}, {3}, {1}.
  const auto spec = graph(3, {{1, 3}, {3, 2}});
  const auto dec = decompose(spec);
  CHECK(dec.renumbering == ids({2, 3, 1}));
  CHECK(dec.new_index[0] == 3);
  CHECK(dec.parent_of(NodeId(1)) == NodeId(3));
}

TEST_CASE("parent prefers the highest parent level over the largest id") {
  // 4 follows 1 (level 1) and 2 (leader); 1 follows 2.
  const auto spec = graph(4, {{1, 2}, {4, 1}, {4, 2}, {3, 4}});
  const auto dec = decompose(spec);
  CHECK(dec.parent_of(NodeId(4)) == NodeId(1));
  CHECK(dec.order_of(dec.parent_of(NodeId(4))) == dec.order_of(NodeId(4)) - 1);
}

TEST_CASE("decompose rejects cycles") {
  CHECK_THROWS_AS(decompose(graph(3, {{1, 2}, {2, 3}, {3, 1}})), ValidationError);
}

TEST_CASE("weak components and induced subformations") {
  const auto spec = graph(5, {{2, 1}, {4, 3}, {5, 3}});
  const auto comps = weak_components(spec);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0] == ids({1, 2}));
  CHECK(comps[1] == ids({3, 4, 5}));
  const auto sub = induced_subformation(spec, comps[1]);
  CHECK(sub.agent_count() == 3);
  CHECK(sub.edges.size() == 2);
  CHECK(sub.find_edge(NodeId(2), NodeId(1)) != nullptr);
  CHECK(sub.find_edge(NodeId(3), NodeId(1)) != nullptr);
}

TEST_CASE("multi-leader witness") {
  SUBCASE("two leaders sharing a follower") {
    const auto spec = graph(3, {{3, 1}, {3, 2}});
    const auto w = find_multi_leader_witness(decompose(spec), spec);
    REQUIRE(w);
    CHECK(w->vertex == NodeId(3));
    CHECK(w->first_leader == NodeId(1));
    CHECK(w->second_leader == NodeId(2));
    CHECK(w->path_to_first == ids({3, 1}));
    CHECK(w->path_to_second == ids({3, 2}));
  }
  SUBCASE("four nodes") {
    const auto spec = graph(4, {{3, 1}, {4, 3}, {4, 2}});
    const auto w = find_multi_leader_witness(decompose(spec), spec);
    REQUIRE(w);
    CHECK(w->vertex == NodeId(4));
    CHECK(w->path_to_first == ids({4, 3, 1}));
    CHECK(w->path_to_second == ids({4, 2}));
  }
  SUBCASE("single-leader chain") {
    const auto spec = corpus::example2();
    CHECK_FALSE(find_multi_leader_witness(decompose(spec), spec));
  }
}

TEST_CASE("property: decomposition invariants on random DAGs") {
  Rng rng(20240611);
  for (int trial = 0; trial < 500; ++trial) {
    const int nodes = std::uniform_int_distribution<int>(1, 9)(rng);
    const int leaders = std::uniform_int_distribution<int>(1, std::max(1, nodes / 2))(rng);
    const auto spec =
        formation::testing::random_integer_instance(rng, {nodes, leaders, 0.3, true}, 2, 1);
    CAPTURE(trial);
    REQUIRE(find_violations(spec).empty());
    const auto dec = decompose(spec);

    // Partition of V into nonempty levels.
    std::vector<int> seen(nodes, 0);
    for (const auto& level : dec.levels) {
      CHECK_FALSE(level.empty());
      for (NodeId id : level) ++seen[id.index()];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

    // Levels equal longest paths to a sink.
    const auto depth = longest_path_oracle(spec);
    for (int i = 0; i < nodes; ++i) CHECK(dec.order[i] == depth[i]);

    for (const auto& e : spec.edges) {
      CHECK(dec.order_of(e.from) > dec.order_of(e.to));
      CHECK(dec.new_index[e.from.index()] > dec.new_index[e.to.index()]);
    }
    for (int i = 0; i < nodes; ++i) {
      const NodeId id = NodeId::from_index(i);
      if (dec.is_leader(id)) {
        CHECK(dec.parent_of(id) == id);
        CHECK(dec.offset_of(id) == Vector::Zero(2));
        continue;
      }
      const NodeId p = dec.parent_of(id);
      CHECK(spec.find_edge(id, p) != nullptr);
      CHECK(dec.order_of(p) == dec.order_of(id) - 1);
      // Explicit sum along the p-chain, exact for integer displacements.
      Vector sum = Vector::Zero(2);
      NodeId a = id;
      for (int s = 0; s < dec.order_of(id); ++s) {
        sum += spec.find_edge(a, dec.parent_of(a))->d;
        a = dec.parent_of(a);
      }
      CHECK(dec.is_leader(a));
      CHECK(a == dec.leader_of(id));
      CHECK(sum == dec.offset_of(id));
    }

    // Witness exists iff there are several leaders.
    const auto w = find_multi_leader_witness(dec, spec);
    CHECK(w.has_value() == (dec.leader_count() > 1));
    if (w) {
      const auto reach = reachable_leaders(spec, w->vertex.value);
      CHECK(reach.count(w->first_leader.value) == 1);
      CHECK(reach.count(w->second_leader.value) == 1);
      for (const auto* path : {&w->path_to_first, &w->path_to_second}) {
        CHECK(path->front() == w->vertex);
        for (std::size_t k = 0; k + 1 < path->size(); ++k) {
          CHECK(spec.find_edge((*path)[k], (*path)[k + 1]) != nullptr);
        }
      }
    }
  }
}
