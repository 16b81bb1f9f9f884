#include "formation/model.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace formation {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotWeaklyConnected: return "NotWeaklyConnected";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kNotStabilizable: return "NotStabilizable";
    case ErrorCode::kSynthesisFailure: return "SynthesisFailure";
    case ErrorCode::kRateTooAggressive: return "RateTooAggressive";
    case ErrorCode::kNotStable: return "NotStable";
    case ErrorCode::kMissingState: return "MissingState";
    case ErrorCode::kStepTooLarge: return "StepTooLarge";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kNotSiblingParents: return "NotSiblingParents";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

const Edge* FormationSpec::find_edge(NodeId from, NodeId to) const {
  for (const auto& e : edges) {
    if (e.from == from && e.to == to) return &e;
  }
  return nullptr;
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  os << "invalid formation (" << violations.size() << " violation"
     << (violations.size() == 1 ? "" : "s") << ")";
  for (const auto& v : violations) os << "\n  - " << v.message;
  return os.str();
}

ErrorCode primary_code(const std::vector<Violation>& violations) {
  if (violations.empty()) return ErrorCode::kInvalidInput;
  switch (violations.front().kind) {
    case ViolationKind::kCycleDetected: return ErrorCode::kCycleDetected;
    case ViolationKind::kDimensionMismatch: return ErrorCode::kDimensionMismatch;
    case ViolationKind::kNotWeaklyConnected: return ErrorCode::kNotWeaklyConnected;
    case ViolationKind::kDuplicateEdge: return ErrorCode::kDuplicateEdge;
    case ViolationKind::kSelfLoop: return ErrorCode::kSelfLoop;
    case ViolationKind::kInvalidNode: return ErrorCode::kInvalidInput;
  }
  return ErrorCode::kInvalidInput;
}

std::string shape(const Matrix& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

bool valid_id(NodeId id, int count) { return id.value >= 1 && id.value <= count; }

// Out-neighbour lists over edges with valid, distinct endpoints.
std::vector<std::vector<NodeId>> out_neighbours(const FormationSpec& spec) {
  const int l = spec.agent_count();
  std::vector<std::set<NodeId>> sets(static_cast<std::size_t>(std::max(l, 0)));
  for (const auto& e : spec.edges) {
    if (!valid_id(e.from, l) || !valid_id(e.to, l) || e.from == e.to) continue;
    sets[e.from.index()].insert(e.to);
  }
  std::vector<std::vector<NodeId>> out(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) out[i].assign(sets[i].begin(), sets[i].end());
  return out;
}

// A directed cycle as a closed walk, or empty when the graph is acyclic.
std::vector<NodeId> find_cycle(const std::vector<std::vector<NodeId>>& out) {
  enum Color { kWhite, kGrey, kBlack };
  std::vector<Color> color(out.size(), kWhite);
  std::vector<NodeId> stack;
  std::vector<NodeId> cycle;

  // Iterative DFS keeping the grey path on `stack`.
  for (std::size_t root = 0; root < out.size() && cycle.empty(); ++root) {
    if (color[root] != kWhite) continue;
    std::vector<std::size_t> cursor;
    stack.push_back(NodeId::from_index(root));
    cursor.push_back(0);
    color[root] = kGrey;
    while (!stack.empty() && cycle.empty()) {
      const NodeId top = stack.back();
      const auto& next = out[top.index()];
      if (cursor.back() == next.size()) {
        color[top.index()] = kBlack;
        stack.pop_back();
        cursor.pop_back();
        continue;
      }
      const NodeId v = next[cursor.back()++];
      if (color[v.index()] == kGrey) {
        auto it = std::find(stack.begin(), stack.end(), v);
        cycle.assign(it, stack.end());
        cycle.push_back(v);
      } else if (color[v.index()] == kWhite) {
        color[v.index()] = kGrey;
        stack.push_back(v);
        cursor.push_back(0);
      }
    }
    stack.clear();
  }
  return cycle;
}

std::string format_nodes(const std::vector<NodeId>& nodes, const char* sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) os << sep;
    os << nodes[i].value;
  }
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(primary_code(violations), join_violations(violations)),
      violations_(std::move(violations)) {}

bool ValidationError::has(ViolationKind kind) const {
  return std::any_of(violations_.begin(), violations_.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::vector<std::vector<NodeId>> weak_components(const FormationSpec& spec) {
  const int l = spec.agent_count();
  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(l));
  for (const auto& e : spec.edges) {
    if (!valid_id(e.from, l) || !valid_id(e.to, l)) continue;
    adj[e.from.index()].push_back(e.to);
    adj[e.to.index()].push_back(e.from);
  }
  std::vector<int> label(static_cast<std::size_t>(l), -1);
  std::vector<std::vector<NodeId>> components;
  for (int start = 0; start < l; ++start) {
    if (label[start] >= 0) continue;
    const int c = static_cast<int>(components.size());
    components.emplace_back();
    std::deque<int> queue{start};
    label[start] = c;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      components.back().push_back(NodeId::from_index(u));
      for (NodeId v : adj[u]) {
        if (label[v.index()] < 0) {
          label[v.index()] = c;
          queue.push_back(static_cast<int>(v.index()));
        }
      }
    }
    std::sort(components.back().begin(), components.back().end());
  }
  return components;
}

std::vector<Violation> find_violations(const FormationSpec& spec) {
  std::vector<Violation> out;
  const int l = spec.agent_count();
  if (spec.n <= 0 || spec.m <= 0) {
    out.push_back({ViolationKind::kDimensionMismatch,
                   "state and input dimensions must be positive (n=" + std::to_string(spec.n) +
                       ", m=" + std::to_string(spec.m) + ")",
                   {}, {}});
  }
  if (l == 0) {
    out.push_back({ViolationKind::kDimensionMismatch, "formation has no agents", {}, {}});
    return out;
  }
  for (int i = 0; i < l; ++i) {
    const auto& a = spec.agents[i];
    const NodeId id = NodeId::from_index(i);
    if (a.A.rows() != spec.n || a.A.cols() != spec.n) {
      out.push_back({ViolationKind::kDimensionMismatch,
                     "agent " + std::to_string(id.value) + ": A is " + shape(a.A) +
                         ", expected " + std::to_string(spec.n) + "x" + std::to_string(spec.n),
                     {id}, {}});
    }
    if (a.B.rows() != spec.n || a.B.cols() != spec.m) {
      out.push_back({ViolationKind::kDimensionMismatch,
                     "agent " + std::to_string(id.value) + ": B is " + shape(a.B) +
                         ", expected " + std::to_string(spec.n) + "x" + std::to_string(spec.m),
                     {id}, {}});
    }
  }

  std::set<EdgeKey> seen;
  for (const auto& e : spec.edges) {
    const std::string name =
        "(" + std::to_string(e.from.value) + "," + std::to_string(e.to.value) + ")";
    if (!valid_id(e.from, l) || !valid_id(e.to, l)) {
      out.push_back({ViolationKind::kInvalidNode,
                     "edge " + name + " references an agent outside 1.." + std::to_string(l),
                     {e.from, e.to}, {}});
      continue;
    }
    if (e.from == e.to) {
      out.push_back({ViolationKind::kSelfLoop, "self-loop " + name, {e.from, e.to}, {}});
    }
    if (!seen.insert({e.from, e.to}).second) {
      out.push_back({ViolationKind::kDuplicateEdge, "duplicate edge " + name, {e.from, e.to}, {}});
    }
    if (e.d.size() != spec.n) {
      out.push_back({ViolationKind::kDimensionMismatch,
                     "edge " + name + ": displacement has length " + std::to_string(e.d.size()) +
                         ", expected " + std::to_string(spec.n),
                     {e.from, e.to}, {}});
    }
  }

  const auto cycle = find_cycle(out_neighbours(spec));
  if (!cycle.empty()) {
    out.push_back({ViolationKind::kCycleDetected, "cycle " + format_nodes(cycle, " -> "), cycle, {}});
  }

  auto components = weak_components(spec);
  if (components.size() > 1) {
    std::string msg = "graph is not weakly connected; components:";
    for (const auto& c : components) msg += " {" + format_nodes(c, ",") + "}";
    out.push_back({ViolationKind::kNotWeaklyConnected, msg, {}, std::move(components)});
  }
  return out;
}

const FormationSpec& validate(const FormationSpec& spec) {
  auto violations = find_violations(spec);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return spec;
}

FormationSpec induced_subformation(const FormationSpec& spec, const std::vector<NodeId>& nodes) {
  FormationSpec sub;
  sub.n = spec.n;
  sub.m = spec.m;
  std::map<NodeId, NodeId> relabel;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    relabel[nodes[k]] = NodeId::from_index(k);
    sub.agents.push_back(spec.agent(nodes[k]));
  }
  for (const auto& e : spec.edges) {
    auto f = relabel.find(e.from);
    auto t = relabel.find(e.to);
    if (f != relabel.end() && t != relabel.end()) sub.edges.push_back({f->second, t->second, e.d});
  }
  return sub;
}

std::vector<NodeId> LevelDecomposition::followers() const {
  std::vector<NodeId> out;
  for (std::size_t k = 1; k < levels.size(); ++k) {
    out.insert(out.end(), levels[k].begin(), levels[k].end());
  }
  return out;
}

LevelDecomposition decompose(const FormationSpec& spec) {
  const int l = spec.agent_count();
  std::vector<Violation> structural;
  for (const auto& v : find_violations(spec)) {
    if (v.kind == ViolationKind::kCycleDetected || v.kind == ViolationKind::kInvalidNode ||
        v.kind == ViolationKind::kDimensionMismatch) {
      structural.push_back(v);
    }
  }
  if (!structural.empty()) throw ValidationError(std::move(structural));

  const auto out = out_neighbours(spec);
  LevelDecomposition dec;
  dec.parents_of = out;
  dec.order.assign(static_cast<std::size_t>(l), -1);

  // V_{k+1} collects the nodes whose parents all lie in V_0..V_k.
  std::vector<int> remaining(static_cast<std::size_t>(l));
  std::vector<std::vector<NodeId>> children(static_cast<std::size_t>(l));
  for (int i = 0; i < l; ++i) {
    remaining[i] = static_cast<int>(out[i].size());
    for (NodeId j : out[i]) children[j.index()].push_back(NodeId::from_index(i));
  }
  std::vector<NodeId> frontier;
  for (int i = 0; i < l; ++i) {
    if (remaining[i] == 0) frontier.push_back(NodeId::from_index(i));
  }
  while (!frontier.empty()) {
    const int k = static_cast<int>(dec.levels.size());
    std::sort(frontier.begin(), frontier.end());
    for (NodeId v : frontier) dec.order[v.index()] = k;
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      for (NodeId c : children[v.index()]) {
        if (--remaining[c.index()] == 0) next.push_back(c);
      }
    }
    dec.levels.push_back(std::move(frontier));
    frontier = std::move(next);
  }

  dec.new_index.assign(static_cast<std::size_t>(l), 0);
  for (const auto& level : dec.levels) {
    for (NodeId v : level) {
      dec.renumbering.push_back(v);
      dec.new_index[v.index()] = static_cast<int>(dec.renumbering.size());
    }
  }

  dec.parent.resize(static_cast<std::size_t>(l));
  dec.offset.assign(static_cast<std::size_t>(l), Vector::Zero(spec.n));
  dec.leader_reach.resize(static_cast<std::size_t>(l));
  for (NodeId v : dec.renumbering) {
    const auto& L = out[v.index()];
    if (L.empty()) {
      dec.parent[v.index()] = v;
      dec.leader_reach[v.index()] = v;
      continue;
    }
    // p(i): the parent with the largest index in the level-sorted numbering.
    const NodeId p = *std::max_element(L.begin(), L.end(), [&](NodeId a, NodeId b) {
      return dec.new_index[a.index()] < dec.new_index[b.index()];
    });
    dec.parent[v.index()] = p;
    dec.leader_reach[v.index()] = dec.leader_reach[p.index()];
    const Edge* e = spec.find_edge(v, p);
    dec.offset[v.index()] = e->d + dec.offset[p.index()];
  }
  return dec;
}

std::optional<MultiLeaderWitness> find_multi_leader_witness(const LevelDecomposition& decomp,
                                                            const FormationSpec& spec) {
  if (decomp.leader_count() <= 1) return std::nullopt;
  const int l = spec.agent_count();

  // Breadth-first search along edge direction, neighbours ascending, so the
  // reported paths are shortest and deterministic.
  auto search = [&](NodeId start) {
    std::vector<NodeId> via(static_cast<std::size_t>(l), NodeId{});
    std::vector<bool> seen(static_cast<std::size_t>(l), false);
    std::deque<NodeId> queue{start};
    seen[start.index()] = true;
    while (!queue.empty()) {
      const NodeId u = queue.front();
      queue.pop_front();
      for (NodeId v : decomp.parents(u)) {
        if (seen[v.index()]) continue;
        seen[v.index()] = true;
        via[v.index()] = u;
        queue.push_back(v);
      }
    }
    return std::pair{seen, via};
  };
  auto path = [](NodeId start, NodeId goal, const std::vector<NodeId>& via) {
    std::vector<NodeId> p{goal};
    while (p.back() != start) p.push_back(via[p.back().index()]);
    std::reverse(p.begin(), p.end());
    return p;
  };

  for (NodeId v : decomp.renumbering) {
    if (decomp.is_leader(v)) continue;
    auto [seen, via] = search(v);
    std::vector<NodeId> reached;
    for (NodeId leader : decomp.leaders()) {
      if (seen[leader.index()]) reached.push_back(leader);
    }
    if (reached.size() >= 2) {
      return MultiLeaderWitness{v, reached[0], reached[1], path(v, reached[0], via),
                                path(v, reached[1], via)};
    }
  }
  return std::nullopt;
}

}  // namespace formation
