#include "formation/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "formation/errors.hpp"

namespace formation::io {

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::kParseError, what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) parse_fail(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(where + ": missing field '" + key + "'");
  return *it;
}

int int_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer()) parse_fail(where + "." + key + ": expected an integer");
  return v.get<int>();
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) parse_fail(where + ": expected a number");
  return v.get<double>();
}

void reject_unknown(const Json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      parse_fail(where + ": unknown field '" + key + "'");
    }
  }
}

Json complex_list(const std::vector<Complex>& eigs) {
  Json out = Json::array();
  for (const auto& z : eigs) out.push_back({z.real(), z.imag()});
  return out;
}

Json to_json(const LinearSolveReport& r) {
  return {{"solvable", r.solvable},
          {"residual_norm", r.residual_norm},
          {"relative_residual", r.relative_residual},
          {"rank_B", r.rank_B},
          {"solution", io::to_json(Matrix(r.solution))}};
}

Json to_json(const HurwitzReport& r) {
  return {{"is_hurwitz", r.is_hurwitz},
          {"spectral_abscissa", r.spectral_abscissa},
          {"margin", r.margin},
          {"eigenvalues", complex_list(r.eigenvalues)}};
}

Json to_json(const StabilizabilityReport& r) {
  Json out{{"stabilizable", r.stabilizable}};
  if (r.witness) out["witness"] = {r.witness->real(), r.witness->imag()};
  return out;
}

const char* verdict_name(Verdict v) { return v == Verdict::kStable ? "stable" : "unstable"; }

const char* corollary_name(Corollary c) {
  switch (c) {
    case Corollary::kNone: return "none";
    case Corollary::kMultiLeader: return "multi_leader";
    case Corollary::kInTree: return "in_tree";
  }
  return "none";
}

std::string format_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

Json to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) parse_fail(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array()) parse_fail(where + ": row " + std::to_string(i) + " is not an array");
    if (i == 0) cols = static_cast<Eigen::Index>(j[i].size());
    if (static_cast<Eigen::Index>(j[i].size()) != cols) parse_fail(where + ": ragged rows");
  }
  Matrix M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(r, c) = number(j[r][c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return M;
}

Vector vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) parse_fail(where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

Json to_json(const FormationSpec& spec) {
  Json agents = Json::array();
  for (const auto& a : spec.agents) agents.push_back({{"A", to_json(a.A)}, {"B", to_json(a.B)}});
  Json edges = Json::array();
  for (const auto& e : spec.edges) {
    edges.push_back({{"from", e.from.value}, {"to", e.to.value}, {"d", to_json(e.d)}});
  }
  return {{"n", spec.n}, {"m", spec.m}, {"agents", agents}, {"edges", edges}};
}

FormationSpec spec_from_json(const Json& j) {
  FormationSpec spec;
  spec.n = int_field(j, "n", "spec");
  spec.m = int_field(j, "m", "spec");
  const Json& agents = field(j, "agents", "spec");
  const Json& edges = field(j, "edges", "spec");
  if (!agents.is_array()) parse_fail("spec.agents: expected an array");
  if (!edges.is_array()) parse_fail("spec.edges: expected an array");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string where = "spec.agents[" + std::to_string(i) + "]";
    spec.agents.push_back({matrix_from_json(field(agents[i], "A", where), where + ".A"),
                           matrix_from_json(field(agents[i], "B", where), where + ".B")});
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "spec.edges[" + std::to_string(k) + "]";
    spec.edges.push_back({NodeId(int_field(edges[k], "from", where)),
                          NodeId(int_field(edges[k], "to", where)),
                          vector_from_json(field(edges[k], "d", where), where + ".d")});
  }
  return spec;
}

Json to_json(const ControllerSet& ctrl) {
  Json followers = Json::array();
  for (const auto& f : ctrl.followers) {
    Json K = Json::array();
    for (const auto& [s, Ks] : f.K) K.push_back({{"parent", s.value}, {"gain", to_json(Ks)}});
    followers.push_back({{"node", f.node.value},
                         {"S", to_json(f.S)},
                         {"K", K},
                         {"k", to_json(f.k)},
                         {"N", to_json(f.N)},
                         {"k_tilde", to_json(f.k_tilde)}});
  }
  return {{"n", ctrl.n}, {"m", ctrl.m}, {"followers", followers}};
}

ControllerSet controller_from_json(const Json& j, const LevelDecomposition& decomp) {
  ControllerSet ctrl;
  ctrl.n = int_field(j, "n", "controller");
  ctrl.m = int_field(j, "m", "controller");
  const Json& followers = field(j, "followers", "controller");
  if (!followers.is_array()) parse_fail("controller.followers: expected an array");
  for (std::size_t i = 0; i < followers.size(); ++i) {
    const Json& f = followers[i];
    const std::string where = "controller.followers[" + std::to_string(i) + "]";
    const NodeId node(int_field(f, "node", where));
    if (node.value < 1 || node.value > decomp.node_count()) {
      throw Error(ErrorCode::kInvalidInput, where + ": node out of range");
    }
    Matrix S = matrix_from_json(field(f, "S", where), where + ".S");
    std::map<NodeId, Matrix> K;
    const Json& Kj = field(f, "K", where);
    if (!Kj.is_array()) parse_fail(where + ".K: expected an array");
    for (std::size_t k = 0; k < Kj.size(); ++k) {
      const std::string kw = where + ".K[" + std::to_string(k) + "]";
      const NodeId s(int_field(Kj[k], "parent", kw));
      if (s.value < 1 || s.value > decomp.node_count()) {
        throw Error(ErrorCode::kInvalidInput, kw + ": parent out of range");
      }
      if (!K.emplace(s, matrix_from_json(field(Kj[k], "gain", kw), kw + ".gain")).second) {
        throw Error(ErrorCode::kInvalidInput, kw + ": duplicate parent");
      }
    }
    Vector k = vector_from_json(field(f, "k", where), where + ".k");
    auto c = controller_from_gains(node, std::move(S), std::move(K), std::move(k), decomp);
    if (f.contains("N") || f.contains("k_tilde")) {
      Matrix N = matrix_from_json(field(f, "N", where), where + ".N");
      Vector k_tilde = vector_from_json(field(f, "k_tilde", where), where + ".k_tilde");
      if (N.rows() != c.N.rows() || N.cols() != c.N.cols() || k_tilde.size() != c.k_tilde.size()) {
        throw Error(ErrorCode::kDimensionMismatch, where + ": N or k_tilde has the wrong shape");
      }
      c.N = std::move(N);
      c.k_tilde = std::move(k_tilde);
    }
    ctrl.followers.push_back(std::move(c));
  }
  std::sort(ctrl.followers.begin(), ctrl.followers.end(),
            [](const FollowerController& a, const FollowerController& b) { return a.node < b.node; });
  for (std::size_t i = 1; i < ctrl.followers.size(); ++i) {
    if (ctrl.followers[i].node == ctrl.followers[i - 1].node) {
      throw Error(ErrorCode::kInvalidInput, "controller: duplicate entry for follower " +
                                                std::to_string(ctrl.followers[i].node.value));
    }
  }
  for (const auto& f : ctrl.followers) {
    if (decomp.is_leader(f.node)) {
      throw Error(ErrorCode::kInvalidInput,
                  "controller: agent " + std::to_string(f.node.value) + " is a leader");
    }
  }
  if (parametrization_defect(ctrl, decomp) > 1e-10) {
    throw Error(ErrorCode::kInvalidInput,
                "controller: stored N / k_tilde disagree with S, K and k");
  }
  return ctrl;
}

Json to_json(const RunConfig& c) {
  return {{"tolerances",
           {{"eps_solve", c.tolerances.eps_solve},
            {"eps_hurwitz", c.tolerances.eps_hurwitz},
            {"rank_factor", c.tolerances.rank_factor},
            {"pbh_floor", c.tolerances.pbh_floor}}},
          {"dt", c.dt},
          {"T", c.horizon},
          {"envelope",
           {{"tail_fraction", c.envelope.tail_fraction},
            {"floor", c.envelope.floor},
            {"tolerance", c.envelope.tolerance}}},
          {"out", c.out_dir},
          {"seed", c.seed}};
}

RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("config: expected an object");
  reject_unknown(j, {"tolerances", "dt", "T", "envelope", "out", "seed"}, "config");
  RunConfig c;
  if (j.contains("tolerances")) {
    const Json& t = j["tolerances"];
    if (!t.is_object()) parse_fail("config.tolerances: expected an object");
    reject_unknown(t, {"eps_solve", "eps_hurwitz", "rank_factor", "pbh_floor"},
                   "config.tolerances");
    if (t.contains("eps_solve")) c.tolerances.eps_solve = number(t["eps_solve"], "eps_solve");
    if (t.contains("eps_hurwitz")) c.tolerances.eps_hurwitz = number(t["eps_hurwitz"], "eps_hurwitz");
    if (t.contains("rank_factor")) c.tolerances.rank_factor = number(t["rank_factor"], "rank_factor");
    if (t.contains("pbh_floor")) c.tolerances.pbh_floor = number(t["pbh_floor"], "pbh_floor");
  }
  if (j.contains("dt")) c.dt = number(j["dt"], "config.dt");
  if (j.contains("T")) c.horizon = number(j["T"], "config.T");
  if (j.contains("envelope")) {
    const Json& e = j["envelope"];
    if (!e.is_object()) parse_fail("config.envelope: expected an object");
    reject_unknown(e, {"tail_fraction", "floor", "tolerance"}, "config.envelope");
    if (e.contains("tail_fraction")) c.envelope.tail_fraction = number(e["tail_fraction"], "tail_fraction");
    if (e.contains("floor")) c.envelope.floor = number(e["floor"], "floor");
    if (e.contains("tolerance")) c.envelope.tolerance = number(e["tolerance"], "tolerance");
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) parse_fail("config.out: expected a string");
    c.out_dir = j["out"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      parse_fail("config.seed: expected a non-negative integer");
    }
    if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0) {
      parse_fail("config.seed: expected a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.check();
  return c;
}

Json to_json(const CriterionReport& r) {
  Json c1 = Json::array();
  for (const auto& f : r.condition1.followers) {
    c1.push_back({{"node", f.node.value},
                  {"pbh", to_json(f.pbh)},
                  {"open_loop", to_json(f.open_loop)}});
  }
  Json c2 = Json::array();
  for (const auto& f : r.condition2.followers) {
    c2.push_back({{"node", f.node.value},
                  {"pass", f.pass()},
                  {"gain", to_json(f.gain)},
                  {"offset", to_json(f.offset)}});
  }
  Json c3 = Json::array();
  for (const auto& e : r.condition3.edges) {
    c3.push_back({{"from", e.edge.from.value},
                  {"to", e.edge.to.value},
                  {"pass", e.pass},
                  {"defect", to_json(e.defect)},
                  {"defect_norm", e.defect_norm}});
  }
  Json leaders = Json::array();
  for (const auto& l : r.condition4.leaders) {
    leaders.push_back({{"node", l.node.value}, {"defect", l.defect}});
  }
  return {{"overall", verdict_name(r.overall)},
          {"reference_leader", r.reference_leader.value},
          {"leader_count", r.leader_count},
          {"scale", r.scale},
          {"applicable_corollary", corollary_name(r.applicable_corollary)},
          {"condition1",
           {{"pass", r.condition1.pass}, {"implied", r.condition1.implied}, {"followers", c1}}},
          {"condition2", {{"pass", r.condition2.pass}, {"followers", c2}}},
          {"condition3",
           {{"pass", r.condition3.pass}, {"vacuous", r.condition3.vacuous}, {"edges", c3}}},
          {"condition4",
           {{"pass", r.condition4.pass},
            {"binding", r.condition4.binding},
            {"leaders", leaders},
            {"reference", to_json(r.condition4.reference)}}}};
}

Json to_json(const ControllerVerification& v) {
  Json edges = Json::array();
  for (const auto& e : v.edges) {
    edges.push_back({{"from", e.edge.from.value},
                     {"to", e.edge.to.value},
                     {"gain_defect", e.gain_defect},
                     {"offset_defect", e.offset_defect}});
  }
  Json bad = Json::array();
  for (NodeId id : v.non_hurwitz) bad.push_back(id.value);
  return {{"pass", v.pass},
          {"tolerance", v.tolerance},
          {"max_gain_defect", v.max_gain_defect},
          {"max_offset_defect", v.max_offset_defect},
          {"non_hurwitz", bad},
          {"edges", edges}};
}

Json to_json(const PairwiseReport& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"from", p.edge.from.value},
                     {"to", p.edge.to.value},
                     {"verdict", verdict_name(p.verdict)},
                     {"stabilizability", to_json(p.stabilizability)},
                     {"gain", to_json(p.gain)},
                     {"offset", to_json(p.offset)}});
  }
  return {{"all_stable", r.all_stable()}, {"pairs", pairs}};
}

Json to_json(const EnvelopeFit& fit) {
  Json edges = Json::array();
  for (const auto& e : fit.edges) {
    Json alpha = std::isfinite(e.alpha) ? Json(e.alpha) : Json(nullptr);
    edges.push_back({{"from", e.edge.from.value},
                     {"to", e.edge.to.value},
                     {"C", e.C},
                     {"alpha", alpha},
                     {"beta", e.beta},
                     {"max_violation", e.max_violation}});
  }
  return {{"pass", fit.pass},
          {"degenerate", fit.degenerate},
          {"initial_error", fit.initial_error},
          {"max_violation", fit.max_violation},
          {"edges", edges}};
}

void write_trace_csv(std::ostream& os, const SimulationTrace& trace,
                     const LevelDecomposition& decomp) {
  if (trace.times.empty()) return;
  const Eigen::Index n = trace.states.front().front().size();
  std::vector<std::size_t> edge_order(trace.edges.size());
  for (std::size_t e = 0; e < edge_order.size(); ++e) edge_order[e] = e;
  auto rank = [&](NodeId id) { return decomp.new_index[id.index()]; };
  std::sort(edge_order.begin(), edge_order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ea = trace.edges[a];
    const auto& eb = trace.edges[b];
    return std::pair(rank(ea.from), rank(ea.to)) < std::pair(rank(eb.from), rank(eb.to));
  });

  os << "time";
  for (NodeId id : decomp.renumbering) {
    for (Eigen::Index c = 1; c <= n; ++c) os << ",x_" << id.value << "[" << c << "]";
  }
  for (std::size_t e : edge_order) {
    for (Eigen::Index c = 1; c <= n; ++c) {
      os << ",z_" << trace.edges[e].from.value << "_" << trace.edges[e].to.value << "[" << c << "]";
    }
  }
  os << "\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    os << format_number(trace.times[k]);
    for (NodeId id : decomp.renumbering) {
      const Vector& x = trace.states[k][id.index()];
      for (Eigen::Index c = 0; c < n; ++c) os << "," << format_number(x(c));
    }
    for (std::size_t e : edge_order) {
      const Vector& z = trace.errors[k][e];
      for (Eigen::Index c = 0; c < n; ++c) os << "," << format_number(z(c));
    }
    os << "\n";
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    parse_fail("'" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kInvalidInput, "failed writing '" + path + "'");
}

FormationSpec load_spec(const std::string& path) { return spec_from_json(read_json_file(path)); }

ControllerSet load_controller(const std::string& path, const LevelDecomposition& decomp) {
  return controller_from_json(read_json_file(path), decomp);
}

RunConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

}  // namespace formation::io
