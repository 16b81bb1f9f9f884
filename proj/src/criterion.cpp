#include "formation/criterion.hpp"

#include <algorithm>

#include "formation/errors.hpp"

namespace formation {

const FollowerSolvability* CriterionReport::solvability(NodeId id) const {
  for (const auto& f : condition2.followers) {
    if (f.node == id) return &f;
  }
  return nullptr;
}

double defect_scale(const FormationSpec& spec, const LevelDecomposition& decomp) {
  double dmax = 0.0;
  for (const auto& e : spec.edges) dmax = std::max(dmax, e.d.norm());
  return 1.0 + spec.agent(decomp.reference_leader()).A.norm() + dmax;
}

Corollary classify(const FormationSpec& /*spec*/, const LevelDecomposition& decomp) {
  if (decomp.leader_count() > 1) return Corollary::kMultiLeader;
  for (NodeId id : decomp.followers()) {
    if (decomp.parents(id).size() != 1) return Corollary::kNone;
  }
  return Corollary::kInTree;
}

CriterionReport check(const FormationSpec& spec, const LevelDecomposition& decomp,
                      const Tolerances& tol, Execution exec) {
  CriterionReport r;
  r.reference_leader = decomp.reference_leader();
  r.leader_count = decomp.leader_count();
  r.scale = defect_scale(spec, decomp);
  r.applicable_corollary = classify(spec, decomp);
  const Matrix& A1 = spec.agent(r.reference_leader).A;

  // Conditions 1 and 2, one independent task per follower.
  const auto followers = decomp.followers();
  r.condition1.followers.resize(followers.size());
  r.condition2.followers.resize(followers.size());
  parallel_for(followers.size(), exec, [&](std::size_t k) {
    const NodeId id = followers[k];
    const auto& agent = spec.agent(id);
    r.condition1.followers[k] = {id, is_stabilizable(agent.A, agent.B, tol),
                                 is_hurwitz(agent.A, tol.eps_hurwitz)};
    r.condition2.followers[k] = {id, solve_matrix_equation(agent.B, A1 - agent.A, tol),
                                 solve_matrix_equation(agent.B, agent.A * decomp.offset_of(id), tol)};
  });
  // Report rows in ascending id order regardless of renumbering.
  std::sort(r.condition1.followers.begin(), r.condition1.followers.end(),
            [](const auto& a, const auto& b) { return a.node < b.node; });
  std::sort(r.condition2.followers.begin(), r.condition2.followers.end(),
            [](const auto& a, const auto& b) { return a.node < b.node; });
  r.condition2.pass = std::all_of(r.condition2.followers.begin(), r.condition2.followers.end(),
                                  [](const auto& f) { return f.pass(); });

  // Condition 3.
  const double defect_tol = tol.eps_solve * r.scale;
  r.condition3.vacuous = r.applicable_corollary == Corollary::kInTree;
  r.condition3.edges.resize(spec.edges.size());
  parallel_for(spec.edges.size(), exec, [&](std::size_t k) {
    const auto& e = spec.edges[k];
    EdgeDisplacement row;
    row.edge = {e.from, e.to};
    row.defect = e.d - (decomp.offset_of(e.from) - decomp.offset_of(e.to));
    row.defect_norm = row.defect.norm();
    row.pass = row.defect_norm <= defect_tol;
    r.condition3.edges[k] = std::move(row);
  });
  std::sort(r.condition3.edges.begin(), r.condition3.edges.end(),
            [](const auto& a, const auto& b) { return a.edge < b.edge; });
  r.condition3.pass = std::all_of(r.condition3.edges.begin(), r.condition3.edges.end(),
                                  [](const auto& e) { return e.pass; });

  // Condition 4.
  r.condition4.binding = r.leader_count > 1;
  r.condition4.reference = is_hurwitz(A1, tol.eps_hurwitz);
  bool leaders_equal = true;
  for (NodeId id : decomp.leaders()) {
    const double defect = (spec.agent(id).A - A1).norm();
    r.condition4.leaders.push_back({id, defect});
    leaders_equal = leaders_equal && defect <= defect_tol;
  }
  r.condition4.pass =
      !r.condition4.binding || (leaders_equal && r.condition4.reference.is_hurwitz);

  r.condition1.implied = r.applicable_corollary == Corollary::kMultiLeader &&
                         r.condition2.pass && r.condition4.pass;
  const bool all_stabilizable =
      std::all_of(r.condition1.followers.begin(), r.condition1.followers.end(),
                  [](const auto& f) { return f.pbh.stabilizable; });
  r.condition1.pass = r.condition1.implied || all_stabilizable;

  const bool stable =
      r.condition1.pass && r.condition2.pass && r.condition3.pass && r.condition4.pass;
  r.overall = stable ? Verdict::kStable : Verdict::kUnstable;
  return r;
}

ControllerVerification verify_controller(const FormationSpec& spec,
                                         const LevelDecomposition& decomp,
                                         const ControllerSet& ctrl, const Tolerances& tol) {
  check_controller_shape(ctrl, spec, decomp);
  const int l = spec.agent_count();
  std::vector<Matrix> M(static_cast<std::size_t>(l));
  std::vector<Vector> offsets(static_cast<std::size_t>(l));

  ControllerVerification v;
  for (int i = 0; i < l; ++i) {
    const NodeId id = NodeId::from_index(i);
    const auto& agent = spec.agent(id);
    const Vector& D = decomp.offset_of(id);
    const auto* f = ctrl.find(id);
    if (!f) {
      M[i] = agent.A;
      offsets[i] = -agent.A * D;
      continue;
    }
    Matrix gain = f->S;
    Vector raw = f->k - f->S * D;
    for (const auto& [s, Ks] : f->K) {
      gain += Ks;
      raw -= Ks * decomp.offset_of(s);
    }
    M[i] = agent.A + agent.B * gain;
    offsets[i] = agent.B * raw - agent.A * D;
    if (!is_hurwitz(agent.A + agent.B * f->S, tol.eps_hurwitz).is_hurwitz) {
      v.non_hurwitz.push_back(id);
    }
  }

  for (const auto& e : spec.edges) {
    EdgeControllerDefect row{{e.from, e.to},
                             (M[e.from.index()] - M[e.to.index()]).norm(),
                             (offsets[e.from.index()] - offsets[e.to.index()]).norm()};
    v.max_gain_defect = std::max(v.max_gain_defect, row.gain_defect);
    v.max_offset_defect = std::max(v.max_offset_defect, row.offset_defect);
    v.edges.push_back(row);
  }
  std::sort(v.edges.begin(), v.edges.end(),
            [](const auto& a, const auto& b) { return a.edge < b.edge; });
  v.tolerance = tol.eps_solve * defect_scale(spec, decomp);
  v.pass = v.max_gain_defect <= v.tolerance && v.max_offset_defect <= v.tolerance &&
           v.non_hurwitz.empty();
  return v;
}

}  // namespace formation
