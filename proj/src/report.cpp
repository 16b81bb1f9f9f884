#include "formation/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace formation::report {

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

std::string fixed(double x, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string vec(const Matrix& M) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (i) os << "; ";
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << " ";
      os << fixed(M(i, j));
    }
  }
  os << "]";
  return os.str();
}

const char* mark(bool ok) { return ok ? "pass" : "FAIL"; }

std::string edge_name(EdgeKey e) {
  return "(" + std::to_string(e.from.value) + "," + std::to_string(e.to.value) + ")";
}

}  // namespace

std::string criterion_table(const CriterionReport& r) {
  std::ostringstream os;
  os << "verdict: " << (r.overall == Verdict::kStable ? "STABLE" : "UNSTABLE") << "\n";
  os << "leaders: " << r.leader_count << ", reference leader " << r.reference_leader.value
     << ", scale " << sci(r.scale) << ", structure "
     << (r.applicable_corollary == Corollary::kMultiLeader ? "multi-leader"
         : r.applicable_corollary == Corollary::kInTree    ? "in-tree"
                                                            : "general")
     << "\n\n";

  os << "condition 1: follower pairs (A_i, B_i) stabilizable  " << mark(r.condition1.pass)
     << (r.condition1.implied ? " (implied by conditions 2 and 4)" : "") << "\n";
  for (const auto& f : r.condition1.followers) {
    os << "  agent " << f.node.value << "  " << mark(f.pbh.stabilizable)
       << "  open-loop abscissa " << fixed(f.open_loop.spectral_abscissa);
    if (f.pbh.witness) {
      os << "  uncontrollable mode " << fixed(f.pbh.witness->real()) << "+"
         << fixed(f.pbh.witness->imag()) << "i";
    }
    os << "\n";
  }

  os << "condition 2: B_i N_i = A_1 - A_i and B_i k~_i = A_i D_i solvable  "
     << mark(r.condition2.pass) << "\n";
  for (const auto& f : r.condition2.followers) {
    os << "  agent " << f.node.value << "  " << mark(f.pass()) << "  gain residual "
       << sci(f.gain.relative_residual) << "  offset residual " << sci(f.offset.relative_residual);
    if (f.pass()) os << "  N = " << vec(f.gain.solution) << "  k~ = " << vec(f.offset.solution);
    os << "\n";
  }

  os << "condition 3: d_ij = D_i - D_j on every edge  " << mark(r.condition3.pass)
     << (r.condition3.vacuous ? " (vacuous: in-tree)" : "") << "\n";
  for (const auto& e : r.condition3.edges) {
    os << "  edge " << edge_name(e.edge) << "  " << mark(e.pass) << "  defect "
       << vec(e.defect.transpose()) << "  norm " << sci(e.defect_norm) << "\n";
  }

  os << "condition 4: equal leader matrices, A_1 Hurwitz  " << mark(r.condition4.pass)
     << (r.condition4.binding ? "" : " (not binding: single leader)") << "\n";
  for (const auto& l : r.condition4.leaders) {
    os << "  leader " << l.node.value << "  ||A_i - A_1|| " << sci(l.defect) << "\n";
  }
  os << "  A_1 spectral abscissa " << fixed(r.condition4.reference.spectral_abscissa)
     << (r.condition4.reference.is_hurwitz ? " (Hurwitz)" : " (not Hurwitz)") << "\n";
  return os.str();
}

std::string verification_table(const ControllerVerification& v) {
  std::ostringstream os;
  os << "controller verification: " << mark(v.pass) << "  tolerance " << sci(v.tolerance) << "\n";
  for (const auto& e : v.edges) {
    os << "  edge " << edge_name(e.edge) << "  gain defect " << sci(e.gain_defect)
       << "  offset defect " << sci(e.offset_defect) << "\n";
  }
  for (NodeId id : v.non_hurwitz) {
    os << "  agent " << id.value << ": A_i + B_i S_i is not Hurwitz\n";
  }
  return os.str();
}

std::string pairwise_table(const PairwiseReport& r) {
  std::ostringstream os;
  os << "two-agent subformations:\n";
  for (const auto& p : r.pairs) {
    os << "  edge " << edge_name(p.edge) << "  "
       << (p.verdict == Verdict::kStable ? "stable  " : "UNSTABLE")
       << "  stabilizable " << (p.stabilizability.stabilizable ? "yes" : "no")
       << "  B_i N_ij = A_j - A_i residual " << sci(p.gain.relative_residual)
       << "  B_i k~_ij = A_i d_ij residual " << sci(p.offset.relative_residual) << "\n";
  }
  return os.str();
}

std::string envelope_table(const EnvelopeFit& fit) {
  std::ostringstream os;
  os << "envelope: " << (fit.degenerate ? "pass (vacuous: z(0) = 0, no input)" : mark(fit.pass))
     << "  ||z(0)|| " << sci(fit.initial_error) << "  max violation " << sci(fit.max_violation)
     << "\n";
  for (const auto& e : fit.edges) {
    os << "  edge " << edge_name(e.edge) << "  C " << sci(e.C) << "  alpha "
       << (std::isfinite(e.alpha) ? sci(e.alpha) : std::string("undefined")) << "  beta "
       << sci(e.beta) << "\n";
  }
  return os.str();
}

void write_error_svg(std::ostream& os, const SimulationTrace& trace) {
  constexpr double kWidth = 800, kHeight = 480, kPad = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const double t0 = trace.times.empty() ? 0.0 : trace.times.front();
  const double t1 = trace.times.empty() ? 1.0 : trace.times.back();
  constexpr double kFloor = 1e-16;
  double lo = 0.0, hi = -16.0;
  for (const auto& row : trace.errors) {
    for (const auto& z : row) hi = std::max(hi, std::log10(std::max(z.norm(), kFloor)));
  }
  lo = std::max(-16.0, hi - 16.0);
  if (hi <= lo) hi = lo + 1.0;
  auto px = [&](double t) { return kPad + (t - t0) / std::max(t1 - t0, 1e-300) * (kWidth - 2 * kPad); };
  auto py = [&](double v) {
    const double c = std::clamp(std::log10(std::max(v, kFloor)), lo, hi);
    return kHeight - kPad - (c - lo) / (hi - lo) * (kHeight - 2 * kPad);
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<path d=\"M" << kPad << " " << kPad << " V" << kHeight - kPad << " H" << kWidth - kPad
     << "\" stroke=\"black\" fill=\"none\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">t</text>\n";
  os << "<text x=\"15\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 15 " << kHeight / 2
     << ")\" text-anchor=\"middle\">log10 ||z_ij||</text>\n";
  os << "<text x=\"" << kPad - 5 << "\" y=\"" << kPad << "\" text-anchor=\"end\">" << fixed(hi, 1)
     << "</text>\n";
  os << "<text x=\"" << kPad - 5 << "\" y=\"" << kHeight - kPad << "\" text-anchor=\"end\">"
     << fixed(lo, 1) << "</text>\n";
  os << "<text x=\"" << kWidth - kPad << "\" y=\"" << kHeight - kPad + 18
     << "\" text-anchor=\"end\">" << fixed(t1, 2) << "</text>\n";

  const std::size_t stride = std::max<std::size_t>(1, trace.times.size() / 2000);
  for (std::size_t e = 0; e < trace.edges.size(); ++e) {
    const char* color = kColors[e % 8];
    os << "<path fill=\"none\" stroke=\"" << color << "\" d=\"";
    for (std::size_t k = 0; k < trace.times.size(); k += stride) {
      os << (k == 0 ? "M" : " L") << fixed(px(trace.times[k]), 2) << " "
         << fixed(py(trace.errors[k][e].norm()), 2);
    }
    os << "\"/>\n";
    os << "<text x=\"" << kWidth - kPad + 5 << "\" y=\"" << kPad + 16 * e << "\" fill=\"" << color
       << "\">" << edge_name(trace.edges[e]) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace formation::report
