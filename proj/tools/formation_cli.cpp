// Command-line front end: check, synthesize, simulate, pairwise, demo.
//
// Exit codes: 0 stable / pass, 1 usage or input error, 2 unstable,
// 3 envelope check failed.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "formation/config.hpp"
#include "formation/corpus.hpp"
#include "formation/criterion.hpp"
#include "formation/io.hpp"
#include "formation/pairwise.hpp"
#include "formation/report.hpp"
#include "formation/simulation.hpp"
#include "formation/synthesis.hpp"

namespace fs = std::filesystem;
using namespace formation;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kUnstable = 2;
constexpr int kEnvelopeFail = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::string> out;

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : io::load_config(config_path);
    if (seed) c.seed = *seed;
    if (dt) c.dt = *dt;
    if (horizon) c.horizon = *horizon;
    if (out) c.out_dir = *out;
    c.check();
    return c;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "run configuration (JSON)");
  cmd->add_option("--seed", common.seed, "random seed");
  cmd->add_option("--dt", common.dt, "integration step (0: default rule)");
  cmd->add_option("--T", common.horizon, "simulation horizon");
  cmd->add_option("--out", common.out, "output directory");
}

std::string out_path(const RunConfig& config, const std::string& name) {
  fs::create_directories(config.out_dir);
  return (fs::path(config.out_dir) / name).string();
}

void write_json(const RunConfig& config, const std::string& name, const io::Json& j) {
  io::write_text_file(out_path(config, name), j.dump(2) + "\n");
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidInput, what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// zero | const:c1,...,cm | sin:a1,...,am:omega[:phase]
LeaderSignal parse_signal(const std::string& text) {
  if (text == "zero") return LeaderSignal::zero();
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "const" && !rest.empty()) {
    return LeaderSignal::constant(to_vector(parse_numbers(rest, "--signals")));
  }
  if (kind == "sin" && !rest.empty()) {
    std::vector<std::string> parts;
    std::stringstream ss(rest);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() == 2 || parts.size() == 3) {
      const Vector amp = to_vector(parse_numbers(parts[0], "--signals"));
      const double omega = parse_numbers(parts[1], "--signals").at(0);
      const double phase = parts.size() == 3 ? parse_numbers(parts[2], "--signals").at(0) : 0.0;
      return LeaderSignal::sinusoid(amp, omega, phase);
    }
  }
  throw Error(ErrorCode::kInvalidInput,
              "--signals: expected zero, const:c1,..,cm or sin:a1,..,am:omega[:phase]");
}

FormationSpec load_validated(const std::string& path) {
  FormationSpec spec = io::load_spec(path);
  validate(spec);
  return spec;
}

std::vector<Vector> random_states(const FormationSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> x0;
  for (int i = 0; i < spec.agent_count(); ++i) {
    Vector x(spec.n);
    for (int c = 0; c < spec.n; ++c) x(c) = normal(rng);
    x0.push_back(x);
  }
  return x0;
}

// ---------------------------------------------------------------- check

struct CheckArgs {
  std::string spec;
  bool split = false;
};

int run_check(const CheckArgs& args, const RunConfig& config) {
  FormationSpec spec = io::load_spec(args.spec);
  std::vector<FormationSpec> parts;
  if (args.split) {
    auto violations = find_violations(spec);
    const bool only_disconnected =
        std::all_of(violations.begin(), violations.end(), [](const Violation& v) {
          return v.kind == ViolationKind::kNotWeaklyConnected;
        });
    if (!only_disconnected) throw ValidationError(violations);
    for (const auto& comp : weak_components(spec)) {
      parts.push_back(induced_subformation(spec, comp));
    }
  } else {
    parts.push_back(validate(spec));
  }

  bool stable = true;
  io::Json reports = io::Json::array();
  std::string text;
  const auto components = weak_components(spec);
  for (std::size_t c = 0; c < parts.size(); ++c) {
    const auto decomp = decompose(parts[c]);
    const auto report = check(parts[c], decomp, config.tolerances);
    stable = stable && report.overall == Verdict::kStable;
    if (parts.size() > 1) {
      std::string ids;
      for (NodeId id : components[c]) ids += (ids.empty() ? "" : ",") + std::to_string(id.value);
      text += "component " + std::to_string(c + 1) + " (agents " + ids +
              ", renumbered 1..k in that order)\n";
    }
    text += report::criterion_table(report) + "\n";
    reports.push_back(io::to_json(report));
  }
  std::cout << text;
  write_json(config, "report.json", parts.size() == 1 ? reports[0] : io::Json{{"components", reports}});
  io::write_text_file(out_path(config, "report.txt"), text);
  return stable ? kOk : kUnstable;
}

// ----------------------------------------------------------- synthesize

struct SynthArgs {
  std::string spec;
  std::string strategy = "parent-only";
  bool leader_free = false;
  int seeds = 0;
};

SplitStrategy parse_strategy(const std::string& s) {
  if (s == "parent-only") return SplitStrategy::parent_only();
  if (s == "uniform") return SplitStrategy::uniform();
  throw Error(ErrorCode::kInvalidInput, "--strategy: expected parent-only or uniform");
}

int run_synthesize(const SynthArgs& args, const RunConfig& config) {
  const FormationSpec spec = load_validated(args.spec);
  const auto decomp = decompose(spec);
  const auto report = check(spec, decomp, config.tolerances);
  if (report.overall != Verdict::kStable) {
    std::cout << report::criterion_table(report);
    std::cerr << "synthesize: the formation is not internally stable; no controller exists\n";
    return kUnstable;
  }
  std::vector<ControllerSet> controllers;
  if (args.seeds > 0) {
    FamilyOptions opts;
    opts.count = args.seeds;
    opts.seed = config.seed;
    controllers = enumerate_family(spec, decomp, report, opts, config.tolerances);
  } else {
    SynthesisOptions opts;
    opts.split = parse_strategy(args.strategy);
    if (args.leader_free) opts.gains = GainChoice::kLeaderFree;
    controllers.push_back(synthesize(spec, decomp, report, opts, config.tolerances));
  }
  for (std::size_t k = 0; k < controllers.size(); ++k) {
    const std::string name =
        args.seeds > 0 ? "controller_" + std::to_string(k) + ".json" : "controller.json";
    write_json(config, name, io::to_json(controllers[k]));
    const auto v = verify_controller(spec, decomp, controllers[k], config.tolerances);
    std::cout << name << ": " << report::verification_table(v);
  }
  return kOk;
}

// ------------------------------------------------------------- simulate

struct SimArgs {
  std::string spec;
  std::string controller;
  bool automatic = false;
  bool ideal = false;
  bool random = false;
  std::string x0;
  std::string signals = "zero";
  bool svg = false;
};

std::vector<Vector> parse_initial_states(const std::string& text, const FormationSpec& spec) {
  io::Json j;
  try {
    j = io::Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    j = io::read_json_file(text);
  }
  if (!j.is_array() || static_cast<int>(j.size()) != spec.agent_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "--x0: need one state per agent");
  }
  std::vector<Vector> x0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    x0.push_back(io::vector_from_json(j[i], "--x0[" + std::to_string(i) + "]"));
  }
  return x0;
}

int run_simulate(const SimArgs& args, const RunConfig& config) {
  const FormationSpec spec = load_validated(args.spec);
  const auto decomp = decompose(spec);
  ControllerSet ctrl;
  if (!args.controller.empty()) {
    ctrl = io::load_controller(args.controller, decomp);
  } else {
    const auto report = check(spec, decomp, config.tolerances);
    if (report.overall != Verdict::kStable) {
      std::cout << report::criterion_table(report);
      std::cerr << "simulate: --auto needs an internally stable formation\n";
      return kUnstable;
    }
    ctrl = synthesize(spec, decomp, report, {}, config.tolerances);
  }

  std::vector<Vector> x0;
  if (args.ideal) {
    x0 = ideal_initial_states(decomp, random_states(spec, config.seed).front());
  } else if (!args.x0.empty()) {
    x0 = parse_initial_states(args.x0, spec);
  } else {
    x0 = random_states(spec, config.seed);
  }
  std::map<NodeId, LeaderSignal> signals;
  const LeaderSignal signal = parse_signal(args.signals);
  for (NodeId leader : decomp.leaders()) signals.emplace(leader, signal);

  EnvelopeRuns runs;
  try {
    runs = envelope_runs(spec, decomp, ctrl, x0, signals, config.simulation());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNonFiniteState) throw;
    std::cout << "envelope: FAIL  (" << e.what() << ")\n";
    return kEnvelopeFail;
  }
  const auto fit = fit_envelope(runs, config.envelope);

  std::ofstream csv(out_path(config, "trace.csv"));
  io::write_trace_csv(csv, runs.full, decomp);
  write_json(config, "envelope.json", io::to_json(fit));
  if (args.svg) {
    std::ofstream svg(out_path(config, "errors.svg"));
    report::write_error_svg(svg, runs.full);
  }
  double zmax = 0.0;
  for (std::size_t k = 0; k < runs.full.times.size(); ++k) {
    zmax = std::max(zmax, runs.full.error_norm(k));
  }
  std::cout << "steps: " << runs.full.times.size() - 1 << "  dt " << runs.full.step
            << "  max ||z|| " << zmax << "\n";
  std::cout << report::envelope_table(fit);
  return fit.pass ? kOk : kEnvelopeFail;
}

// ------------------------------------------------------------- pairwise

int run_pairwise(const std::string& path, const RunConfig& config) {
  const FormationSpec spec = load_validated(path);
  const auto decomp = decompose(spec);
  const auto cmp = cross_compare(spec, decomp, config.tolerances);
  std::cout << report::pairwise_table(cmp.pairs);
  std::cout << "formation: " << (cmp.formation.overall == Verdict::kStable ? "stable" : "unstable")
            << "\nclassification: " << to_string(cmp.kind) << "\n";
  io::Json j = io::to_json(cmp.pairs);
  j["formation"] = cmp.formation.overall == Verdict::kStable ? "stable" : "unstable";
  j["classification"] = to_string(cmp.kind);
  write_json(config, "pairwise.json", j);
  return cmp.pairs.all_stable() ? kOk : kUnstable;
}

// ----------------------------------------------------------------- demo

class Expectations {
 public:
  void expect(bool ok, const std::string& what) {
    std::cout << (ok ? "  ok        " : "  MISMATCH  ") << what << "\n";
    if (!ok) ++failures_;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

bool near(const Matrix& a, const Matrix& b, double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

int run_demo(const std::string& name, const RunConfig& config) {
  const FormationSpec spec = corpus::by_name(name);
  validate(spec);
  const auto decomp = decompose(spec);
  const auto cmp = cross_compare(spec, decomp, config.tolerances);
  const auto& r = cmp.formation;
  std::cout << "== " << name << "\n" << report::criterion_table(r) << "\n"
            << report::pairwise_table(cmp.pairs) << "classification: " << to_string(cmp.kind)
            << "\n\nexpected:\n";

  Expectations ex;
  const bool stable = r.overall == Verdict::kStable;
  auto pair_stable = [&](int i, int j) {
    const auto* p = cmp.pairs.find(NodeId(i), NodeId(j));
    return p && p->verdict == Verdict::kStable;
  };
  auto edge_defect = [&](int i, int j) -> const EdgeDisplacement* {
    for (const auto& e : r.condition3.edges) {
      if (e.edge.from.value == i && e.edge.to.value == j) return &e;
    }
    return nullptr;
  };

  if (name == "example1") {
    ex.expect(!stable, "formation unstable");
    ex.expect(pair_stable(2, 1) && pair_stable(3, 1) && pair_stable(3, 2),
              "all three two-agent subformations stable");
    const auto* e = edge_defect(3, 1);
    ex.expect(e && !e->pass && near(e->defect, -spec.edges[1].d, 1e-12),
              "condition d_31 = d_32 + d_21 violated, defect -d on edge (3,1)");
    ex.expect(cmp.kind == Discrepancy::kPairsStableFormationUnstable,
              "pairs stable, formation unstable");
  } else if (name == "example2") {
    ex.expect(stable, "formation stable");
    const auto* s2 = r.solvability(NodeId(2));
    const auto* s3 = r.solvability(NodeId(3));
    ex.expect(s2 && s3 && near(s2->gain.solution, Matrix::Ones(1, 2), 1e-8) &&
                  near(s3->gain.solution, Matrix::Ones(1, 2), 1e-8),
              "N_2 = N_3 = [1 1]");
    ex.expect(s2 && s3 && near(s2->offset.solution, Matrix::Constant(1, 1, -1.0), 1e-8) &&
                  near(s3->offset.solution, Matrix::Constant(1, 1, -4.0), 1e-8),
              "k~_2 = -1, k~_3 = -4");
    ex.expect(pair_stable(2, 1), "pair (2,1) stable");
    ex.expect(!pair_stable(3, 2), "pair (3,2) unstable");
    ex.expect(cmp.kind == Discrepancy::kFormationStablePairUnstable,
              "formation stable, pair unstable");
  } else if (name == "remark5") {
    ex.expect(!stable, "formation unstable");
    const auto* e = edge_defect(3, 1);
    ex.expect(e && !e->pass, "condition d_31 = d_32 violated");
    ex.expect(r.condition4.binding, "leader condition binding (two leaders)");
  } else if (name == "triangle") {
    ex.expect(stable, "formation stable");
    ex.expect(r.condition3.pass && !r.condition3.vacuous,
              "condition d_31 = d_32 + d_21 holds (triangle closes)");
  }

  if (stable) {
    const auto ctrl = synthesize(spec, decomp, r, {}, config.tolerances);
    const auto v = verify_controller(spec, decomp, ctrl, config.tolerances);
    std::cout << "\n" << report::verification_table(v);
    ex.expect(v.pass, "synthesized controller verifies");
    const auto runs = envelope_runs(spec, decomp, ctrl, random_states(spec, config.seed), {},
                                    config.simulation());
    const auto fit = fit_envelope(runs, config.envelope);
    std::cout << report::envelope_table(fit);
    ex.expect(fit.pass, "error envelope holds from random initial states");
  }
  if (ex.failures() > 0) {
    std::cerr << "demo " << name << ": " << ex.failures() << " expectation(s) not met\n";
    return kUsage;
  }
  std::cout << "demo " << name << ": all expectations met\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Internal stability of leader-follower linear formations"};
  app.require_subcommand(1);
  Common common;

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand("check", "decide internal stability of a formation");
  check_cmd->add_option("spec", check_args.spec, "formation spec (JSON)")->required();
  check_cmd->add_flag("--split", check_args.split, "analyze each weak component separately");
  add_common(check_cmd, common);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synthesize", "build a stabilizing formation controller");
  synth_cmd->add_option("spec", synth_args.spec, "formation spec (JSON)")->required();
  synth_cmd->add_option("--strategy", synth_args.strategy, "coupling split")
      ->check(CLI::IsMember({"parent-only", "uniform"}));
  synth_cmd->add_flag("--leader-free", synth_args.leader_free,
                      "S_i = N_i, K = 0 (formations with several leaders)");
  synth_cmd->add_option("--seeds", synth_args.seeds, "sample this many controllers of the family")
      ->check(CLI::NonNegativeNumber);
  add_common(synth_cmd, common);

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate the closed loop and fit the error envelope");
  sim_cmd->add_option("spec", sim_args.spec, "formation spec (JSON)")->required();
  auto* ctrl_opt = sim_cmd->add_option("--controller", sim_args.controller, "controller (JSON)");
  auto* auto_opt = sim_cmd->add_flag("--auto", sim_args.automatic, "synthesize the default controller");
  ctrl_opt->excludes(auto_opt);
  auto* ideal_opt = sim_cmd->add_flag("--ideal", sim_args.ideal, "start on the ideal formation");
  auto* random_opt = sim_cmd->add_flag("--random", sim_args.random, "random initial states (default)");
  auto* x0_opt = sim_cmd->add_option("--x0", sim_args.x0, "initial states: JSON array or file");
  ideal_opt->excludes(random_opt)->excludes(x0_opt);
  random_opt->excludes(x0_opt);
  sim_cmd->add_option("--signals", sim_args.signals,
                      "leader inputs: zero | const:c1,..,cm | sin:a1,..,am:omega[:phase]");
  sim_cmd->add_flag("--svg", sim_args.svg, "also write errors.svg");
  add_common(sim_cmd, common);

  std::string pair_spec;
  auto* pair_cmd = app.add_subcommand("pairwise", "analyze every two-agent subformation");
  pair_cmd->add_option("spec", pair_spec, "formation spec (JSON)")->required();
  add_common(pair_cmd, common);

  std::string demo_name;
  auto* demo_cmd = app.add_subcommand("demo", "run a bundled instance end to end");
  demo_cmd->add_option("name", demo_name, "example1 | example2 | remark5 | triangle")->required();
  add_common(demo_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim_cmd && !sim_args.automatic && sim_args.controller.empty()) {
      throw Error(ErrorCode::kInvalidInput, "simulate: pass --controller <file> or --auto");
    }
    const RunConfig config = common.resolve();
    if (*check_cmd) return run_check(check_args, config);
    if (*synth_cmd) return run_synthesize(synth_args, config);
    if (*sim_cmd) return run_simulate(sim_args, config);
    if (*pair_cmd) return run_pairwise(pair_spec, config);
    if (*demo_cmd) return run_demo(demo_name, config);
  } catch (const ValidationError& e) {
    std::cerr << "error [" << to_string(e.code()) << "]:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v.message << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
