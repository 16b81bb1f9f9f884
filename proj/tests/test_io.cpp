#include <doctest.h>

#include <sstream>

#include "formation/corpus.hpp"
#include "formation/errors.hpp"
#include "formation/io.hpp"
#include "formation/synthesis.hpp"

using namespace formation;

namespace {

bool same_spec(const FormationSpec& a, const FormationSpec& b) {
  if (a.n != b.n || a.m != b.m || a.agents.size() != b.agents.size() || a.edges.size() != b.edges.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    if (a.agents[i].A != b.agents[i].A || a.agents[i].B != b.agents[i].B) return false;
  }
  for (std::size_t k = 0; k < a.edges.size(); ++k) {
    if (a.edges[k].from != b.edges[k].from || a.edges[k].to != b.edges[k].to ||
        a.edges[k].d != b.edges[k].d) {
      return false;
    }
  }
  return true;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidInput;
}

}  // namespace

TEST_CASE("bundled data files equal the built-in instances") {
  for (const auto& name : corpus::names()) {
    CAPTURE(name);
    const auto loaded = io::load_spec(std::string(FORMATION_DATA_DIR) + "/" + name + ".json");
    CHECK(same_spec(loaded, corpus::by_name(name)));
  }
  CHECK_THROWS_AS(corpus::by_name("nope"), Error);
}

TEST_CASE("spec JSON round trip") {
  const auto spec = corpus::example2();
  const auto text = io::to_json(spec).dump();
  CHECK(same_spec(io::spec_from_json(io::Json::parse(text)), spec));
}

TEST_CASE("spec parse errors") {
  auto parse = [](const char* text) { return io::spec_from_json(io::Json::parse(text)); };
  CHECK(code_of([&] { parse(R"({"n": 1, "m": 1, "agents": []})"); }) == ErrorCode::kParseError);
  CHECK(code_of([&] { parse(R"({"n": 1, "m": 1, "agents": [{"A": [[1], [1, 2]], "B": [[1]]}], "edges": []})"); }) ==
        ErrorCode::kParseError);
  CHECK(code_of([&] { parse(R"({"n": "x", "m": 1, "agents": [], "edges": []})"); }) ==
        ErrorCode::kParseError);
  CHECK(code_of([&] { io::read_json_file("/nonexistent/spec.json"); }) == ErrorCode::kParseError);
  // Shape problems are the model's business.
  const auto spec = parse(R"({"n": 2, "m": 1, "agents": [{"A": [[1]], "B": [[1]]}], "edges": []})");
  CHECK_THROWS_AS(validate(spec), ValidationError);
}

TEST_CASE("controller JSON round trip is lossless") {
  const auto spec = corpus::triangle();
  const auto dec = decompose(spec);
  const auto ctrl = synthesize(spec, dec, check(spec, dec), {SplitStrategy::uniform()});
  const auto text = io::to_json(ctrl).dump();
  const auto back = io::controller_from_json(io::Json::parse(text), dec);
  CHECK(io::to_json(back).dump() == text);
  for (std::size_t i = 0; i < ctrl.followers.size(); ++i) {
    CHECK(back.followers[i].S == ctrl.followers[i].S);
    CHECK(back.followers[i].N == ctrl.followers[i].N);
    CHECK(back.followers[i].k == ctrl.followers[i].k);
  }

  SUBCASE("N and k_tilde are derived when absent") {
    auto j = io::Json::parse(text);
    for (auto& f : j["followers"]) {
      f.erase("N");
      f.erase("k_tilde");
    }
    const auto derived = io::controller_from_json(j, dec);
    for (std::size_t i = 0; i < ctrl.followers.size(); ++i) {
      CHECK((derived.followers[i].N - ctrl.followers[i].N).norm() <= 1e-12 * (1 + ctrl.followers[i].N.norm()));
    }
  }
  SUBCASE("inconsistent stored N is rejected") {
    auto j = io::Json::parse(text);
    j["followers"][0]["N"][0][0] = j["followers"][0]["N"][0][0].get<double>() + 1.0;
    CHECK(code_of([&] { io::controller_from_json(j, dec); }) == ErrorCode::kInvalidInput);
  }
}

TEST_CASE("config parsing and validation") {
  const auto c = io::config_from_json(io::Json::parse(
      R"({"tolerances": {"eps_solve": 1e-9}, "dt": 0.001, "T": 5, "seed": 3, "out": "o"})"));
  CHECK(c.tolerances.eps_solve == 1e-9);
  CHECK(c.dt == 0.001);
  CHECK(c.horizon == 5.0);
  CHECK(c.seed == 3);
  CHECK(c.out_dir == "o");
  const auto back = io::config_from_json(io::to_json(c));
  CHECK(io::to_json(back).dump() == io::to_json(c).dump());
  CHECK(code_of([] { io::config_from_json(io::Json::parse(R"({"T": 1, "dt": 2})")); }) ==
        ErrorCode::kInvalidInput);
  CHECK(code_of([] { io::config_from_json(io::Json::parse(R"({"tolerances": {"eps_solve": 0}})")); }) ==
        ErrorCode::kInvalidInput);
  CHECK(code_of([] { io::config_from_json(io::Json::parse(R"({"bogus": 1})")); }) ==
        ErrorCode::kParseError);
}

TEST_CASE("trace CSV layout follows the renumbering") {
  // 1 follows 2: renumbered order is 2, 1.
  FormationSpec spec;
  spec.n = 2;
  spec.m = 1;
  const Matrix A = -Matrix::Identity(2, 2);
  spec.agents = {{A, Matrix::Ones(2, 1)}, {A, Matrix::Zero(2, 1)}};
  spec.edges = {{NodeId(1), NodeId(2), Vector::Zero(2)}};
  const auto dec = decompose(spec);
  const auto ctrl = synthesize(spec, dec, check(spec, dec));
  const auto t = simulate(spec, dec, ctrl, {Vector::Ones(2), Vector::Zero(2)}, {}, {0.05, 0.01});
  std::ostringstream os;
  io::write_trace_csv(os, t, dec);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "time,x_2[1],x_2[2],x_1[1],x_1[2],z_1_2[1],z_1_2[2]");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == static_cast<int>(t.times.size()));
}

TEST_CASE("report JSON carries every condition") {
  const auto spec = corpus::example1();
  const auto j = io::to_json(check(spec, decompose(spec)));
  CHECK(j["overall"] == "unstable");
  CHECK(j["condition3"]["pass"] == false);
  CHECK(j["condition3"]["edges"].size() == 3);
  CHECK(j["condition2"]["followers"].size() == 2);
  CHECK(j["applicable_corollary"] == "none");
}
