#include "formation/corpus.hpp"

#include "formation/errors.hpp"

namespace formation::corpus {

namespace {

Matrix mat(int rows, int cols, std::initializer_list<double> values) {
  Matrix M(rows, cols);
  auto it = values.begin();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = *it++;
  }
  return M;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v(k++) = x;
  return v;
}

Edge edge(int from, int to, Vector d) { return {NodeId(from), NodeId(to), std::move(d)}; }

}  // namespace

FormationSpec example1() {
  const Matrix A = -Matrix::Identity(2, 2);
  const Vector d = vec({1, 0});
  const Matrix B = A * d;
  FormationSpec spec{2, 1, {{A, B}, {A, B}, {A, B}}, {}};
  spec.edges = {edge(2, 1, d), edge(3, 1, d), edge(3, 2, d)};
  return spec;
}

FormationSpec example2() {
  FormationSpec spec{2, 1, {}, {}};
  spec.agents = {
      {mat(2, 2, {1, 0, 0, 2}), mat(2, 1, {0, 0})},
      {mat(2, 2, {0, -1, -1, 1}), mat(2, 1, {1, 1})},
      {mat(2, 2, {0, -1, -2, 0}), mat(2, 1, {1, 2})},
  };
  spec.edges = {edge(2, 1, vec({2, 1})), edge(3, 2, vec({2, 3}))};
  return spec;
}

FormationSpec remark5() {
  const Matrix A = -Matrix::Identity(2, 2);
  FormationSpec spec{2, 1, {}, {}};
  spec.agents = {{A, mat(2, 1, {0, 0})}, {A, mat(2, 1, {0, 0})}, {A, mat(2, 1, {1, 0})}};
  spec.edges = {edge(3, 1, vec({0, 1})), edge(3, 2, vec({1, 0}))};
  return spec;
}

FormationSpec triangle() {
  const Matrix A = mat(2, 2, {0, 1, 0, 0});
  const Matrix B = mat(2, 1, {0, 1});
  FormationSpec spec{2, 1, {{A, B}, {A, B}, {A, B}}, {}};
  spec.edges = {edge(2, 1, vec({2, 0})), edge(3, 1, vec({1, 0})), edge(3, 2, vec({-1, 0}))};
  return spec;
}

const std::vector<std::string>& names() {
  static const std::vector<std::string> all{"example1", "example2", "remark5", "triangle"};
  return all;
}

FormationSpec by_name(const std::string& name) {
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  if (name == "remark5") return remark5();
  if (name == "triangle") return triangle();
  throw Error(ErrorCode::kInvalidInput, "unknown bundled instance '" + name + "'");
}

}  // namespace formation::corpus
