#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "formation/errors.hpp"
#include "formation/numerics.hpp"

namespace formation {

Matrix expm(const Matrix& A, int pade_degree) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "expm: matrix is not square");
  }
  if (pade_degree < 1 || pade_degree > 20) {
    throw Error(ErrorCode::kInvalidInput, "expm: Pade degree must lie in [1, 20]");
  }
  const Eigen::Index n = A.rows();
  if (n == 0) return Matrix(0, 0);

  // Scale so that ||A / 2^s||_inf <= 1/2.
  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix X = A / std::ldexp(1.0, s);

  // c_k = (2q - k)! q! / ((2q)! k! (q - k)!)
  const int q = pade_degree;
  Matrix numer = Matrix::Identity(n, n);
  Matrix denom = Matrix::Identity(n, n);
  Matrix power = Matrix::Identity(n, n);
  double c = 1.0;
  for (int k = 1; k <= q; ++k) {
    c *= static_cast<double>(q - k + 1) / (static_cast<double>(k) * (2 * q - k + 1));
    power = power * X;
    numer += c * power;
    denom += (k % 2 ? -c : c) * power;
  }
  Matrix R = denom.partialPivLu().solve(numer);
  for (int i = 0; i < s; ++i) R = R * R;
  return R;
}

}  // namespace formation
