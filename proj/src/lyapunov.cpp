#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "formation/errors.hpp"
#include "formation/numerics.hpp"

namespace formation {

// A = U T U^H with T upper triangular turns A X + X A^T = Q into
// T Y + Y T^H = F (Y = U^H X U, F = U^H Q U). Column j of that equation
// only couples to columns k > j, so it is solved right to left with one
// triangular solve per column.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
  if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_lyapunov: A and Q must be square, same size");
  }
  const Eigen::Index n = A.rows();
  if (n == 0) return Matrix(0, 0);

  Eigen::ComplexSchur<Matrix> schur(A);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::kConvergenceFailure, "solve_lyapunov: Schur iteration did not converge");
  }
  const Eigen::MatrixXcd& U = schur.matrixU();
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd F = U.adjoint() * Q.cast<Complex>() * U;

  const double scale = T.cwiseAbs().maxCoeff() + 1.0;
  const double singular = 1e3 * std::numeric_limits<double>::epsilon() * scale;

  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = F.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
    Eigen::MatrixXcd M = T;
    M.diagonal().array() += std::conj(T(j, j));
    if (M.diagonal().cwiseAbs().minCoeff() <= singular) {
      throw Error(ErrorCode::kInvalidInput,
                  "solve_lyapunov: A and -A^T share an eigenvalue; solution is not unique");
    }
    Y.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (U * Y * U.adjoint()).real();
}

}  // namespace formation
