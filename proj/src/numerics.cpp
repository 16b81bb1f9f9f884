#include "formation/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "formation/errors.hpp"

namespace formation {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string format_complex(Complex z) {
  std::ostringstream os;
  os.precision(6);
  os << z.real();
  if (z.imag() != 0.0) os << (z.imag() > 0 ? "+" : "-") << std::abs(z.imag()) << "i";
  return os.str();
}

// Orthonormal basis of the column space of W, discarding directions whose
// singular value is at most `cutoff`.
Matrix orthonormal_range(const Matrix& W, double cutoff) {
  if (W.cols() == 0 || W.rows() == 0) return Matrix(W.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cutoff) ++r;
  return svd.matrixU().leftCols(r);
}

Matrix pseudo_inverse(const Matrix& M, const Tolerances& tol) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double sigma_max = sv.size() ? sv(0) : 0.0;
  const double cutoff = rank_cutoff(sigma_max, M.rows(), M.cols(), tol);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

std::vector<Complex> eigenvalues(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "eigenvalues: matrix is not square");
  }
  const Eigen::Index n = A.rows();
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 0) return out;

  Eigen::RealSchur<Matrix> schur(n);
  schur.setMaxIterations(80 * n);
  schur.compute(A, /*computeU=*/false);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::kConvergenceFailure,
                "eigenvalues: real Schur iteration did not converge");
  }
  const Matrix& T = schur.matrixT();
  for (Eigen::Index i = 0; i < n;) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      const double a = T(i, i), b = T(i, i + 1), c = T(i + 1, i), d = T(i + 1, i + 1);
      const double mid = 0.5 * (a + d);
      const double half = 0.5 * (a - d);
      const double disc = half * half + b * c;
      if (disc < 0.0) {
        const double im = std::sqrt(-disc);
        out.emplace_back(mid, im);
        out.emplace_back(mid, -im);
      } else {
        const double re = std::sqrt(disc);
        out.emplace_back(mid + re, 0.0);
        out.emplace_back(mid - re, 0.0);
      }
      i += 2;
    } else {
      out.emplace_back(T(i, i), 0.0);
      i += 1;
    }
  }
  return out;
}

double spectral_abscissa(const std::vector<Complex>& eigs) {
  double a = -std::numeric_limits<double>::infinity();
  for (const auto& z : eigs) a = std::max(a, z.real());
  return a;
}

HurwitzReport is_hurwitz(const Matrix& A, double margin) {
  HurwitzReport r;
  r.eigenvalues = eigenvalues(A);
  r.spectral_abscissa = spectral_abscissa(r.eigenvalues);
  r.margin = margin;
  r.is_hurwitz = r.spectral_abscissa < -margin;
  return r;
}

double rank_cutoff(double sigma_max, Eigen::Index rows, Eigen::Index cols, const Tolerances& tol) {
  const double factor =
      tol.rank_factor > 0.0 ? tol.rank_factor : static_cast<double>(std::max(rows, cols));
  return factor * kEps * sigma_max;
}

int numerical_rank(const Matrix& M, const Tolerances& tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  const double cutoff = rank_cutoff(sv(0), M.rows(), M.cols(), tol);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > cutoff ? 1 : 0;
  return r;
}

double operator_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

LinearSolveReport solve_matrix_equation(const Matrix& B, const Matrix& C, const Tolerances& tol) {
  if (B.rows() != C.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "solve_matrix_equation: B has " + std::to_string(B.rows()) + " rows, C has " +
                    std::to_string(C.rows()));
  }
  LinearSolveReport r;
  const Matrix pinv = pseudo_inverse(B, tol);
  Matrix X = pinv * C;
  X += pinv * (C - B * X);
  r.residual_norm = (B * X - C).norm();
  r.relative_residual = r.residual_norm / (1.0 + C.norm());
  r.solvable = r.relative_residual <= tol.eps_solve;
  r.rank_B = numerical_rank(B, tol);
  r.solution = std::move(X);
  return r;
}

Matrix null_space_basis(const Matrix& B, const Tolerances& tol) {
  const Eigen::Index cols = B.cols();
  if (B.rows() == 0) return Matrix::Identity(cols, cols);
  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = rank_cutoff(sv.size() ? sv(0) : 0.0, B.rows(), B.cols(), tol);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cutoff) ++r;
  return svd.matrixV().rightCols(cols - r);
}

Matrix controllability_matrix(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows(), m = B.cols();
  Matrix K(n, n * m);
  Matrix block = B;
  for (Eigen::Index k = 0; k < n; ++k) {
    K.middleCols(k * m, m) = block;
    block = A * block;
  }
  return K;
}

StabilizabilityReport is_stabilizable(const Matrix& A, const Matrix& B, const Tolerances& tol) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "is_stabilizable: inconsistent A/B shapes");
  }
  const Eigen::Index n = A.rows(), m = B.cols();
  StabilizabilityReport r{true, std::nullopt};
  for (const Complex& lambda : eigenvalues(A)) {
    if (lambda.real() < -tol.eps_hurwitz || lambda.imag() < 0.0) continue;
    Eigen::MatrixXcd pencil(n, n + m);
    pencil.leftCols(n) = A.cast<Complex>();
    pencil.leftCols(n).diagonal().array() -= lambda;
    pencil.rightCols(m) = B.cast<Complex>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    const auto& sv = svd.singularValues();
    const double sigma_max = sv.size() ? sv(0) : 0.0;
    const double cutoff =
        std::max(rank_cutoff(sigma_max, n, n + m, tol), tol.pbh_floor * sigma_max);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff ? 1 : 0;
    if (rank < n) {
      r.stabilizable = false;
      r.witness = lambda;
      break;
    }
  }
  return r;
}

ControllableDecomposition controllable_staircase(const Matrix& A, const Matrix& B,
                                                 const Tolerances& tol) {
  const Eigen::Index n = A.rows();
  const double scale = std::max({operator_norm(A), operator_norm(B), 1.0});
  const double cutoff = std::max(tol.pbh_floor, 4.0 * n * kEps) * scale;

  // Block Krylov sequence with full reorthogonalisation; each block is the
  // new part of A * (previous block).
  Matrix basis = orthonormal_range(B, cutoff);
  Matrix block = basis;
  while (block.cols() > 0 && basis.cols() < n) {
    Matrix W = A * block;
    for (int pass = 0; pass < 2; ++pass) W -= basis * (basis.transpose() * W);
    block = orthonormal_range(W, cutoff);
    if (block.cols() == 0) break;
    Matrix grown(n, basis.cols() + block.cols());
    grown << basis, block;
    basis = std::move(grown);
  }
  const Eigen::Index k = std::min<Eigen::Index>(basis.cols(), n);

  ControllableDecomposition out;
  out.controllable_dim = static_cast<int>(k);
  if (k == n) {
    out.basis = basis.leftCols(n);
  } else {
    Eigen::HouseholderQR<Matrix> qr(basis.leftCols(k));
    Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    out.basis.resize(n, n);
    out.basis << basis.leftCols(k), Q.rightCols(n - k);
  }
  return out;
}

Matrix bass_gain(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  const double beta = A.norm() + 1.0;
  const Matrix shifted = A + beta * Matrix::Identity(n, n);
  Matrix P = solve_lyapunov(shifted, 2.0 * B * B.transpose());
  P = 0.5 * (P + P.transpose());
  return -B.transpose() * pseudo_inverse(P, Tolerances{});
}

Matrix stabilize(const Matrix& A, const Matrix& B, const Tolerances& tol) {
  const Eigen::Index n = A.rows(), m = B.cols();
  const auto pbh = is_stabilizable(A, B, tol);
  if (!pbh.stabilizable) {
    throw Error(ErrorCode::kNotStabilizable,
                "stabilize: pair is not stabilizable; uncontrollable eigenvalue " +
                    format_complex(*pbh.witness));
  }

  const auto stair = controllable_staircase(A, B, tol);
  const Eigen::Index k = stair.controllable_dim;
  const Matrix& T = stair.basis;
  const Matrix At = T.transpose() * A * T;
  const Matrix Bt = T.transpose() * B;

  if (k < n) {
    const auto uncontrollable = is_hurwitz(At.bottomRightCorner(n - k, n - k), tol.eps_hurwitz);
    if (!uncontrollable.is_hurwitz) {
      throw Error(ErrorCode::kSynthesisFailure,
                  "stabilize: uncontrollable block has spectral abscissa " +
                      std::to_string(uncontrollable.spectral_abscissa) +
                      " although the PBH test passed");
    }
  }

  Matrix S = Matrix::Zero(m, n);
  if (k > 0) {
    const Matrix Sc = bass_gain(At.topLeftCorner(k, k), Bt.topRows(k));
    S = Sc * T.leftCols(k).transpose();
  }
  const auto closed = is_hurwitz(A + B * S, tol.eps_hurwitz);
  if (!closed.is_hurwitz) {
    throw Error(ErrorCode::kSynthesisFailure,
                "stabilize: closed loop has spectral abscissa " +
                    std::to_string(closed.spectral_abscissa));
  }
  return S;
}

ExpEnvelope exp_envelope(const Matrix& A, double alpha, int grid_points) {
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "exp_envelope: decay rate must be positive");
  }
  const double abscissa = spectral_abscissa(eigenvalues(A));
  if (alpha >= -abscissa) {
    throw Error(ErrorCode::kRateTooAggressive,
                "exp_envelope: requested rate " + std::to_string(alpha) +
                    " is not below -spectral_abscissa = " + std::to_string(-abscissa));
  }
  const Eigen::Index n = A.rows();
  const Matrix shifted = A + alpha * Matrix::Identity(n, n);
  Matrix P = solve_lyapunov(shifted.transpose(), -Matrix::Identity(n, n));
  P = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) {
    throw Error(ErrorCode::kConvergenceFailure,
                "exp_envelope: Lyapunov solution is not positive definite");
  }

  ExpEnvelope env;
  env.alpha = alpha;
  env.C = std::max(1.0, std::sqrt(hi / lo));

  const int points = std::max(grid_points, 2);
  const double horizon = 20.0 / alpha;
  const double h = horizon / (points - 1);
  const Matrix step = expm(h * A);
  Matrix power = Matrix::Identity(n, n);
  for (int k = 0; k < points; ++k) {
    const double t = k * h;
    env.sampled_ratio =
        std::max(env.sampled_ratio, operator_norm(power) / (env.C * std::exp(-alpha * t)));
    power = step * power;
  }
  if (env.sampled_ratio > 1.0 + 1e-6) {
    throw Error(ErrorCode::kConvergenceFailure,
                "exp_envelope: sampled certificate violated (ratio " +
                    std::to_string(env.sampled_ratio) + ")");
  }
  return env;
}

}  // namespace formation
