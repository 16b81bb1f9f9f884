#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "formation/types.hpp"

namespace formation {

/// Tolerances shared by every numerical decision. The defaults turn the
/// exact equalities and rank facts of the stability criterion into
/// floating-point tests.
struct Tolerances {
  // Relative Frobenius residual ||BX - C|| / (1 + ||C||) below which a
  // linear matrix equation counts as solvable.
  double eps_solve = 1e-8;
  // A is Hurwitz when its spectral abscissa is below -eps_hurwitz.
  double eps_hurwitz = 1e-9;
  // Singular values below rank_factor * eps * sigma_max are treated as zero.
  // Zero selects max(rows, cols).
  double rank_factor = 0.0;
  // Floor for the rank cutoff of eigenvalue-shifted matrices in the PBH test.
  double pbh_floor = 1e-10;
};

using Complex = std::complex<double>;

/// Eigenvalues with multiplicity, read off the real Schur form. Complex pairs
/// appear adjacent, positive imaginary part first. Throws ConvergenceFailure.
std::vector<Complex> eigenvalues(const Matrix& A);

double spectral_abscissa(const std::vector<Complex>& eigs);

struct HurwitzReport {
  double spectral_abscissa = 0.0;
  std::vector<Complex> eigenvalues;
  bool is_hurwitz = false;
  double margin = 0.0;
};

HurwitzReport is_hurwitz(const Matrix& A, double margin = Tolerances{}.eps_hurwitz);

/// Cutoff below which singular values of an r x c matrix count as zero.
double rank_cutoff(double sigma_max, Eigen::Index rows, Eigen::Index cols,
                   const Tolerances& tol = {});

int numerical_rank(const Matrix& M, const Tolerances& tol = {});

/// Largest singular value.
double operator_norm(const Matrix& M);

struct LinearSolveReport {
  Matrix solution;
  double residual_norm = 0.0;      // ||B X - C||_F
  double relative_residual = 0.0;  // residual_norm / (1 + ||C||_F)
  bool solvable = false;
  int rank_B = 0;
};

/// Minimum-norm least-squares solution of B X = C through the SVD of B,
/// followed by one step of iterative refinement.
LinearSolveReport solve_matrix_equation(const Matrix& B, const Matrix& C,
                                        const Tolerances& tol = {});

/// Orthonormal basis (columns) of the right null space of B.
Matrix null_space_basis(const Matrix& B, const Tolerances& tol = {});

/// [B, AB, ..., A^{n-1}B].
Matrix controllability_matrix(const Matrix& A, const Matrix& B);

struct StabilizabilityReport {
  bool stabilizable = false;
  // Eigenvalue with Re >= -eps_hurwitz at which rank[A - lambda I, B] < n.
  std::optional<Complex> witness;
};

/// Popov-Belevitch-Hautus test on the eigenvalues that are not strictly stable.
StabilizabilityReport is_stabilizable(const Matrix& A, const Matrix& B,
                                      const Tolerances& tol = {});

/// Orthogonal change of basis [controllable | uncontrollable]: in the columns
/// of `basis`, A is block upper triangular and B vanishes below the first
/// `controllable_dim` rows.
struct ControllableDecomposition {
  Matrix basis;
  int controllable_dim = 0;
};

ControllableDecomposition controllable_staircase(const Matrix& A, const Matrix& B,
                                                 const Tolerances& tol = {});

/// Solves A X + X A^T = Q by Bartels-Stewart on the complex Schur form.
/// Throws InvalidInput when lambda_i(A) + conj(lambda_j(A)) vanishes.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Bass gain for a controllable pair: S = -B^T P^+ where
/// (A + beta I) P + P (A + beta I)^T = 2 B B^T and beta = ||A||_F + 1.
/// A + B S then has every eigenvalue with real part <= -beta.
Matrix bass_gain(const Matrix& A, const Matrix& B);

/// A gain S (m x n) with A + B S Hurwitz. Bass's method is applied to the
/// controllable block of the staircase form. Throws NotStabilizable (PBH
/// witness in the message) or SynthesisFailure.
Matrix stabilize(const Matrix& A, const Matrix& B, const Tolerances& tol = {});

/// e^A by scaling and squaring with a diagonal Pade approximant of the
/// given degree.
Matrix expm(const Matrix& A, int pade_degree = 8);

struct ExpEnvelope {
  double C = 1.0;
  double alpha = 0.0;
  // max over the certificate grid of ||e^{tA}|| / (C e^{-alpha t}).
  double sampled_ratio = 0.0;
};

/// Certified bound ||e^{tA}|| <= C e^{-alpha t}, C = sqrt(cond P) for
/// (A + alpha I)^T P + P (A + alpha I) = -I. Throws RateTooAggressive when
/// alpha >= -spectral_abscissa(A).
ExpEnvelope exp_envelope(const Matrix& A, double alpha, int grid_points = 200);

}  // namespace formation
