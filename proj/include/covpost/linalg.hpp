#pragma once

#include <span>

#include <Eigen/Dense>

#include "covpost/error.hpp"

namespace covpost {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// (m + mᵀ)/2. Throws DimensionMismatch for non-square input.
Matrix symmetrize(const Matrix& m);

/// Lower Cholesky factor of a symmetric matrix. The input is symmetrized
/// first; a pivot at or below 1e-300 raises NotPositiveDefinite. No jitter is
/// ever added.
Matrix cholesky(const Matrix& m);

/// Symmetric positive-definite matrix with its Cholesky factor computed at
/// construction. Immutable, so values can be shared across threads.
class PDMatrix {
 public:
  explicit PDMatrix(const Matrix& m);

  static PDMatrix identity(Index dim);
  static PDMatrix diagonal(const Vector& d);

  Index dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  const Matrix& cholesky_factor() const { return factor_; }
  double operator()(Index i, Index j) const { return entries_(i, j); }

  double logdet() const;
  Matrix solve(const Matrix& rhs) const;
  Matrix inverse() const;

 private:
  Matrix entries_;
  Matrix factor_;
};

/// Largest singular value. Symmetric inputs use their own eigenvalues,
/// everything else the eigenvalues of mᵀm (or m mᵀ, whichever is smaller).
double spectral_norm(const Matrix& m);

/// All eigenvalues of a symmetric matrix in ascending order.
Vector eigvals_sym(const Matrix& m);
Vector eigvals_sym(const PDMatrix& m);

double logdet_pd(const PDMatrix& m);

/// Solves m·X = rhs. Throws DimensionMismatch when rhs has the wrong row count.
Matrix solve_pd(const PDMatrix& m, const Matrix& rhs);

/// Symmetric square root via eigendecomposition.
Matrix sqrt_pd(const PDMatrix& m);

/// Checks |S + Δ| = (s₁₁ + δ₁)·|C − uuᵀ/(s₁₁ + δ₁)| to 1e-8 relative, where
/// S = [[s₁₁, uᵀ], [u, C*]] and C = C* + diag(rest). The left side is taken
/// from an LU determinant of S + Δ, the right side from the partitioned form.
bool schur_det_identity_check(const PDMatrix& s, double delta1,
                              std::span<const double> rest);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

}  // namespace covpost
