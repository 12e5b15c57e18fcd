#include "covpost/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace covpost {

namespace {

constexpr double kPivotFloor = 1e-300;

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

Matrix symmetrize(const Matrix& m) {
  require_square(m, "symmetrize");
  return 0.5 * (m + m.transpose());
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Matrix cholesky(const Matrix& m) {
  require_square(m, "cholesky");
  if (!m.allFinite()) throw NotPositiveDefinite("cholesky: non-finite entries");
  const Matrix s = symmetrize(m);
  const Index n = s.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = s(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > kPivotFloor)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(j) + " is " +
                                std::to_string(pivot));
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    if (j + 1 < n) {
      l.col(j).tail(n - j - 1) =
          (s.col(j).tail(n - j - 1) - l.bottomLeftCorner(n - j - 1, j) * l.row(j).head(j).transpose()) / d;
    }
  }
  return l;
}

PDMatrix::PDMatrix(const Matrix& m) : entries_(symmetrize(m)), factor_(cholesky(entries_)) {}

PDMatrix PDMatrix::identity(Index dim) { return PDMatrix(Matrix::Identity(dim, dim)); }

PDMatrix PDMatrix::diagonal(const Vector& d) { return PDMatrix(Matrix(d.asDiagonal())); }

double PDMatrix::logdet() const { return 2.0 * factor_.diagonal().array().log().sum(); }

Matrix PDMatrix::solve(const Matrix& rhs) const {
  if (rhs.rows() != dim()) {
    throw DimensionMismatch("solve: rhs has " + std::to_string(rhs.rows()) + " rows, matrix is " +
                            std::to_string(dim()) + "x" + std::to_string(dim()));
  }
  Matrix y = factor_.triangularView<Eigen::Lower>().solve(rhs);
  return factor_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix PDMatrix::inverse() const {
  Matrix inv = solve(Matrix::Identity(dim(), dim()));
  return 0.5 * (inv + inv.transpose());
}

Vector eigvals_sym(const Matrix& m) {
  require_square(m, "eigvals_sym");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Vector eigvals_sym(const PDMatrix& m) { return eigvals_sym(m.matrix()); }

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == m.cols() && is_symmetric(m)) {
    const Vector ev = eigvals_sym(m);
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  const Matrix gram = m.rows() >= m.cols() ? Matrix(m.transpose() * m) : Matrix(m * m.transpose());
  const Vector ev = eigvals_sym(gram);
  return std::sqrt(std::max(ev(ev.size() - 1), 0.0));
}

double logdet_pd(const PDMatrix& m) { return m.logdet(); }

Matrix solve_pd(const PDMatrix& m, const Matrix& rhs) { return m.solve(rhs); }

Matrix sqrt_pd(const PDMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix());
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

bool schur_det_identity_check(const PDMatrix& s, double delta1, std::span<const double> rest) {
  const Index q = s.dim();
  if (q < 2 || static_cast<Index>(rest.size()) != q - 1) {
    throw DimensionMismatch("schur_det_identity_check: need dim >= 2 and dim-1 trailing deltas");
  }
  Vector delta(q);
  delta(0) = delta1;
  for (Index i = 1; i < q; ++i) delta(i) = rest[static_cast<std::size_t>(i - 1)];

  const Matrix full = s.matrix() + Matrix(delta.asDiagonal());
  const double lhs = full.partialPivLu().determinant();

  const double a = s(0, 0) + delta1;
  const Vector u = s.matrix().col(0).tail(q - 1);
  Matrix c = s.matrix().bottomRightCorner(q - 1, q - 1);
  c.diagonal() += delta.tail(q - 1);
  const Matrix schur = c - u * u.transpose() / a;
  const double rhs = a * schur.partialPivLu().determinant();

  return std::abs(lhs - rhs) <= 1e-8 * std::max(std::abs(lhs), std::abs(rhs));
}

}  // namespace covpost
