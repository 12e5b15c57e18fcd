#pragma once

#include <iosfwd>
#include <optional>

#include "covpost/linalg.hpp"

namespace covpost {

/// Responses Y (n×q) and an optional design X (n×p). Without X the rows of Y
/// are i.i.d. mean-zero observations.
struct Dataset {
  Matrix Y;
  std::optional<Matrix> X;

  Index n() const { return Y.rows(); }
  Index q() const { return Y.cols(); }
  Index p() const { return X ? X->cols() : 0; }

  /// Throws DimensionMismatch / ParameterOutOfRange on malformed data.
  void validate() const;
};

struct TrueParams {
  std::optional<Matrix> B0;
  PDMatrix Sigma0;
  double k_sigma = 1.0;
  double sigma0_subg = 1.0;
};

/// Everything the conditional posteriors need from a dataset.
///   X_lambda = XᵀX + λI_p,  B_tilde = X_lambda⁻¹XᵀY,
///   S_Y = Yᵀ(I − X X_lambda⁻¹ Xᵀ)Y,
///   W_n = Yᵀ(I − X(XᵀX)⁻¹Xᵀ)Y and B_ls = (XᵀX)⁻¹XᵀY when XᵀX is invertible.
/// With p = 0 the design terms are empty and S_Y = YᵀY.
struct SufficientStats {
  std::optional<PDMatrix> X_lambda;
  Matrix B_tilde;
  PDMatrix S_Y;
  std::optional<Matrix> XtX;
  std::optional<Matrix> W_n;
  std::optional<Matrix> B_ls;
  double lambda = 0.0;
  Index n = 0;
  Index p = 0;
  Index q = 0;
};

SufficientStats compute_stats(const Dataset& d, double lambda);

/// S_Y = W_n + B_lsᵀ(λ⁻¹I + (XᵀX)⁻¹)⁻¹B_ls, to 1e-8 relative.
/// Throws SingularDesign when there is no design or XᵀX is singular, and
/// PreconditionError when λ <= 0.
bool woodbury_check(const SufficientStats& s);

/// Matrix-normal log density of Y with mean XB, row covariance I_n and column
/// covariance Σ. B is ignored (may be empty) when the dataset has no design.
double loglik(const Dataset& d, const Matrix& B, const PDMatrix& sigma);

/// CSV with header y1..yq[,x1..xp], one row per observation.
Dataset read_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& out, const Dataset& d);

}  // namespace covpost
