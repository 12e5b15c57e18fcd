#pragma once

#include <functional>
#include <string>
#include <variant>

#include "covpost/linalg.hpp"
#include "covpost/rng.hpp"

namespace covpost {

// Mixing densities for the diagonal scales of a DSIW prior. All have support
// in the positive reals.
struct GammaMixing {
  double shape;
  double scale;
};
struct LogNormalMixing {
  double mu;
  double sigma;
};
struct TruncatedNormalMixing {  // N(mu, sigma²) restricted to (0, ∞)
  double mu;
  double sigma;
};
struct UniformMixing {
  double lo;
  double hi;
};

using MixingDensity = std::variant<GammaMixing, LogNormalMixing, TruncatedNormalMixing, UniformMixing>;

/// Throws ParameterOutOfRange when parameters leave their valid ranges.
void validate(const MixingDensity& spec);
std::string describe(const MixingDensity& spec);

Matrix std_normal_matrix(Index rows, Index cols, RngStream& rng);

/// M + L_U·Z·L_Vᵀ; vec of the draw has covariance V ⊗ U.
Matrix matrix_normal(const Matrix& mean, const PDMatrix& row_cov, const PDMatrix& col_cov, RngStream& rng);

/// Lower-triangular Bartlett factor A with W(df, I) = A·Aᵀ. df may be real.
Matrix bartlett_factor(double df, Index dim, RngStream& rng);

PDMatrix wishart(double df, const PDMatrix& scale, RngStream& rng);

/// Inverse-Wishart with E[X] = scale/(df − q − 1). Sampled as the inverse of
/// W(df, scale⁻¹).
PDMatrix inverse_wishart(double df, const PDMatrix& scale, RngStream& rng);

/// Inverse-Wishart draw returned together with its inverse, both as plain
/// symmetric matrices. `scale_factor` is the lower Cholesky factor of the
/// scale. Used inside samplers that need Σ⁻¹ every sweep.
struct InverseWishartDraw {
  Matrix sigma;
  Matrix precision;
};
InverseWishartDraw inverse_wishart_with_precision(double df, const Matrix& scale_factor, RngStream& rng);

// Scalar samplers. Each throws ParameterOutOfRange on invalid parameters.
double gamma(double shape, double scale, RngStream& rng);
double inverse_gamma(double shape, double scale, RngStream& rng);
double lognormal(double mu, double sigma, RngStream& rng);
double truncated_normal_positive(double mu, double sigma, RngStream& rng);
double uniform(double lo, double hi, RngStream& rng);
double beta(double a, double b, RngStream& rng);
double chi_square(double df, RngStream& rng);
double rademacher(RngStream& rng);

double sample_mixing(const MixingDensity& spec, RngStream& rng);

struct SliceStep {
  double value;
  int expansions;
  int shrinks;
};

/// One stepping-out/shrinkage slice-sampling transition for a target on
/// (0, ∞). `log_density` may return -inf outside the support. Stepping out is
/// capped at 50 width units split randomly between the two sides, which keeps
/// the transition reversible. `width` must not depend on `current`.
SliceStep slice_sample(const std::function<double(double)>& log_density, double current,
                       double width, RngStream& rng);

}  // namespace covpost
