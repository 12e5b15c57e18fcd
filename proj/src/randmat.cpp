#include "covpost/randmat.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

namespace covpost {

namespace {

constexpr int kMaxStepOut = 50;
constexpr int kMaxShrink = 10000;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ParameterOutOfRange(msg);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// Upper standard normal tail probability and its inverse.
double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
double normal_upper_tail_inv(double p) { return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

// Marsaglia–Tsang for shape >= 1, boosted by U^(1/shape) below that.
double standard_gamma(double shape, RngStream& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform01();
    return standard_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

void validate(const MixingDensity& spec) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaMixing>) {
          require(finite_positive(m.shape) && finite_positive(m.scale), "Gamma mixing needs shape, scale > 0");
        } else if constexpr (std::is_same_v<T, LogNormalMixing>) {
          require(std::isfinite(m.mu) && finite_positive(m.sigma), "LogNormal mixing needs finite mu, sigma > 0");
        } else if constexpr (std::is_same_v<T, TruncatedNormalMixing>) {
          require(std::isfinite(m.mu) && finite_positive(m.sigma),
                  "TruncatedNormal mixing needs finite mu, sigma > 0");
        } else {
          require(std::isfinite(m.lo) && std::isfinite(m.hi) && m.lo >= 0.0 && m.hi > m.lo,
                  "Uniform mixing needs 0 <= lo < hi");
        }
      },
      spec);
}

std::string describe(const MixingDensity& spec) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaMixing>) {
          os << "Gamma(shape=" << m.shape << ", scale=" << m.scale << ")";
        } else if constexpr (std::is_same_v<T, LogNormalMixing>) {
          os << "LogNormal(mu=" << m.mu << ", sigma=" << m.sigma << ")";
        } else if constexpr (std::is_same_v<T, TruncatedNormalMixing>) {
          os << "TruncatedNormalPositive(mu=" << m.mu << ", sigma=" << m.sigma << ")";
        } else {
          os << "Uniform(lo=" << m.lo << ", hi=" << m.hi << ")";
        }
      },
      spec);
  return os.str();
}

Matrix std_normal_matrix(Index rows, Index cols, RngStream& rng) {
  if (rows < 1 || cols < 1) {
    throw DimensionMismatch("std_normal_matrix: dimensions must be positive");
  }
  Matrix z(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) z(i, j) = rng.normal();
  return z;
}

Matrix matrix_normal(const Matrix& mean, const PDMatrix& row_cov, const PDMatrix& col_cov, RngStream& rng) {
  if (row_cov.dim() != mean.rows() || col_cov.dim() != mean.cols()) {
    throw DimensionMismatch("matrix_normal: U must be rows x rows and V cols x cols of the mean");
  }
  const Matrix z = std_normal_matrix(mean.rows(), mean.cols(), rng);
  return mean + row_cov.cholesky_factor() * z * col_cov.cholesky_factor().transpose();
}

Matrix bartlett_factor(double df, Index dim, RngStream& rng) {
  if (!(df > static_cast<double>(dim) - 1.0) || !std::isfinite(df)) {
    throw DegreesOfFreedomTooSmall("Wishart degrees of freedom " + std::to_string(df) +
                                   " must exceed dim - 1 = " + std::to_string(dim - 1));
  }
  Matrix a = Matrix::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    a(i, i) = std::sqrt(chi_square(df - static_cast<double>(i), rng));
    for (Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  return a;
}

PDMatrix wishart(double df, const PDMatrix& scale, RngStream& rng) {
  const Matrix la = scale.cholesky_factor() * bartlett_factor(df, scale.dim(), rng);
  return PDMatrix(la * la.transpose());
}

InverseWishartDraw inverse_wishart_with_precision(double df, const Matrix& scale_factor, RngStream& rng) {
  const Index q = scale_factor.rows();
  const Matrix a = bartlett_factor(df, q, rng);
  // precision = L⁻ᵀ A Aᵀ L⁻¹ ~ W(df, scale⁻¹); sigma is its inverse L A⁻ᵀ A⁻¹ Lᵀ.
  const Matrix h = scale_factor.transpose().triangularView<Eigen::Upper>().solve(a);
  const Matrix a_inv = a.triangularView<Eigen::Lower>().solve(Matrix::Identity(q, q));
  const Matrix g = scale_factor * a_inv.transpose();
  InverseWishartDraw out{g * g.transpose(), h * h.transpose()};
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  out.precision = 0.5 * (out.precision + out.precision.transpose());
  return out;
}

PDMatrix inverse_wishart(double df, const PDMatrix& scale, RngStream& rng) {
  return PDMatrix(inverse_wishart_with_precision(df, scale.cholesky_factor(), rng).sigma);
}

double gamma(double shape, double scale, RngStream& rng) {
  require(finite_positive(shape) && finite_positive(scale), "gamma: shape and scale must be positive");
  return scale * standard_gamma(shape, rng);
}

double inverse_gamma(double shape, double scale, RngStream& rng) {
  require(finite_positive(shape) && finite_positive(scale), "inverse_gamma: shape and scale must be positive");
  return scale / standard_gamma(shape, rng);
}

double lognormal(double mu, double sigma, RngStream& rng) {
  require(std::isfinite(mu) && finite_positive(sigma), "lognormal: sigma must be positive");
  return std::exp(mu + sigma * rng.normal());
}

double truncated_normal_positive(double mu, double sigma, RngStream& rng) {
  require(std::isfinite(mu) && finite_positive(sigma), "truncated_normal_positive: sigma must be positive");
  const double alpha = -mu / sigma;  // standardized lower bound
  if (alpha <= 4.0) {
    const double tail = normal_upper_tail(alpha);
    for (;;) {
      const double z = normal_upper_tail_inv(rng.uniform01() * tail);
      const double x = mu + sigma * z;
      if (x > 0.0) return x;
    }
  }
  // Exponential proposal (Robert 1995) for the deep tail.
  const double rate = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
  for (;;) {
    const double z = alpha - std::log(rng.uniform01()) / rate;
    const double d = z - rate;
    if (std::log(rng.uniform01()) <= -0.5 * d * d) return mu + sigma * z;
  }
}

double uniform(double lo, double hi, RngStream& rng) {
  require(std::isfinite(lo) && std::isfinite(hi) && hi > lo, "uniform: need lo < hi");
  return lo + (hi - lo) * rng.uniform01();
}

double beta(double a, double b, RngStream& rng) {
  require(finite_positive(a) && finite_positive(b), "beta: parameters must be positive");
  const double x = standard_gamma(a, rng);
  const double y = standard_gamma(b, rng);
  return x / (x + y);
}

double chi_square(double df, RngStream& rng) {
  require(finite_positive(df), "chi_square: df must be positive");
  return 2.0 * standard_gamma(0.5 * df, rng);
}

double rademacher(RngStream& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

double sample_mixing(const MixingDensity& spec, RngStream& rng) {
  return std::visit(
      [&rng](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaMixing>) return gamma(m.shape, m.scale, rng);
        else if constexpr (std::is_same_v<T, LogNormalMixing>) return lognormal(m.mu, m.sigma, rng);
        else if constexpr (std::is_same_v<T, TruncatedNormalMixing>) return truncated_normal_positive(m.mu, m.sigma, rng);
        else return uniform(m.lo, m.hi, rng);
      },
      spec);
}

SliceStep slice_sample(const std::function<double(double)>& log_density, double current, double width,
                       RngStream& rng) {
  const auto logf = [&log_density](double x) {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    const double v = log_density(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };
  if (!(width > 0.0) || !std::isfinite(width)) throw ParameterOutOfRange("slice_sample: width must be positive");
  if (!(current > 0.0)) throw NonFiniteDensity("slice_sample: current point must be positive");
  const double f0 = log_density(current);
  if (!std::isfinite(f0)) throw NonFiniteDensity("slice_sample: log density not finite at current point");

  const double w = width;
  const double level = f0 + std::log(rng.uniform01());

  SliceStep step{current, 0, 0};
  double left = current - w * rng.uniform01();
  double right = left + w;
  int left_budget = static_cast<int>(kMaxStepOut * rng.uniform01());
  int right_budget = kMaxStepOut - 1 - left_budget;
  while (left_budget > 0 && left > 0.0 && logf(left) > level) {
    left -= w;
    --left_budget;
    ++step.expansions;
  }
  while (right_budget > 0 && logf(right) > level) {
    right += w;
    --right_budget;
    ++step.expansions;
  }
  if (left < 0.0) left = 0.0;

  for (int i = 0; i < kMaxShrink; ++i) {
    const double proposal = left + (right - left) * rng.uniform01();
    if (logf(proposal) > level) {
      step.value = proposal;
      return step;
    }
    ++step.shrinks;
    if (proposal < current) left = proposal;
    else right = proposal;
  }
  throw NonFiniteDensity("slice_sample: shrinkage did not terminate");
}

}  // namespace covpost
