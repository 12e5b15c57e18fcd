#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "covpost/randmat.hpp"
#include "covpost/stats.hpp"

using namespace covpost;

namespace {

template <class F>
std::vector<double> draws(int count, F&& f) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(f());
  return out;
}

bool within_se(const std::vector<double>& x, double expected, double k = 5.0) {
  return std::abs(mean(x) - expected) <= k * standard_error(x);
}

}  // namespace

TEST_SUITE("randmat") {
  TEST_CASE("gamma draws follow the gamma law across shapes") {
    RngStream rng(11, 1);
    for (double shape : {0.3, 0.5, 1.0, 2.5, 40.0}) {
      const auto x = draws(40000, [&] { return gamma(shape, 2.0, rng); });
      CHECK(within_se(x, 2.0 * shape));
      boost::math::gamma_distribution<> ref(shape, 2.0);
      CHECK(ks_one_sample(x, [&](double v) { return boost::math::cdf(ref, v); }).p_value > 0.001);
    }
    CHECK_THROWS_AS(gamma(0.0, 1.0, rng), ParameterOutOfRange);
    CHECK_THROWS_AS(gamma(1.0, -1.0, rng), ParameterOutOfRange);
  }

  TEST_CASE("scalar samplers match their means") {
    RngStream rng(12, 1);
    CHECK(within_se(draws(40000, [&] { return inverse_gamma(4.0, 3.0, rng); }), 1.0));
    CHECK(within_se(draws(40000, [&] { return lognormal(0.2, 0.5, rng); }), std::exp(0.2 + 0.125)));
    CHECK(within_se(draws(40000, [&] { return uniform(2.0, 5.0, rng); }), 3.5));
    CHECK(within_se(draws(40000, [&] { return beta(2.0, 3.0, rng); }), 0.4));
    CHECK(within_se(draws(40000, [&] { return chi_square(7.0, rng); }), 7.0));
    CHECK(within_se(draws(40000, [&] { return rademacher(rng); }), 0.0));
    const auto b = draws(20000, [&] { return beta(0.7, 1.8, rng); });
    boost::math::beta_distribution<> ref(0.7, 1.8);
    CHECK(ks_one_sample(b, [&](double v) { return boost::math::cdf(ref, v); }).p_value > 0.001);
  }

  TEST_CASE("positive truncated normal in both regimes") {
    RngStream rng(13, 1);
    // mu/sigma = 0 uses inversion, mu/sigma = -6 the exponential rejection branch.
    for (auto [mu, sigma] : {std::pair{0.0, 10.0}, std::pair{2.0, 1.0}, std::pair{-6.0, 1.0}, std::pair{-30.0, 2.0}}) {
      const auto x = draws(40000, [&] { return truncated_normal_positive(mu, sigma, rng); });
      for (double v : x) REQUIRE(v > 0.0);
      boost::math::normal_distribution<> z;
      const double alpha = -mu / sigma;
      const double mass = boost::math::cdf(boost::math::complement(z, alpha));
      const double expected = mu + sigma * boost::math::pdf(z, alpha) / mass;
      CHECK(within_se(x, expected));
      const auto cdf = [&](double v) {
        return (boost::math::cdf(z, (v - mu) / sigma) - boost::math::cdf(z, alpha)) / mass;
      };
      if (alpha < 8.0) CHECK(ks_one_sample(x, cdf).p_value > 0.001);
    }
  }

  TEST_CASE("Bartlett factor and Wishart") {
    RngStream rng(14, 1);
    const Matrix a = bartlett_factor(5.5, 3, rng);
    CHECK(a.isLowerTriangular());
    for (Index i = 0; i < 3; ++i) CHECK(a(i, i) > 0.0);
    CHECK_THROWS_AS(bartlett_factor(1.5, 3, rng), DegreesOfFreedomTooSmall);
    CHECK_NOTHROW(bartlett_factor(2.01, 3, rng));

    Matrix psi(2, 2);
    psi << 2.0, 0.5, 0.5, 1.0;
    const PDMatrix scale(psi);
    Matrix acc = Matrix::Zero(2, 2);
    const int reps = 20000;
    std::vector<double> w00;
    for (int i = 0; i < reps; ++i) {
      const PDMatrix w = wishart(6.0, scale, rng);
      acc += w.matrix();
      w00.push_back(w(0, 0));
    }
    // Var W_00 = 2·df·ψ_00².
    CHECK(std::abs(acc(0, 0) / reps - 12.0) <= 5.0 * std::sqrt(2.0 * 6.0 * 4.0 / reps));
    CHECK(std::abs(acc(0, 1) / reps - 3.0) <= 5.0 * std::sqrt(6.0 * (0.25 + 2.0) / reps));
    CHECK(sample_sd(w00) == doctest::Approx(std::sqrt(48.0)).epsilon(0.05));
  }

  TEST_CASE("inverse-Wishart mean and the paired precision") {
    RngStream rng(15, 1);
    Matrix psi(2, 2);
    psi << 3.0, 1.0, 1.0, 2.0;
    const PDMatrix scale(psi);
    Matrix acc = Matrix::Zero(2, 2);
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) acc += inverse_wishart(10.0, scale, rng).matrix();
    const Matrix expected = psi / (10.0 - 2.0 - 1.0);
    CHECK((acc / reps - expected).norm() < 0.03);

    const auto draw = inverse_wishart_with_precision(10.0, cholesky(psi), rng);
    CHECK((draw.sigma * draw.precision - Matrix::Identity(2, 2)).norm() < 1e-10);
    CHECK(is_symmetric(draw.sigma));
  }

  TEST_CASE("matrix normal shape and error cases") {
    RngStream rng(16, 1);
    const Matrix m = Matrix::Constant(2, 3, 1.5);
    const Matrix x = matrix_normal(m, PDMatrix::identity(2), PDMatrix::identity(3), rng);
    CHECK(x.rows() == 2);
    CHECK(x.cols() == 3);
    CHECK_THROWS_AS(matrix_normal(m, PDMatrix::identity(3), PDMatrix::identity(3), rng), DimensionMismatch);
    CHECK_THROWS_AS(std_normal_matrix(0, 2, rng), DimensionMismatch);
  }

  TEST_CASE("mixing validation and sampling") {
    RngStream rng(17, 1);
    CHECK_THROWS_AS(validate(MixingDensity{GammaMixing{-1.0, 1.0}}), ParameterOutOfRange);
    CHECK_THROWS_AS(validate(MixingDensity{LogNormalMixing{0.0, 0.0}}), ParameterOutOfRange);
    CHECK_THROWS_AS(validate(MixingDensity{TruncatedNormalMixing{0.0, -2.0}}), ParameterOutOfRange);
    CHECK_THROWS_AS(validate(MixingDensity{UniformMixing{-1.0, 2.0}}), ParameterOutOfRange);
    CHECK_THROWS_AS(validate(MixingDensity{UniformMixing{3.0, 2.0}}), ParameterOutOfRange);
    CHECK_NOTHROW(validate(MixingDensity{UniformMixing{0.0, 100.0}}));
    const auto x = draws(20000, [&] { return sample_mixing(UniformMixing{0.0, 100.0}, rng); });
    CHECK(within_se(x, 50.0));
    CHECK_FALSE(describe(GammaMixing{0.5, 100.0}).empty());
  }

  TEST_CASE("slice sampler targets the given density") {
    RngStream rng(18, 1);
    const double shape = 3.0, rate = 2.0;
    const auto logf = [&](double x) { return x > 0.0 ? (shape - 1.0) * std::log(x) - rate * x : -INFINITY; };
    double cur = 1.0;
    std::vector<double> kept;
    for (int i = 0; i < 200000; ++i) {
      cur = slice_sample(logf, cur, 1.0, rng).value;
      if (i % 20 == 0) kept.push_back(cur);
    }
    boost::math::gamma_distribution<> ref(shape, 1.0 / rate);
    CHECK(ks_one_sample(kept, [&](double v) { return boost::math::cdf(ref, v); }).p_value > 0.001);
    CHECK_THROWS_AS(slice_sample(logf, -1.0, 1.0, rng), NonFiniteDensity);
    CHECK_THROWS_AS(slice_sample(logf, 1.0, 0.0, rng), ParameterOutOfRange);
  }

  TEST_CASE("slice sampler leaves a bounded density invariant") {
    RngStream rng(19, 1);
    const auto logf = [](double x) { return (x > 0.0 && x < 4.0) ? 0.0 : -INFINITY; };
    double cur = 2.0;
    std::vector<double> kept;
    for (int i = 0; i < 100000; ++i) {
      cur = slice_sample(logf, cur, 0.5, rng).value;
      REQUIRE(cur > 0.0);
      REQUIRE(cur < 4.0);
      if (i % 10 == 0) kept.push_back(cur);
    }
    CHECK(ks_one_sample(kept, [](double v) { return std::clamp(v / 4.0, 0.0, 1.0); }).p_value > 0.001);
  }
}
