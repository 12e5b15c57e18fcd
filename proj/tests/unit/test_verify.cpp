#include <doctest.h>

#include "covpost/verify.hpp"

using namespace covpost;

TEST_SUITE("verify") {
  TEST_CASE("Gaussian singular values") {
    RngStream rng(51, 1);
    const auto r = check_gaussian_singular_values(2000, 40, 30, rng);
    CHECK(r.trials == 30);
    CHECK(r.pass_fraction >= 0.95);
    CHECK(r.nominal_bound == doctest::Approx(1.0 - 2.0 * std::exp(-20.0)));
    const auto one = check_gaussian_singular_values(500, 1, 10, rng);
    CHECK(one.pass_fraction >= 0.9);
    CHECK_THROWS_AS(check_gaussian_singular_values(10, 10, 5, rng), ParameterOutOfRange);
    const auto tight = check_gaussian_singular_values(2000, 40, 10, rng, 0.01);
    CHECK(tight.pass_fraction == 0.0);
    CHECK_FALSE(tight.passed());
  }

  TEST_CASE("pass fraction grows with n at fixed q") {
    RngStream a(52, 1), b(52, 2);
    const auto small = check_gaussian_singular_values(400, 40, 40, a);
    const auto large = check_gaussian_singular_values(3000, 40, 40, b);
    CHECK(large.pass_fraction >= small.pass_fraction);
  }

  TEST_CASE("sub-Gaussian singular values, plain and projected") {
    RngStream rng(53, 1);
    CHECK(check_subgaussian_singular_values(2000, 10, 40, 20, rng).pass_fraction >= 0.95);
    CHECK(check_subgaussian_singular_values(2000, 10, 40, 20, rng, 4.0, SubGaussianRows::Gaussian).pass_fraction >=
          0.95);
    CHECK(check_subgaussian_singular_values(2000, 10, 40, 20, rng, 4.0, SubGaussianRows::Rademacher, true)
              .pass_fraction >= 0.95);
    CHECK_THROWS_AS(check_subgaussian_singular_values(50, 10, 40, 5, rng), ParameterOutOfRange);
  }

  TEST_CASE("chi-square extremes") {
    RngStream rng(54, 1);
    CHECK(check_chisq_extremes(5000, 0.5, 10, rng).pass_fraction >= 0.9);
    const auto small = check_chisq_extremes(50, 0.5, 10, rng);
    CHECK(small.trials == 10);
    CHECK_FALSE(small.asserted);
    CHECK_THROWS_AS(check_chisq_extremes(100, 0.0, 5, rng), ParameterOutOfRange);
    CHECK_THROWS_AS(check_chisq_extremes(100, 1.5, 5, rng), ParameterOutOfRange);
  }

  TEST_CASE("Bai-Yin limit") {
    RngStream rng(55, 1);
    const auto r = check_bai_yin(2000, 0.25, 3, rng);
    CHECK(r.detail("limit") == doctest::Approx(1.25));
    CHECK(r.detail("mean_deviation") <= 0.1);
    CHECK_THROWS_AS(check_bai_yin(100, 1.0, 3, rng), ParameterOutOfRange);
    CHECK(std::isnan(r.detail("no_such_key")));
  }

  TEST_CASE("posterior mean formula") {
    RngStream rng(56, 1);
    PresetOverrides o;
    o.nu = 1.0;
    CHECK(check_posterior_mean_formula(200, 3, preset(PresetName::IgDsiw, 3, o), rng, 4000, 500).passed());
    CHECK(check_posterior_mean_formula(200, 3, preset(PresetName::MatrixF, 3), rng, 4000, 500).passed());
    CHECK_THROWS_AS(check_posterior_mean_formula(200, 3, preset(PresetName::IgDsiw, 3), rng), PreconditionError);
  }

  TEST_CASE("identities are exact and reruns are identical") {
    RngStream a(57, 1), b(57, 1);
    const auto r = check_identities(a, 100);
    CHECK(r.pass_fraction == 1.0);
    CHECK(check_identities(b, 100).details == r.details);
    RngStream c(58, 1);
    CHECK(check_identities(c, 50, 2).pass_fraction == 1.0);
  }

  TEST_CASE("least-squares rate is reported only") {
    RngStream rng(59, 1);
    const auto r = check_least_squares_rate({100, 400}, 2, 3, 3, rng);
    CHECK_FALSE(r.asserted);
    CHECK(r.passed());
    CHECK(r.detail("ls_scaled_error_n100") > 0.0);
  }
}
