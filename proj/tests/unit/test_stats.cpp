#include <doctest.h>

#include <cmath>
#include <vector>

#include "covpost/error.hpp"
#include "covpost/rng.hpp"
#include "covpost/stats.hpp"

using namespace covpost;

TEST_SUITE("stats") {
  TEST_CASE("basic moments") {
    const std::vector<double> x{1, 2, 3, 4};
    CHECK(mean(x) == 2.5);
    CHECK(sample_sd(x) == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(standard_error(x) == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(mean(std::vector<double>{}) == 0.0);
    CHECK(sample_sd(std::vector<double>{3.0}) == 0.0);
  }

  TEST_CASE("type 7 quantiles") {
    const std::vector<double> x{4, 1, 3, 2, 5};
    CHECK(quantile(x, 0.0) == 1.0);
    CHECK(quantile(x, 1.0) == 5.0);
    CHECK(quantile(x, 0.5) == 3.0);
    CHECK(quantile(x, 0.1) == doctest::Approx(1.4));
    CHECK_THROWS_AS(quantile({}, 0.5), EmptyChain);
  }

  TEST_CASE("effective sample size of white noise and an AR(1) chain") {
    RngStream rng(31, 1);
    std::vector<double> iid, ar;
    double prev = 0.0;
    for (int i = 0; i < 20000; ++i) {
      iid.push_back(rng.normal());
      prev = 0.9 * prev + rng.normal();
      ar.push_back(prev);
    }
    CHECK(effective_sample_size(iid) == doctest::Approx(20000).epsilon(0.15));
    // AR(1) with ρ = 0.9: n(1 − ρ)/(1 + ρ).
    CHECK(effective_sample_size(ar) == doctest::Approx(20000 * 0.1 / 1.9).epsilon(0.25));
    CHECK(batch_means_se(ar) > standard_error(ar));
  }

  TEST_CASE("Kolmogorov distribution at known points") {
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(0.01));
  }

  TEST_CASE("KS tests separate equal and shifted samples") {
    RngStream rng(32, 1);
    std::vector<double> a, b, c;
    for (int i = 0; i < 3000; ++i) {
      a.push_back(rng.normal());
      b.push_back(rng.normal());
      c.push_back(rng.normal() + 0.3);
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
    CHECK(ks_two_sample(a, c).p_value < 1e-6);
    CHECK(ks_one_sample({0.5}, [](double x) { return x; }).statistic == doctest::Approx(0.5));
    CHECK_THROWS_AS(ks_two_sample({}, b), EmptyChain);
  }

  TEST_CASE("least-squares slope") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    CHECK(ols_slope(x, y) == doctest::Approx(2.0));
    CHECK_THROWS_AS(ols_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), DimensionMismatch);
  }
}
