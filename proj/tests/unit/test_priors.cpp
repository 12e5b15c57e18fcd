#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "covpost/priors.hpp"
#include "oracles.hpp"

using namespace covpost;

namespace {

double total_mass(const MixingDensity& m) {
  const auto f = [&](double x) { return std::exp(log_mixing_density(m, x)); };
  if (const auto* u = std::get_if<UniformMixing>(&m)) {
    return boost::math::quadrature::tanh_sinh<double>().integrate(f, u->lo, u->hi);
  }
  return oracle::integrate_density([&](double x) { return log_mixing_density(m, x); }, 1e-24, 1e10, 400000);
}

}  // namespace

TEST_SUITE("priors") {
  TEST_CASE("preset defaults") {
    const auto ig = std::get<DsiwPrior>(preset(PresetName::IgDsiw, 3));
    CHECK(ig.nu == 2.0);
    CHECK(ig.c_nu == 4.0);
    CHECK(ig.q() == 3);
    const auto& g = std::get<GammaMixing>(ig.mixing[0]);
    CHECK(g.shape == 0.5);
    CHECK(g.scale == 100.0);
    const auto ln = std::get<DsiwPrior>(preset(PresetName::LnDsiw, 2));
    CHECK(std::holds_alternative<LogNormalMixing>(ln.mixing[1]));
    CHECK(ln.c_nu == 1.0);
    const auto tn = std::get<DsiwPrior>(preset(PresetName::TnDsiw, 2));
    CHECK(std::get<TruncatedNormalMixing>(tn.mixing[0]).sigma == 10.0);
    const auto u = std::get<DsiwPrior>(preset(PresetName::UDsiw, 2));
    CHECK(std::get<UniformMixing>(u.mixing[0]).hi == 100.0);
    const auto mf = std::get<MatrixFPrior>(preset(PresetName::MatrixF, 4));
    CHECK(mf.nu == 1.0);
    CHECK(mf.nu_q_star == 4.0);
    CHECK(mf.Psi.matrix() == Matrix::Identity(4, 4));
  }

  TEST_CASE("overrides replace defaults") {
    PresetOverrides o;
    o.nu = 1.0;
    o.gamma_scale_root = 2.0;
    const auto ig = std::get<DsiwPrior>(preset(PresetName::IgDsiw, 2, o));
    CHECK(ig.nu == 1.0);
    CHECK(ig.c_nu == 2.0);
    CHECK(std::get<GammaMixing>(ig.mixing[0]).scale == 4.0);
    PresetOverrides bad;
    bad.psi = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(preset(PresetName::MatrixF, 2, bad), DimensionMismatch);
  }

  TEST_CASE("name parsing") {
    for (auto p : {PresetName::IgDsiw, PresetName::LnDsiw, PresetName::TnDsiw, PresetName::UDsiw,
                   PresetName::MatrixF})
      CHECK(parse_preset(to_string(p)) == p);
    CHECK_THROWS_AS(parse_preset("HORSESHOE"), UnknownPreset);
    CHECK(prior_name(preset(PresetName::LnDsiw, 2)) == "LN_DSIW");
  }

  TEST_CASE("matrix-F degrees of freedom must exceed q - 1") {
    CHECK_THROWS_AS(MatrixFPrior(1.0, 2.0, PDMatrix::identity(3)), DegreesOfFreedomTooSmall);
    CHECK_NOTHROW(MatrixFPrior(1.0, 2.5, PDMatrix::identity(3)));
    CHECK_THROWS_AS(MatrixFPrior(0.0, 4.0, PDMatrix::identity(3)), ParameterOutOfRange);
    PresetOverrides o;
    o.nu_q_star = 1.0;
    CHECK_THROWS_AS(preset(PresetName::MatrixF, 3, o), DegreesOfFreedomTooSmall);
  }

  TEST_CASE("every preset mixing density integrates to one") {
    for (auto p : {PresetName::IgDsiw, PresetName::LnDsiw, PresetName::TnDsiw, PresetName::UDsiw}) {
      const auto prior = std::get<DsiwPrior>(preset(p, 1));
      const MixingDensity& m = prior.mixing[0];
      CHECK(total_mass(m) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(total_mass(TruncatedNormalMixing{-3.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(total_mass(GammaMixing{2.0, 3.0}) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("log densities at known points") {
    CHECK(log_mixing_density(GammaMixing{1.0, 2.0}, 1.0) == doctest::Approx(-0.5 - std::log(2.0)));
    CHECK(log_mixing_density(UniformMixing{0.0, 100.0}, 150.0) == -INFINITY);
    CHECK(log_mixing_density(LogNormalMixing{0.0, 1.0}, -1.0) == -INFINITY);
    CHECK(log_mixing_density(TruncatedNormalMixing{0.0, 1.0}, 0.0) == -INFINITY);
    // Half-normal doubles the normal density.
    CHECK(log_mixing_density(TruncatedNormalMixing{0.0, 1.0}, 1.0) ==
          doctest::Approx(-0.5 - 0.5 * std::log(2.0 * M_PI) + std::log(2.0)));
  }

  TEST_CASE("every preset has a monotone tail beyond some k <= 100") {
    for (auto p : {PresetName::IgDsiw, PresetName::LnDsiw, PresetName::TnDsiw, PresetName::UDsiw}) {
      const auto prior = std::get<DsiwPrior>(preset(p, 1));
      const MixingDensity& m = prior.mixing[0];
      CHECK(check_tail_monotone(m, 100.0));
    }
    CHECK(check_tail_monotone(GammaMixing{0.5, 100.0}, 1e-3));
    // Gamma(3, 1) rises until x = 2.
    CHECK_FALSE(check_tail_monotone(GammaMixing{3.0, 1.0}, 0.5));
    CHECK(check_tail_monotone(GammaMixing{3.0, 1.0}, 2.0));
    CHECK_THROWS_AS(check_tail_monotone(GammaMixing{1.0, 1.0}, 0.0), ParameterOutOfRange);
  }
}
