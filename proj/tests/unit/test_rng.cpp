#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "covpost/rng.hpp"
#include "covpost/stats.hpp"

using namespace covpost;

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known answers") {
    // Reference vectors from the Random123 distribution.
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
          std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("same seed and stream reproduce, different streams differ") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    std::vector<std::uint64_t> va, vb, vc, vd;
    for (int i = 0; i < 100; ++i) {
      va.push_back(a());
      vb.push_back(b());
      vc.push_back(c());
      vd.push_back(d());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    CHECK(va != vd);
    CHECK(a == b);
  }

  TEST_CASE("uniforms stay in the open unit interval with the right moments") {
    RngStream rng(1, 2);
    std::vector<double> u;
    for (int i = 0; i < 200000; ++i) {
      const double x = rng.uniform01();
      REQUIRE(x > 0.0);
      REQUIRE(x < 1.0);
      u.push_back(x);
    }
    CHECK(std::abs(mean(u) - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / 200000.0));
    const auto ks = ks_one_sample(u, [](double x) { return x; });
    CHECK(ks.p_value > 0.001);
  }

  TEST_CASE("normals match the standard normal law") {
    RngStream rng(9, 3);
    std::vector<double> z;
    for (int i = 0; i < 100000; ++i) z.push_back(rng.normal());
    CHECK(std::abs(mean(z)) < 5.0 / std::sqrt(100000.0));
    CHECK(std::abs(sample_sd(z) - 1.0) < 0.01);
    const auto ks = ks_one_sample(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    CHECK(ks.p_value > 0.001);
  }

  TEST_CASE("derived stream ids are distinct across task coordinates") {
    std::set<std::uint64_t> ids;
    for (std::uint64_t a = 0; a < 10; ++a)
      for (std::uint64_t b = 0; b < 10; ++b)
        for (std::uint64_t c = 0; c < 10; ++c) ids.insert(derive_stream_id(99, {a, b, c}));
    CHECK(ids.size() == 1000);
    CHECK(derive_stream_id(1, {2, 3}) == derive_stream_id(1, {2, 3}));
    CHECK(derive_stream_id(1, {2, 3}) != derive_stream_id(1, {3, 2}));
    CHECK(derive_stream_id(1, {2, 3}) != derive_stream_id(2, {2, 3}));
  }
}
