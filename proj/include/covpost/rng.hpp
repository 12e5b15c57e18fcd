#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace covpost {

/// Counter-based Philox4x32-10 stream. The 64-bit seed is the cipher key and
/// the stream id occupies the upper half of the 128-bit counter, so every
/// (seed, stream_id) pair addresses its own non-overlapping sequence and no
/// state has to be shared between parallel tasks.
///
/// Satisfies UniformRandomBitGenerator, so std:: distributions accept it.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform01();
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned next_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// The raw Philox4x32-10 block function (exposed for known-answer tests).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Mixes a master seed with a path of task coordinates into a stream id.
std::uint64_t derive_stream_id(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path);

}  // namespace covpost
