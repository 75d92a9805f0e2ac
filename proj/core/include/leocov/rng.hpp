#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace leocov {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11) exposed as a
/// 64-bit UniformRandomBitGenerator.
///
/// The key is the 64-bit seed; the counter is (block index, stream id), so
/// every (seed, stream) pair is an independent sequence of 2^64 blocks and
/// substreams can be created in any order on any thread.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  void discard(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// The raw 10-round bijection.
  static Counter block(Counter counter, Key key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  unsigned used_ = 2;
};

}  // namespace leocov
