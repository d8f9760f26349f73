#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace branchpde {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream keyed by (master_seed, stream_id).
///
/// The master seed is the Philox key; the stream id fills the upper half of
/// the counter and the block index the lower half, so distinct stream ids
/// never share a counter value. A stream is a plain value: copy it to fork
/// the sequence, move it to hand it to another thread.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Next 64 random bits.
  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  /// Exp(1).
  double exponential();

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Number of Philox blocks consumed so far.
  std::uint64_t blocks_used() const noexcept { return block_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  void refill();

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_words_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

/// SplitMix64 finalizer; used to derive independent master seeds.
std::uint64_t mix_seed(std::uint64_t value);

}  // namespace branchpde
