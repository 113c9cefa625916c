#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace apf {

/// Counter-based random stream (Philox4x32-10).
///
/// The 64-bit seed is the Philox key; the 128-bit counter is split into a
/// 64-bit block index and a 64-bit stream id, so two streams with the same
/// seed and different ids never share a block. Every stream owns its state;
/// parallel runs hold distinct streams.
class RngStream {
 public:
  /// Stream ids at or above this bound are reserved for fork().
  static constexpr std::uint64_t kMaxStreamId = std::uint64_t{1} << 48;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return key_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  /// Child stream on lane `lane` (1..65535) of this stream's id.
  RngStream fork(std::uint16_t lane) const;

  std::uint64_t next_u64();
  /// 53-bit uniform on [0, 1).
  double next_unit();
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double next_standard_normal();

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> ctr,
                                                   std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;  // 32-bit words left in buffer_
  std::optional<double> spare_normal_;
};

/// Uniform draw on [a, b). Throws std::invalid_argument unless a < b.
double draw_uniform(RngStream& rng, double a, double b);

/// Gaussian draw with the given mean and variance. A zero variance returns
/// `mean` exactly (one standard normal is still consumed).
double draw_normal(RngStream& rng, double mean, double variance);

}  // namespace apf
