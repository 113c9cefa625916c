#include "apf/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace apf {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t{a} * std::uint64_t{b};
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : key_(seed), stream_(stream_id) {}

RngStream RngStream::fork(std::uint16_t lane) const {
  if (lane == 0) throw std::invalid_argument("RngStream::fork: lane must be nonzero");
  if (stream_ >= kMaxStreamId) throw std::invalid_argument("RngStream::fork: stream already forked");
  return RngStream(key_, stream_ | (std::uint64_t{lane} << 48));
}

std::array<std::uint32_t, 4> RngStream::philox_block(std::array<std::uint32_t, 4> ctr,
                                                     std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

void RngStream::refill() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(key_),
                                            static_cast<std::uint32_t>(key_ >> 32)};
  buffer_ = philox_block(ctr, key);
  buffered_ = 4;
  ++block_;
}

std::uint64_t RngStream::next_u64() {
  if (buffered_ < 2) refill();
  const std::uint64_t lo = buffer_[4 - buffered_];
  const std::uint64_t hi = buffer_[5 - buffered_];
  buffered_ -= 2;
  return lo | (hi << 32);
}

double RngStream::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::next_standard_normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

double draw_uniform(RngStream& rng, double a, double b) {
  if (!(a < b)) {
    throw std::invalid_argument("draw_uniform: empty range [" + std::to_string(a) + ", " +
                                std::to_string(b) + ")");
  }
  const double x = a + (b - a) * rng.next_unit();
  return x < b ? x : std::nextafter(b, a);
}

double draw_normal(RngStream& rng, double mean, double variance) {
  if (!(variance >= 0.0)) throw std::invalid_argument("draw_normal: negative variance");
  const double z = rng.next_standard_normal();
  if (variance == 0.0) return mean;
  return mean + std::sqrt(variance) * z;
}

}  // namespace apf
