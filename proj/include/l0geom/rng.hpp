#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace l0geom {

// Philox4x32-10 (Salmon et al., SC 2011). Stateless block function: the
// output depends only on (counter, key).
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block generate(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Block single_round(const Block& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Random stream addressed by (seed, sample index). Two streams built from
/// the same pair produce identical sequences, independent of which thread
/// evaluates them or in what order.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t index) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        index_(index) {}

  /// Uniform double in the open interval (0, 1).
  double uniform() noexcept {
    if (cursor_ == 2) refill();
    const std::uint64_t bits = lanes_[cursor_++];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform double in [-1, 1).
  double symmetric() noexcept { return 2.0 * uniform() - 1.0; }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  double exponential() noexcept { return -std::log(uniform()); }

 private:
  void refill() noexcept {
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(index_),
                                static_cast<std::uint32_t>(index_ >> 32),
                                static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32)};
    const auto out = Philox4x32::generate(ctr, key_);
    lanes_[0] = (std::uint64_t{out[0]} << 32) | out[1];
    lanes_[1] = (std::uint64_t{out[2]} << 32) | out[3];
    ++block_;
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t index_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> lanes_{};
  int cursor_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derive an independent seed for a named sub-stream (splitmix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace l0geom
