#pragma once

// Philox4x32-10 counter-based generator and a
// per-path standard-normal stream addressed by (seed, path, index).

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qvigame {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53U;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Standard normals for one path. Normal number `index` is a pure function
/// of (seed, path, index); consecutive pairs share one Philox block.
class PathNormals {
 public:
  PathNormals(std::uint64_t seed, std::uint64_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

  double operator()(std::uint64_t index) {
    const std::uint64_t block = index >> 1;
    if (block != cached_block_) {
      fill(block);
      cached_block_ = block;
    }
    return cache_[index & 1U];
  }

 private:
  void fill(std::uint64_t block) {
    const auto r = Philox4x32::generate(
        {path_lo_, path_hi_, static_cast<std::uint32_t>(block),
         static_cast<std::uint32_t>(block >> 32)},
        key_);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cache_[0] = radius * std::cos(angle);
    cache_[1] = radius * std::sin(angle);
  }

  /// 53 random bits mapped into the open interval (0, 1).
  static double to_open_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  std::array<double, 2> cache_{};
};

}  // namespace qvigame
