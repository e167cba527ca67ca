#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace vstep {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
/// the output is a pure function of (counter, key).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

/// 53-bit uniform on [0, 1) from two 32-bit words.
constexpr double to_unit_interval(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Per-pixel random draws keyed by (seed, row, col). Block 0 carries the
/// branch selector and the RVIN level, block 1 the Gaussian pair.
struct SiteDraws {
  double branch;
  double level;
  double gaussian;
};

inline SiteDraws site_draws(std::uint64_t seed, std::uint32_t row, std::uint32_t col) noexcept {
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)};
  const auto b0 = Philox4x32::generate({col, row, 0, 0}, key);
  const auto b1 = Philox4x32::generate({col, row, 1, 0}, key);
  const double u1 = to_unit_interval(b1[0], b1[1]);
  const double u2 = to_unit_interval(b1[2], b1[3]);
  // Box-Muller; 1 - u1 lies in (0, 1] so the log is finite.
  const double gaussian =
      std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return {to_unit_interval(b0[0], b0[1]), to_unit_interval(b0[2], b0[3]), gaussian};
}

}  // namespace vstep
