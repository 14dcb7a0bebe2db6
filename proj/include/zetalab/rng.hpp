#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace zetalab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Every draw is a pure function of (key, counter), so a Monte Carlo sample
/// can be regenerated from its index alone and work can be split across
/// threads in any order without changing a single bit of the output.
class Philox4x32 {
public:
  using block = std::array<std::uint32_t, 4>;

  explicit constexpr Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr block operator()(block ctr) const {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = round_(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

  /// Four 32-bit words for the counter (stream, a, b, c).
  constexpr block draw(std::uint32_t stream, std::uint64_t index,
                       std::uint32_t sub) const {
    return (*this)({stream, static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), sub});
  }

private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr block round_(const block &c,
                                const std::array<std::uint32_t, 2> &k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  std::array<std::uint32_t, 2> key_;
};

/// Uniform double in [0,1) from two 32-bit words (53 random bits).
constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Named streams keep unrelated consumers of one seed statistically apart.
enum class Stream : std::uint32_t {
  zeta_height = 1,
  steinhaus_angle = 2,
  gaussian_walk = 3,
  random_poly = 4,
  perturbation = 5,
};

/// Deterministic uniform draws addressed by (stream, index, sub).
class CounterRng {
public:
  explicit constexpr CounterRng(std::uint64_t seed) : gen_(seed) {}

  /// Two independent uniforms in [0,1) for one address.
  std::array<double, 2> uniform2(Stream s, std::uint64_t index,
                                 std::uint32_t sub) const {
    const auto b = gen_.draw(static_cast<std::uint32_t>(s), index, sub);
    return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
  }

  double uniform(Stream s, std::uint64_t index, std::uint32_t sub) const {
    return uniform2(s, index, sub)[0];
  }

  /// Standard normal by Box-Muller on one address.
  double normal(Stream s, std::uint64_t index, std::uint32_t sub) const {
    const auto u = uniform2(s, index, sub);
    const double r = std::sqrt(-2.0 * std::log1p(-u[0]));
    return r * std::cos(2.0 * std::numbers::pi * u[1]);
  }

private:
  Philox4x32 gen_;
};

} // namespace zetalab
