#pragma once
// Counter-based random number generation: the Philox4x32-10 block cipher
// plus Box-Muller normal draws.
//
// Streams are keyed by (seed, path index); within a stream every normal is
// addressed by (step index, draw index). Any draw can therefore be
// regenerated on any thread in any order, which is what makes parallel
// Monte Carlo runs bit-reproducible: the schedule cannot influence the
// numbers.

#include "lgv/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

namespace lgv {

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Maps a 128-bit counter and 64-bit key to 128 bits.
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMult0 = 0xD2511F53u;
  static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block round(const Block& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
            static_cast<std::uint32_t>(p0)};
  }

  /// Ten rounds; the key is bumped by the Weyl constants between rounds.
  static Block encrypt(Block c, Key k) {
    for (int r = 0; r < 9; ++r) {
      c = round(c, k);
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return round(c, k);
  }
};

/// One logical stream of standard normals per (seed, path index).
///
/// Counter layout: {draw block, step, path low, path high}; the key holds
/// the seed. Steps are limited to 2^32 - 1 per run.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_(path) {}

  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
  }
  std::uint64_t path() const { return path_; }

  /// The i-th standard normal attached to a step. Draws with distinct
  /// (seed, path, step, i) are independent.
  double normal(std::uint64_t step, std::uint32_t i) const {
    const auto z = normal_pair(step, i >> 1);
    return (i & 1u) ? z.second : z.first;
  }

  /// Fill out[0..count) with the normals (step, 0..count-1).
  void fill_normals(std::uint64_t step, int count, double* out) const {
    for (int b = 0; 2 * b < count; ++b) {
      const auto z = normal_pair(step, static_cast<std::uint32_t>(b));
      out[2 * b] = z.first;
      if (2 * b + 1 < count) out[2 * b + 1] = z.second;
    }
  }

  Vec normals(std::uint64_t step, int count) const {
    Vec out(count);
    fill_normals(step, count, out.data());
    return out;
  }

 private:
  // Box-Muller on two (0, 1] uniforms from one Philox block.
  std::pair<double, double> normal_pair(std::uint64_t step, std::uint32_t block) const {
    if (step >> 32) throw ConfigError("RngStream: step index exceeds 2^32 - 1");
    const Philox4x32::Block c{block, static_cast<std::uint32_t>(step),
                              static_cast<std::uint32_t>(path_),
                              static_cast<std::uint32_t>(path_ >> 32)};
    const auto r = Philox4x32::encrypt(c, key_);
    const std::uint64_t a =
        static_cast<std::uint64_t>(r[0]) | (static_cast<std::uint64_t>(r[1]) << 32);
    const std::uint64_t b =
        static_cast<std::uint64_t>(r[2]) | (static_cast<std::uint64_t>(r[3]) << 32);
    // (0, 1] so the logarithm below is finite.
    const double u1 = (static_cast<double>(a) + 1.0) * 0x1p-64;
    const double u2 = (static_cast<double>(b) + 1.0) * 0x1p-64;
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

  Philox4x32::Key key_;
  std::uint64_t path_;
};

}  // namespace lgv
