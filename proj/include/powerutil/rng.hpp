#pragma once

#include <array>
#include <cstdint>

namespace powerutil::rng {

/// Philox4x32-10 block function (Salmon et al.): four 32-bit words of output
/// per counter value, keyed by two 32-bit words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

enum class Substream : std::uint32_t { diffusion = 0, jumps = 1, factor = 2 };

/// A reproducible stream addressed by (seed, path, substream). The draw index
/// fills the low 64 bits of the counter, so streams never overlap.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint32_t path, Substream sub) noexcept;

  std::uint32_t next_u32() noexcept;
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal by Box-Muller; the second value of each pair is kept.
  double normal() noexcept;
  double exponential(double rate) noexcept;
  /// Poisson by inversion; means above 50 are split into pieces.
  std::uint64_t poisson(double mean) noexcept;
  /// Gamma(shape, 1) by Marsaglia-Tsang.
  double gamma(double shape) noexcept;

 private:
  std::uint64_t draw_ = 0;
  std::array<std::uint32_t, 2> key_;
  std::uint32_t path_;
  std::uint32_t sub_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace powerutil::rng
