#pragma once

#include "funnystrom/types.hpp"

#include <array>
#include <cmath>
#include <cstdint>

namespace funnystrom {

// Counter-based random numbers: Philox4x32-10 keyed by a 64-bit seed with a
// 64-bit stream id and 64-bit block counter. Every entry of a sample is a pure
// function of (seed, stream, position), so blocks and columns can be generated
// in any order, or in parallel, without changing the result.
namespace philox {

inline constexpr std::uint32_t kMult0 = 0xD2511F53u;
inline constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t stream,
                                          std::uint64_t counter) {
  std::uint32_t c0 = static_cast<std::uint32_t>(counter);
  std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(stream);
  std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {c0, c1, c2, c3};
}

}  // namespace philox

/// splitmix64 finalizer, used to derive independent sub-stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives the seed of a named sub-stream from a base seed. Estimators that
/// need several independent draws (sketch, probes, ...) document their tags.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag));
}

namespace detail {

// One Philox block yields two 53-bit uniforms, turned into two standard
// normals by the Box-Muller transform.
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                             std::uint64_t block_index) {
  const auto r = philox::block(seed, stream, block_index);
  const std::uint64_t a = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
  const std::uint64_t b = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
  constexpr double kScale = 0x1p-53;
  const double u1 = static_cast<double>((a >> 11) + 1) * kScale;  // in (0, 1]
  const double u2 = static_cast<double>(b >> 11) * kScale;        // in [0, 1)
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace detail

/// Standard normal draw at a fixed position of a (seed, stream) sequence.
inline double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const auto pair = detail::normal_pair(seed, stream, index >> 1);
  return (index & 1u) == 0 ? pair.first : pair.second;
}

/// n x k matrix with i.i.d. standard normal entries, reproducible per
/// (seed, stream); entry (i, j) only depends on its flat position j*n + i.
template <typename Scalar = double>
Matrix<Scalar> gaussian_matrix(Index n, Index k, std::uint64_t seed, std::uint64_t stream = 0) {
  if (n < 1 || k < 1) {
    throw std::invalid_argument("gaussian_matrix: need n >= 1 and k >= 1");
  }
  Matrix<Scalar> result(n, k);
  std::uint64_t cached_block = ~0ull;
  std::pair<double, double> pair{0.0, 0.0};
  for (Index j = 0; j < k; ++j) {
    const std::uint64_t offset = static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(n);
    for (Index i = 0; i < n; ++i) {
      const std::uint64_t flat = offset + static_cast<std::uint64_t>(i);
      if ((flat >> 1) != cached_block) {
        cached_block = flat >> 1;
        pair = detail::normal_pair(seed, stream, cached_block);
      }
      result(i, j) = static_cast<Scalar>((flat & 1u) == 0 ? pair.first : pair.second);
    }
  }
  return result;
}

template <typename Scalar = double>
Vector<Scalar> gaussian_vector(Index n, std::uint64_t seed, std::uint64_t stream = 0) {
  return gaussian_matrix<Scalar>(n, 1, seed, stream).col(0);
}

}  // namespace funnystrom
