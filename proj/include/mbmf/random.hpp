#ifndef MBMF_RANDOM_HPP
#define MBMF_RANDOM_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>

namespace mbmf {

using Rng = std::mt19937_64;

/// Derives an independent generator for a named purpose ("split", "folds",
/// "init", ...) from a single user seed.
inline Rng substream(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the name.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

/// Uniform real in [lo, hi) built from raw generator bits so results do not
/// depend on the standard library's distribution implementation.
inline double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Rejection sampling for an unbiased draw.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Fisher-Yates shuffle using uniform_index.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + static_cast<std::ptrdiff_t>(j));
  }
}

}  // namespace mbmf

#endif  // MBMF_RANDOM_HPP
