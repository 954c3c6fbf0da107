#ifndef SVI_RNG_HPP
#define SVI_RNG_HPP

#include <cstdint>
#include <cmath>

#include "svi/error.hpp"

namespace svi {

// Counter-based generation: every variate is a pure function of
// (seed, counter, slot), so a sample can be replayed at any time without
// storing it and disjoint counter ranges give independent draws.

namespace detail {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Identity of one sample draw xi; variates are indexed by slot.
struct sample_key {
  std::uint64_t state = 0;

  std::uint64_t bits(std::uint64_t slot) const {
    return detail::mix64(state + (slot + 1) * detail::kGolden);
  }

  /// Uniform on (0, 1].
  double u01(std::uint64_t slot) const {
    return static_cast<double>((bits(slot) >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(std::uint64_t slot, double lo, double hi) const {
    return lo + (hi - lo) * u01(slot);
  }

  /// Standard normal via Box-Muller; consumes slots 2s and 2s+1 of a
  /// separate channel so it never collides with uniform slots.
  double normal(std::uint64_t slot) const {
    const sample_key chan{detail::mix64(state ^ 0x5bf0'3635'dcd6'e169ULL)};
    const double u1 = chan.u01(2 * slot);
    const double u2 = chan.u01(2 * slot + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
};

/// Contiguous counter range [counter0, counter0 + count) of one stream.
struct sample_batch {
  std::uint64_t seed = 0;
  std::uint64_t counter0 = 0;
  long long count = 0;

  sample_key key(long long j) const {
    return sample_key{detail::mix64(seed ^ detail::mix64(counter0 + static_cast<std::uint64_t>(j)))};
  }
};

/// Position in the draw sequence plus cumulative oracle-call accounting.
/// Passed and returned by value; there is no hidden mutation.
struct sample_stream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
  long long calls = 0;
};

inline sample_stream make_stream(std::uint64_t seed) { return sample_stream{seed, 0, 0}; }

/// Reserves the next `n` counters as a batch; calls increase by exactly n.
inline std::pair<sample_batch, sample_stream> draw_batch(const sample_stream& s, long long n) {
  require(n >= 1, errc::invalid_parameter, "batch size must be >= 1");
  sample_batch b{s.seed, s.counter, n};
  sample_stream advanced{s.seed, s.counter + static_cast<std::uint64_t>(n), s.calls + n};
  return {b, advanced};
}

}  // namespace svi

#endif  // SVI_RNG_HPP
