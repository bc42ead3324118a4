#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace oasim {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hashes an ordered key tuple into 64 bits. Used as a counter-based
/// generator: the same key always yields the same value regardless of
/// evaluation order.
constexpr std::uint64_t hash_key(std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t k : key) h = mix64(h ^ mix64(k));
    return h;
}

/// Uniform in [0, 1) with 53 bits of mantissa.
constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Keyed standard normal via Box-Muller.
inline double keyed_normal(std::uint64_t k0, std::uint64_t k1) {
    const double u1 = 1.0 - to_unit(mix64(k0));  // (0, 1]
    const double u2 = to_unit(mix64(k1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential generator with a fully specified output stream, independent
/// of the standard library's distribution implementations.
class SplitMix {
  public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        return mix64(state_++);
    }
    double uniform() { return to_unit(next()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  private:
    std::uint64_t state_;
};

} // namespace oasim
