#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace casetest {

/// Seeded random stream with keyed substream derivation.
///
/// All simulation code draws through this class instead of the <random>
/// distribution templates, whose output is implementation-defined. The raw
/// engine is std::mt19937_64 (fully specified by the standard) and every
/// distribution below is coded explicitly, so a (seed, call sequence) pair
/// produces the same values on every platform.
///
/// Streams are forked by key, not by consuming state: child(k) depends only
/// on the creation seed and k. Sibling keys must be distinct. A function
/// taking a RandomStream owns it; callers pass a dedicated child.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Independent substream; depends only on this stream's seed and the key.
  RandomStream child(std::uint64_t key) const;
  RandomStream child(std::string_view label) const;

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Unbiased draw from {0, 1, ..., bound-1}; bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);
  /// Uniform on [0, 1) with 53-bit resolution.
  double next_unit();
  bool next_bernoulli(double p);
  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double next_normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang, with the shape<1 boost.
  double next_gamma(double shape);
  double next_beta(double a, double b);

  static std::uint64_t hash_label(std::string_view label);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace casetest
