#include "casetest/random.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "casetest/errors.hpp"

namespace casetest {

namespace {

// splitmix64 finalizer; used for seed mixing only.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

RandomStream RandomStream::child(std::uint64_t key) const {
  return RandomStream(mix64(seed_ ^ mix64(key + 0x632BE59BD9B4E019ull)));
}

RandomStream RandomStream::child(std::string_view label) const {
  return child(hash_label(label));
}

std::uint64_t RandomStream::hash_label(std::string_view label) {
  // FNV-1a, 64-bit.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t RandomStream::next_u64() { return engine_(); }

std::uint64_t RandomStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw ParameterError("next_below: bound must be positive");
  if ((bound & (bound - 1)) == 0) return next_u64() & (bound - 1);
  const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(bound - 1);
  std::uint64_t v;
  do {
    v = next_u64() & mask;
  } while (v >= bound);
  return v;
}

double RandomStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool RandomStream::next_bernoulli(double p) { return next_unit() < p; }

double RandomStream::next_normal() {
  const double u1 = 1.0 - next_unit();  // (0, 1]
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::next_gamma(double shape) {
  if (!(shape > 0.0)) throw ParameterError("next_gamma: shape must be positive");
  if (shape < 1.0) {
    const double g = next_gamma(shape + 1.0);
    const double u = 1.0 - next_unit();  // (0, 1]
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_unit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RandomStream::next_beta(double a, double b) {
  const double x = next_gamma(a);
  const double y = next_gamma(b);
  const double s = x + y;
  if (s <= 0.0) return 0.5;  // both draws underflowed; essentially impossible
  return x / s;
}

}  // namespace casetest
