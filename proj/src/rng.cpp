#include "bsrmm/rng.hpp"

#include <cmath>

#include "bsrmm/errors.hpp"

namespace bsrmm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream_id + 0x5851f42d4c957f2dULL));
}

double Rng::uniform() {
  // 53-bit mantissa, offset by half an ulp so the result is in (0,1).
  return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw input_error("uniform_int: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw input_error("gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost to shape+1 and rescale by a uniform power.
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

}  // namespace bsrmm
