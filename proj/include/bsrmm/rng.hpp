#pragma once

#include <cstdint>
#include <random>

namespace bsrmm {

// Counter-free seed mixing for deriving independent per-replicate streams.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id);

// Random stream owned by a single thread. All variate generation in this
// project goes through this class so that a (seed, call sequence) pair fully
// determines every draw, independent of the standard library's
// implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform();

  // Uniform integer in {0, ..., n-1}, unbiased.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller (cosine branch).
  double normal();

  // Exponential(rate 1), strictly positive.
  double exponential();

  // Standard gamma, Marsaglia-Tsang; valid for any shape > 0.
  double gamma(double shape);

  double beta(double a, double b);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace bsrmm
