#pragma once

// Deterministic, splittable random streams.
//
// Every Monte Carlo estimator in this library draws from an RngStream keyed by
// (seed, stream_id).  Streams with distinct keys are statistically independent,
// and a given key always reproduces the same sequence on every platform, so
// sharded runs reduce to the same result regardless of thread scheduling.
//
// Generator: xoshiro256++ (Blackman & Vigna, https://prng.di.unimi.it/), with
// the 256-bit state filled by splitmix64 applied to the key.  We avoid
// std::normal_distribution and friends because the standard leaves their
// algorithms unspecified, which would break cross-platform reproducibility.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>

namespace crofton {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}
}  // namespace detail

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t key = seed;
    state_[0] = detail::splitmix64(key);
    state_[1] = detail::splitmix64(key);
    key ^= 0xd2b74407b1ce6e93ULL + stream_id * 0x9e3779b97f4a7c15ULL;
    state_[2] = detail::splitmix64(key);
    state_[3] = detail::splitmix64(key);
    // A few warm-up rounds decorrelate nearby keys.
    for (int i = 0; i < 8; ++i) (void)next_u64();
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal via the Marsaglia polar method (pair-cached).
  double gaussian() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cache_ = v * m;
    has_cache_ = true;
    return u * m;
  }

  Eigen::VectorXd gaussian_vector(int n) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g[i] = gaussian();
    return g;
  }

  // Uniform on the unit sphere S^{d-1}.
  Eigen::VectorXd unit_vector(int d) {
    for (;;) {
      Eigen::VectorXd g = gaussian_vector(d);
      const double norm = g.norm();
      if (norm > 1e-12) return g / norm;
    }
  }

  // Uniform in the ball of the given radius in R^k (k = 0 gives the empty
  // vector: the unique point of the zero-dimensional ball).
  Eigen::VectorXd ball_point(int k, double radius = 1.0) {
    if (k == 0) return Eigen::VectorXd(0);
    return unit_vector(k) * (radius * std::pow(uniform(), 1.0 / k));
  }

  // Exponential(1) variate.
  double exponential() {
    double u;
    do { u = uniform(); } while (u <= 0.0);
    return -std::log(u);
  }

 private:
  std::array<std::uint64_t, 4> state_{};
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace crofton
