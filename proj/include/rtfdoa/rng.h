// include/rtfdoa/rng.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_RNG_H_
#define RTFDOA_RNG_H_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rtfdoa {

// Counter-based splittable generator: every draw is a stateless hash of
// (seed, stream, counter), so runs are bit-reproducible and independent
// streams can be derived for any stochastic op.
inline uint64_t splitmix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  Rng(uint64_t seed, uint64_t stream) : key_(mix(seed, stream)) {}

  // Derive an independent stream (e.g. per epoch, per batch, per op).
  Rng split(uint64_t substream) const { return Rng(key_, substream, 0); }

  uint64_t next_u64() { return splitmix64(key_ + counter_++); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1] (safe for log()).
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (one variate per call, two uniforms).
  double gauss() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

 private:
  Rng(uint64_t key, uint64_t stream, uint64_t counter)
      : key_(mix(key, stream)), counter_(counter) {}
  static uint64_t mix(uint64_t seed, uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ (0xD2B74407B1CE6E93ULL + stream));
  }
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace rtfdoa

#endif  // RTFDOA_RNG_H_
