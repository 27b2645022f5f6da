// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>

namespace tonelink {

/// splitmix64 output function; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Per-item seed derived from a base seed and an item index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Seeded splitmix64 stream. Integer and uniform draws are bit-exact across
/// platforms; gaussian() goes through libm and is exact only per toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double gaussian();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  std::uint64_t draws_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tonelink
