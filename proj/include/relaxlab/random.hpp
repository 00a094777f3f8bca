#ifndef RELAXLAB_RANDOM_HPP
#define RELAXLAB_RANDOM_HPP

// Deterministic sampling. Every sample stream is addressed by (seed, index),
// so results do not depend on thread scheduling or on the standard library's
// distribution implementations.

#include <cstdint>

#include "relaxlab/tensor.hpp"

namespace relaxlab {

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the stream with the given index under a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t index) : state_(derive_seed(seed, index)) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Vec3 normal3();
  Vec3 unit3();
  /// Haar-distributed rotation (unit quaternion).
  Rotation3 rotation();
  DeformationGradient gaussian_matrix(int n_cols, double scale = 1.0);

 private:
  std::uint64_t state_;
};

}  // namespace relaxlab

#endif  // RELAXLAB_RANDOM_HPP
