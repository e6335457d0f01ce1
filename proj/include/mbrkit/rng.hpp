#ifndef MBRKIT_RNG_HPP_
#define MBRKIT_RNG_HPP_

#include <array>
#include <cstdint>

namespace mbrkit {

// SplitMix64 finalizer. Used for seeding and for seed splitting.
std::uint64_t splitmix64(std::uint64_t x);

// xoshiro256** generator.
//
// The state is filled from the seed by iterating SplitMix64. A sub-stream
// for index i is a new generator seeded with
//   splitmix64(seed ^ splitmix64(i + 0x632be59bd9b4e019))
// where `seed` is the seed this generator was constructed with; splitting
// does not advance the parent. All sampling helpers are defined here
// rather than via <random> distributions, whose outputs are not specified
// by the standard and differ between library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

}  // namespace mbrkit

#endif  // MBRKIT_RNG_HPP_
