#pragma once

#include <cstdint>
#include <random>

namespace qmlab {

std::uint64_t splitmix64(std::uint64_t x);

// Seeded generator. All draws are derived from raw 64-bit engine output so
// that sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  // Independent stream keyed by `stream`; does not advance this generator.
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  double uniform();                  // [0, 1)
  double uniform(double lo, double hi);
  double normal();                   // standard normal
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)
  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qmlab
