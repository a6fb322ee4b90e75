#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lfgeom {

// 64-bit generator with labelled splits: split("name") derives an independent
// substream, so adding a consumer never shifts the draws of another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::string_view label) const;
  Rng split(std::uint64_t index) const;

  double uniform();
  double uniform(double lo, double hi);
  double normal();
  int index(int n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace lfgeom
