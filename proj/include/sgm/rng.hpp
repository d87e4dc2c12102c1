#pragma once

#include <cstdint>
#include <random>

namespace sgm {

// Deterministic Gaussian stream for problem generation. The engine is
// std::mt19937_64 (bit-exact across platforms); uniforms take the top 53
// bits; normals come from the classic Box-Muller transform with the
// second value of each pair cached. Identical seeds give identical
// streams, so generated problems are reproducible to the last bit.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

  double uniform();  // [0, 1)
  double next();     // N(0, 1)

  static constexpr const char* kGeneratorName =
      "mt19937_64/top53-uniform/box-muller";

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace sgm
