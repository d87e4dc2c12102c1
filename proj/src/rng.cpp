#include "sgm/rng.hpp"

#include <cmath>

namespace sgm {

double NormalSampler::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double NormalSampler::next() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  cached_ = r * std::sin(theta);
  have_cached_ = true;
  return r * std::cos(theta);
}

}  // namespace sgm
