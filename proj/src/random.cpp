#include "causagen/random.hpp"

#include <cmath>
#include <numbers>

namespace causagen {

// Box-Muller on two fresh uniforms; no cached second variate, so a stream's
// output depends only on how many normals were drawn.
double Rng::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace causagen
