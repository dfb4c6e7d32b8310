#include "cdrm/random.hpp"

#include <cmath>
#include <numbers>

namespace cdrm {

double standard_normal(Rng& rng) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace cdrm
