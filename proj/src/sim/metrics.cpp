#include "delib/sim/metrics.hpp"

#include <stdexcept>

namespace delib::sim {

double plw(double metric, long predicted_length, long reference_length) {
  if (predicted_length < 0 || reference_length <= 0)
    throw std::invalid_argument("plw: predicted >= 0 and reference > 0 required");
  if (predicted_length <= reference_length) return metric;
  return metric * (static_cast<double>(reference_length) /
                   static_cast<double>(predicted_length));
}

}  // namespace delib::sim
