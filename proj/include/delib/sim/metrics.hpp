#pragma once

#include <string>

namespace delib::sim {

// Path-length-weighted metric: M * Lref / max(Lpred, Lref).
// Equal to M when the predicted path is no longer than the reference;
// scales down as the predicted path grows.
double plw(double metric, long predicted_length, long reference_length);

struct MetricsReport {
  bool success = false;
  double goal_condition_rate = 0;
  long trajectory_length = 0;
  long reference_length = 0;
  double plw_success = 0;
  double plw_goal_condition_rate = 0;
  std::string failure_category;  // empty on success
};

}  // namespace delib::sim
