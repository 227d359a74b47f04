#pragma once

#include <algorithm>
#include <vector>

namespace qlearn::detail {

struct CompassResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
};

// Coordinate compass search on the unit box [0,1]^d. Tries +/- step along
// each coordinate, keeps any improvement, halves the step when a full sweep
// fails, stops below min_step.
template <typename F>
CompassResult compass_minimize(F&& f, std::vector<double> x, double step, double min_step) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
  CompassResult out;
  out.value = f(x);
  out.evaluations = 1;
  while (step >= min_step) {
    bool improved = false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      for (double dir : {1.0, -1.0}) {
        const double old = x[j];
        const double trial = std::clamp(old + dir * step, 0.0, 1.0);
        if (trial == old) continue;
        x[j] = trial;
        const double v = f(x);
        ++out.evaluations;
        if (v < out.value) {
          out.value = v;
          improved = true;
          break;
        }
        x[j] = old;
      }
    }
    if (!improved) step *= 0.5;
  }
  out.x = std::move(x);
  return out;
}

}  // namespace qlearn::detail
