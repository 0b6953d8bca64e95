#pragma once

// Adaptive Gauss-Kronrod (G7/K15) quadrature on finite intervals.

#include <functional>

namespace gclab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated error estimate
};

// Bisects until the local error estimate meets the tolerance budget.
// Throws RefinementError if the interval stack exhausts max_depth.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, int max_depth = 48);

}  // namespace gclab
