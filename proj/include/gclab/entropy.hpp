#pragma once

// Entropy / entropy-flux pair for the scaled system:
//   eta = -(m^2 + 1)/l,   q = (m^3 - m)/(h l^2),
// convex on l < 0 (the Hessian determinant is 4/l^4 > 0 and the trace is
// positive exactly when l < 0).

#include <array>
#include <cmath>

#include "gclab/errors.hpp"

namespace gclab {

struct EntropyValue {
  double eta = 0.0;
  double q = 0.0;
};

inline EntropyValue entropy_eval(double l, double m, double h) {
  if (l == 0.0) throw DomainError("entropy_eval: l = 0");
  if (!(h > 0.0)) throw DomainError("entropy_eval: h must be positive");
  return {-(m * m + 1.0) / l, (m * m * m - m) / (h * l * l)};
}

inline double entropy_dl(double l, double m) { return (m * m + 1.0) / (l * l); }
inline double entropy_dm(double l, double m) { return -2.0 * m / l; }

// Row-major 2x2 symmetric Hessian of eta.
inline std::array<double, 4> entropy_hessian(double l, double m) {
  if (l == 0.0) throw DomainError("entropy_hessian: l = 0");
  const double f = -2.0 / l;
  return {f * (m * m + 1.0) / (l * l), f * (-m / l), f * (-m / l), f};
}

struct HessianCheck {
  bool positive_definite = false;
  double eig_min = 0.0;
  double eig_max = 0.0;
};

inline HessianCheck hessian_pd(double l, double m) {
  const std::array<double, 4> H = entropy_hessian(l, m);
  const double tr = H[0] + H[3];
  const double det = H[0] * H[3] - H[1] * H[2];
  const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
  HessianCheck out;
  out.eig_max = 0.5 * tr + disc;
  // det/eig_max avoids the cancellation of tr/2 - disc for ill-scaled states.
  out.eig_min = out.eig_max != 0.0 ? det / out.eig_max : 0.5 * tr - disc;
  out.positive_definite = tr > 0.0 && det > 0.0;
  return out;
}

}  // namespace gclab
