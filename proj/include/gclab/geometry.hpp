#pragma once

// Exact algebraic layer: variable scalings, Riemann invariants, the Gauss
// constraint, characteristic speeds and the Christoffel symbols of the
// geodesic metric g = dt^2 + B^2 dx^2 (coordinate order: index 1 = x,
// index 2 = t, so g11 = B^2, g12 = 0, g22 = 1).

#include <cmath>

#include "gclab/errors.hpp"

namespace gclab {

// |u - v| below this is treated as loss of strict hyperbolicity.
inline constexpr double kDegenerateGap = 1e-10;

// Second-fundamental-form coefficients before scaling, with the metric
// coefficient B > 0 and Gauss curvature K <= 0 they live on.
struct RawForms {
  double L = 0.0;
  double M = 0.0;
  double N = 0.0;
  double B = 1.0;
  double K = -1.0;
};

// Dimensionless scaled variables; on-shell states satisfy l*n - m^2 = -1.
struct ScaledState {
  double l = -1.0;
  double m = 0.0;
  double n = 1.0;
};

// Riemann invariants; strict hyperbolicity is v - u > 0.
struct RiemannState {
  double u = 0.0;
  double v = 0.0;
};

struct FundamentalForms {
  double g11 = 1.0, g12 = 0.0, g22 = 1.0;
  double h11 = 0.0, h12 = 0.0, h22 = 0.0;
};

struct Eigenvalues {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Nonzero Christoffel symbols of g = dt^2 + B(t)^2 dx^2.
struct ChristoffelSymbols {
  double gamma_x_xt = 0.0;  // Gamma^x_{xt} = dB/B
  double gamma_t_xx = 0.0;  // Gamma^t_{xx} = -B dB
};

// l = L/(B^2 sqrt|K|), m = M/(B sqrt|K|), n = N/sqrt|K|.
inline ScaledState to_scaled(const RawForms& f) {
  if (!(f.B > 0.0)) throw DomainError("to_scaled: B must be positive");
  if (!(f.K < 0.0)) throw DomainError("to_scaled: K must be negative (scaling undefined at K = 0)");
  const double sk = std::sqrt(-f.K);
  return {f.L / (f.B * f.B * sk), f.M / (f.B * sk), f.N / sk};
}

inline RawForms from_scaled(const ScaledState& s, double B, double K) {
  if (!(B > 0.0)) throw DomainError("from_scaled: B must be positive");
  if (!(K < 0.0)) throw DomainError("from_scaled: K must be negative");
  const double sk = std::sqrt(-K);
  return {s.l * B * B * sk, s.m * B * sk, s.n * sk, B, K};
}

// u = (1 - m)/l, v = -(1 + m)/l; the gap is v - u = -2/l.
inline RiemannState to_riemann(double l, double m) {
  if (l == 0.0) {
    throw DegenerateStateError("to_riemann: l = 0, invariants unbounded");
  }
  return {(1.0 - m) / l, -(1.0 + m) / l};
}

inline RiemannState to_riemann(const ScaledState& s) { return to_riemann(s.l, s.m); }

// l = 2/(u-v), m = -(u+v)/(u-v), n = 2uv/(u-v); satisfies l*n - m^2 = -1
// identically.
inline ScaledState from_riemann(const RiemannState& r) {
  const double d = r.u - r.v;
  if (std::abs(d) < kDegenerateGap) {
    throw DegenerateStateError("from_riemann: u = v, hyperbolicity degenerate");
  }
  return {2.0 / d, -(r.u + r.v) / d, 2.0 * r.u * r.v / d};
}

// Residual of the Gauss constraint: l*n - m^2 + 1 (zero on shell).
inline double gauss_residual(const ScaledState& s) { return s.l * s.n - s.m * s.m + 1.0; }

// n recovered from the constraint, the closure used throughout the solver.
inline double closure_n(double l, double m) {
  if (l == 0.0) {
    throw DegenerateStateError("closure_n: l = 0");
  }
  return (m * m - 1.0) / l;
}

// lambda1 = (m-1)/l = -u, lambda2 = (m+1)/l = -v.
inline Eigenvalues eigenvalues(double l, double m) {
  if (l == 0.0) {
    throw DegenerateStateError("eigenvalues: l = 0, characteristic speeds unbounded");
  }
  return {(m - 1.0) / l, (m + 1.0) / l};
}

inline double hyperbolicity_gap(const RiemannState& r) { return r.v - r.u; }

inline ChristoffelSymbols christoffel(double B, double dB_dt) {
  if (!(B > 0.0)) throw DomainError("christoffel: B must be positive");
  return {dB_dt / B, -B * dB_dt};
}

// In the geodesic gauge the balance-law coefficients are the second-form
// entries themselves: (L, M, N) = (h11, h12, h22). This is what makes the
// constraint L N - M^2 = K B^2 the Gauss equation det II = K det I, and the
// scaled constraint l n - m^2 = -1 exact.
inline FundamentalForms fundamental_forms(const RawForms& f) {
  if (!(f.B > 0.0)) throw DomainError("fundamental_forms: B must be positive");
  FundamentalForms out;
  out.g11 = f.B * f.B;
  out.g12 = 0.0;
  out.g22 = 1.0;
  out.h11 = f.L;
  out.h12 = f.M;
  out.h22 = f.N;
  return out;
}

}  // namespace gclab
