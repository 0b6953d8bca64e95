#pragma once

// Periodic-in-x field states of the second-fundamental-form unknowns, in
// either the scaled (l, m) or the Riemann-invariant (u, v) representation,
// plus the rough initial-data generators.

#include <cstdint>
#include <string>
#include <vector>

#include "gclab/geometry.hpp"

namespace gclab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class Representation : std::uint8_t { kLM = 0, kUV = 1 };

// Uniform periodic grid on [0, 2pi): x_j = j dx, j = 0..J-1.
struct PeriodicGrid {
  int J = 0;
  double dx() const { return kTwoPi / static_cast<double>(J); }
  double x(int j) const { return dx() * static_cast<double>(j); }
};

struct FieldState {
  Representation rep = Representation::kUV;
  double t = 0.0;
  std::vector<double> a;  // l or u
  std::vector<double> b;  // m or v

  int size() const { return static_cast<int>(a.size()); }
};

// Pointwise exact transforms (throw DegenerateStateError on u = v / l = 0).
FieldState to_uv_state(const FieldState& s);
FieldState to_lm_state(const FieldState& s);

// n = (m^2 - 1)/l per cell for a state in either representation.
std::vector<double> closure_n_of(const FieldState& s);

// Signed distances to the invariant region at time t:
//   u + psi0,  -e^{-t} psi0 - u,  v - e^{-t} psi0,  psi0 - v,
// each minimized over x. All nonnegative means in-region.
struct RegionMargins {
  double u_lower = 0.0;
  double u_upper = 0.0;
  double v_lower = 0.0;
  double v_upper = 0.0;
  double min() const;
};

RegionMargins monitor_region(const FieldState& state, double t, double psi0);

// v - u minimized over x.
double min_gap(const FieldState& state);

enum class DataKind : std::uint8_t { kConstant, kTwoStep, kRandomCells, kSmooth };

DataKind parse_data_kind(const std::string& name);
std::string data_kind_name(DataKind kind);

// Piecewise-constant (or smooth) (u, v) data strictly inside the admissible
// box [-psi0, -e^{-T1} psi0] x [e^{-T1} psi0, psi0], inset by `inset` of the
// box width on each side. Deterministic in `seed`.
FieldState generate_rough_data(DataKind kind, int J, double T1, double psi0, std::uint64_t seed,
                               double inset = 0.05);

}  // namespace gclab
