#pragma once

// Method-of-lines solver for the viscous balance laws on the periodic
// x-domain, in the scaled (l, m) representation with the Gauss closure
// n = (m^2 - 1)/l, or in the Riemann-invariant (u, v) representation with
// the viscous terms carried over from mu dxx(l, m) by the exact change of
// variables. Explicit Heun time stepping; transport upwinded by the local
// characteristic speed sign, first-order at roughness-flagged cells and
// second-order elsewhere; centered diffusion.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gclab/curvature.hpp"
#include "gclab/field.hpp"
#include "gclab/metric.hpp"

namespace gclab {

struct SchemeOptions {
  double cfl = 0.4;
  double dt_max = 0.0;       // 0 disables the cap
  double gap_min = 1e-8;     // abort threshold on min (v - u)
  double flag_theta = 0.5;   // local second-difference ratio for roughness
  double flag_kappa = 0.1;   // absolute second-difference scale factor
};

struct SolverConfig {
  Representation rep = Representation::kLM;
  int J = 128;
  double t_begin = 0.0;
  double t_end = 0.0;
  double mu = 1e-3;
  double psi0 = 0.1;
  DataKind data = DataKind::kRandomCells;
  double data_inset = 0.05;
  std::uint64_t seed = 0;
  int snapshots = 65;  // counting both endpoints
  SchemeOptions scheme;
};

// Per-accepted-step monitor record.
struct MonitorRecord {
  double t = 0.0;
  double dt = 0.0;
  double min_gap = 0.0;
  RegionMargins margins;
  double max_abs_dxl = 0.0;
  double max_abs_dxm = 0.0;
  int flagged_cells = 0;
  double max_speed = 0.0;
};

struct Trajectory {
  SolverConfig config;
  std::vector<FieldState> snapshots;
  std::vector<MonitorRecord> monitor;
  std::size_t steps = 0;

  const FieldState& initial() const { return snapshots.front(); }
  const FieldState& final_state() const { return snapshots.back(); }
};

// Thrown when min(v - u) drops below gap_min; carries the offending state.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, FieldState snapshot)
      : std::runtime_error(what), snapshot_(std::move(snapshot)) {}
  const FieldState& snapshot() const { return snapshot_; }

 private:
  FieldState snapshot_;
};

// Time-derivative arrays of the viscous system at state `s`, plus the
// roughness-flag count and monitor derivatives from the same pass.
struct RhsResult {
  std::vector<double> da, db;
  int flagged = 0;
  double max_abs_dxl = 0.0;
  double max_abs_dxm = 0.0;
};

RhsResult rhs_lm(const FieldState& s, double t, double mu, const MetricSolution& metric,
                 const CurvatureProfile& profile, const SchemeOptions& opt = {});
RhsResult rhs_uv(const FieldState& s, double t, double mu, const MetricSolution& metric,
                 const CurvatureProfile& profile, const SchemeOptions& opt = {});

// One Heun step of size dt (no CFL logic).
FieldState step(const FieldState& s, double t, double dt, double mu, const MetricSolution& metric,
                const CurvatureProfile& profile, const SchemeOptions& opt = {});

// Full run: CFL-limited Heun marching with snapshots at uniform output times.
// Initial data generated from config unless `initial` is provided.
Trajectory solve(const SolverConfig& config, const MetricSolution& metric,
                 const std::optional<FieldState>& initial = std::nullopt);

// Admissible step from the CFL rule
// dt <= cfl * min(dx B / max|speed|, dx^2 / (2 mu)).
double cfl_dt(const FieldState& s, double t, double mu, const MetricSolution& metric,
              const SchemeOptions& opt, int J);

}  // namespace gclab
