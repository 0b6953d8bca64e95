#pragma once

// Dissipation norms, weak residuals of the inviscid balance laws against a
// fixed bank of smooth bump test functions, and the vanishing-viscosity
// sweep report.

#include <optional>
#include <string>
#include <vector>

#include "gclab/solver.hpp"

namespace gclab {

// Space-time window V = [t0, t1] x [x0, x1] inside the solution domain.
struct Window {
  double t0 = 0.0, t1 = 0.0;
  double x0 = 0.0, x1 = kTwoPi;
  bool contains_t(double t) const { return t >= t0 - 1e-12 && t <= t1 + 1e-12; }
};

// C^inf bump psi((x-xc)/wx) psi((t-tc)/wt) with psi(r) = exp(-1/(1-r^2)) on
// |r| < 1 and 0 outside; all derivatives vanish at the support edge.
struct BumpTestFunction {
  double xc = 0.0, wx = 1.0;
  double tc = 0.0, wt = 1.0;

  double value(double x, double t) const;
  double dx(double x, double t) const;
  double dt(double x, double t) const;
};

inline constexpr int kTestBankVersion = 1;

// Fixed, versioned bank of eight bump functions spanning the window.
std::vector<BumpTestFunction> make_test_bank(const Window& window);

struct DissipationSeries {
  std::vector<double> t;
  std::vector<double> sqrt_mu_dxl;  // sqrt(mu) ||dx l||_{L2(x-window)} per snapshot
  std::vector<double> sqrt_mu_dxm;
  double space_time_l{0.0};  // sqrt(mu) ||dx l||_{L2(V)}
  double space_time_m{0.0};
};

DissipationSeries dissipation_norm(const Trajectory& traj, double mu, const Window& window);

// |integral over V of (w chi_t - f chi_x + s chi)| for the two balance laws
//   dt l - dx(m/h) = s_l,   dt m - dx(n/h) = s_m,
// with the x-independent sources s_l = -(l-n) dln h - (l/2) dln k*,
// s_m = -2m dln h - (m/2) dln k*. Simpson in t, periodic rectangle rule in x.
struct WeakResidual {
  int chi_id = 0;
  double law_l = 0.0;
  double law_m = 0.0;
};

std::vector<WeakResidual> weak_residual(const Trajectory& traj, const MetricSolution& metric,
                                        const std::vector<BumpTestFunction>& bank);

struct SweepEntry {
  double mu = 0.0;
  bool completed = false;
  std::string failure;
  double min_margin = 0.0;
  double min_gap = 0.0;
  double linf_lmn = 0.0;  // max |(l,m,n)| over the window
  DissipationSeries dissipation;
  std::vector<WeakResidual> residuals;
};

struct SweepReport {
  std::vector<double> mus;
  Window window;
  int bank_version = kTestBankVersion;
  std::vector<SweepEntry> entries;
  // L1(V) distance between consecutive-mu solutions, summed over (l, m, n).
  std::vector<double> consecutive_l1;
  double sup_dissipation_l = 0.0;
  double dissipation_slope = 0.0;  // d log(norm) / d log(mu), least squares
  double uniform_linf = 0.0;
  double finest_gauss_residual = 0.0;
};

// Runs solve() per mu on identical initial data (decreasing mu expected),
// then assembles the diagnostics. Aborted solves leave annotated entries and
// are skipped in the comparisons. `jobs` bounds the concurrent solves.
SweepReport mu_sweep(const SolverConfig& base, const MetricSolution& metric,
                     const std::vector<double>& mus, const std::optional<Window>& window = {},
                     int jobs = 1);

// L1(V) distance between two trajectories on the same snapshot grid.
double l1_distance(const Trajectory& a, const Trajectory& b, const Window& window);

}  // namespace gclab
