#include "gclab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gclab/errors.hpp"

namespace gclab {

namespace {

inline int wrap(int j, int J) { return (j % J + J) % J; }

struct UpwindResult {
  std::vector<double> d;  // dw/dx
  int flagged = 0;
};

// Upwind derivative by local speed sign. Cells whose centered second
// difference is large both relative to the neighboring first differences and
// to the global slope scale are treated as rough and drop to first order.
UpwindResult upwind_dx(const std::vector<double>& w, const std::vector<double>& speed, double dx,
                       const SchemeOptions& opt) {
  const int J = static_cast<int>(w.size());
  UpwindResult out;
  out.d.resize(J);
  double d1max = 0.0;
  for (int j = 0; j < J; ++j) {
    d1max = std::max(d1max, std::abs(w[wrap(j + 1, J)] - w[j]));
  }
  const double abs_floor = opt.flag_kappa * d1max;
  for (int j = 0; j < J; ++j) {
    const double wm2 = w[wrap(j - 2, J)], wm1 = w[wrap(j - 1, J)];
    const double wp1 = w[wrap(j + 1, J)], wp2 = w[wrap(j + 2, J)];
    const double d2 = std::abs(wp1 - 2.0 * w[j] + wm1);
    const bool rough =
        d2 > opt.flag_theta * (std::abs(wp1 - w[j]) + std::abs(w[j] - wm1)) && d2 > abs_floor;
    if (rough) ++out.flagged;
    if (speed[j] > 0.0) {
      out.d[j] = rough ? (w[j] - wm1) / dx : (3.0 * w[j] - 4.0 * wm1 + wm2) / (2.0 * dx);
    } else {
      out.d[j] = rough ? (wp1 - w[j]) / dx : (-3.0 * w[j] + 4.0 * wp1 - wp2) / (2.0 * dx);
    }
  }
  return out;
}

std::vector<double> centered_dx(const std::vector<double>& w, double dx) {
  const int J = static_cast<int>(w.size());
  std::vector<double> d(J);
  for (int j = 0; j < J; ++j) {
    d[j] = (w[wrap(j + 1, J)] - w[wrap(j - 1, J)]) / (2.0 * dx);
  }
  return d;
}

std::vector<double> centered_dxx(const std::vector<double>& w, double dx) {
  const int J = static_cast<int>(w.size());
  std::vector<double> d(J);
  for (int j = 0; j < J; ++j) {
    d[j] = (w[wrap(j + 1, J)] - 2.0 * w[j] + w[wrap(j - 1, J)]) / (dx * dx);
  }
  return d;
}

double max_abs(const std::vector<double>& w) {
  double m = 0.0;
  for (double v : w) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

RhsResult rhs_lm(const FieldState& s, double t, double mu, const MetricSolution& metric,
                 const CurvatureProfile& profile, const SchemeOptions& opt) {
  if (s.rep != Representation::kLM) throw DomainError("rhs_lm: state must be in LM representation");
  const int J = s.size();
  const double dx = PeriodicGrid{J}.dx();
  const double B = metric.h(t);
  const double dlnB = metric.dln_h(t);
  const double dlnK = profile.dlnk(t);
  // x-independent curvature: the d/dx ln|K| source coefficient is
  // identically zero here but kept in the assembly.
  const double dlnK_dx = 0.0;

  std::vector<double> u(J), v(J), n(J);
  for (int j = 0; j < J; ++j) {
    const double l = s.a[j], m = s.b[j];
    if (!(l < 0.0)) {
      std::ostringstream os;
      os << "rhs_lm: l >= 0 at cell " << j << " (l = " << l << "), hyperbolicity lost";
      throw DegenerateStateError(os.str());
    }
    u[j] = (1.0 - m) / l;
    v[j] = -(1.0 + m) / l;
    n[j] = (m * m - 1.0) / l;
  }

  // Characteristic speeds: du/dt + (v/B) du/dx = ..., dv/dt + (u/B) dv/dx = ...
  const UpwindResult dxu = upwind_dx(u, v, dx, opt);
  const UpwindResult dxv = upwind_dx(v, u, dx, opt);
  const std::vector<double> lap_l = centered_dxx(s.a, dx);
  const std::vector<double> lap_m = centered_dxx(s.b, dx);

  RhsResult out;
  out.da.resize(J);
  out.db.resize(J);
  out.flagged = dxu.flagged + dxv.flagged;
  out.max_abs_dxl = max_abs(centered_dx(s.a, dx));
  out.max_abs_dxm = max_abs(centered_dx(s.b, dx));
  for (int j = 0; j < J; ++j) {
    const double l = s.a[j], m = s.b[j];
    // Flux terms (1/B) dx m and (1/B) dx n assembled characteristic-wise:
    // with c = l/(u-v), (1/B) dx m = -c (-(v/B) u_x + (u/B) v_x) and
    // (1/B) dx n = -c ((v^2/B) u_x - (u^2/B) v_x).
    const double c = l / (u[j] - v[j]);
    const double flux_l = -c * (-(v[j] / B) * dxu.d[j] + (u[j] / B) * dxv.d[j]);
    const double flux_m = -c * ((v[j] * v[j] / B) * dxu.d[j] - (u[j] * u[j] / B) * dxv.d[j]);
    out.da[j] = flux_l - (l - n[j]) * dlnB - 0.5 * l * dlnK + (m / (2.0 * B)) * dlnK_dx +
                mu * lap_l[j];
    out.db[j] = flux_m - 2.0 * m * dlnB - 0.5 * m * dlnK + (n[j] / (2.0 * B)) * dlnK_dx +
                mu * lap_m[j];
  }
  return out;
}

RhsResult rhs_uv(const FieldState& s, double t, double mu, const MetricSolution& metric,
                 const CurvatureProfile& profile, const SchemeOptions& opt) {
  if (s.rep != Representation::kUV) throw DomainError("rhs_uv: state must be in UV representation");
  const int J = s.size();
  const double dx = PeriodicGrid{J}.dx();
  const double B = metric.h(t);
  const double dlnB = metric.dln_h(t);
  const double dlnK = profile.dlnk(t);
  const double dlnK_dx = 0.0;  // x-independent curvature

  const std::vector<double>& u = s.a;
  const std::vector<double>& v = s.b;
  for (int j = 0; j < J; ++j) {
    if (!(v[j] - u[j] > opt.gap_min)) {
      std::ostringstream os;
      os << "rhs_uv: gap v - u = " << v[j] - u[j] << " at cell " << j << " below " << opt.gap_min;
      throw DegenerateStateError(os.str());
    }
  }

  const UpwindResult dxu = upwind_dx(u, v, dx, opt);
  const UpwindResult dxv = upwind_dx(v, u, dx, opt);
  const std::vector<double> uxc = centered_dx(u, dx);
  const std::vector<double> vxc = centered_dx(v, dx);
  const std::vector<double> uxx = centered_dxx(u, dx);
  const std::vector<double> vxx = centered_dxx(v, dx);

  RhsResult out;
  out.da.resize(J);
  out.db.resize(J);
  out.flagged = dxu.flagged + dxv.flagged;
  {
    // Monitor derivatives of l, m via the pointwise transform.
    std::vector<double> l(J), m(J);
    for (int j = 0; j < J; ++j) {
      const ScaledState z = from_riemann({u[j], v[j]});
      l[j] = z.l;
      m[j] = z.m;
    }
    out.max_abs_dxl = max_abs(centered_dx(l, dx));
    out.max_abs_dxm = max_abs(centered_dx(m, dx));
  }
  for (int j = 0; j < J; ++j) {
    const double gap = v[j] - u[j];
    // Viscous terms are the exact image of mu dxx(l, m) under the change of
    // variables: mu (u_xx + 2 u_x (u_x - v_x)/(v - u)) and the v analogue.
    const double cross = 2.0 * (uxc[j] - vxc[j]) / gap;
    out.da[j] = -(v[j] / B) * dxu.d[j] - v[j] * (1.0 + u[j] * u[j]) * dlnB +
                0.25 * (u[j] - v[j]) * (dlnK + (u[j] / B) * dlnK_dx) +
                mu * (uxx[j] + uxc[j] * cross);
    out.db[j] = -(u[j] / B) * dxv.d[j] - u[j] * (1.0 + v[j] * v[j]) * dlnB +
                0.25 * (v[j] - u[j]) * (dlnK + (v[j] / B) * dlnK_dx) +
                mu * (vxx[j] + vxc[j] * cross);
  }
  return out;
}

namespace {

RhsResult rhs_dispatch(const FieldState& s, double t, double mu, const MetricSolution& metric,
                       const CurvatureProfile& profile, const SchemeOptions& opt) {
  return s.rep == Representation::kLM ? rhs_lm(s, t, mu, metric, profile, opt)
                                      : rhs_uv(s, t, mu, metric, profile, opt);
}

}  // namespace

FieldState step(const FieldState& s, double t, double dt, double mu, const MetricSolution& metric,
                const CurvatureProfile& profile, const SchemeOptions& opt) {
  const int J = s.size();
  const RhsResult r1 = rhs_dispatch(s, t, mu, metric, profile, opt);
  FieldState mid = s;
  for (int j = 0; j < J; ++j) {
    mid.a[j] = s.a[j] + dt * r1.da[j];
    mid.b[j] = s.b[j] + dt * r1.db[j];
  }
  mid.t = t + dt;
  const RhsResult r2 = rhs_dispatch(mid, t + dt, mu, metric, profile, opt);
  FieldState out = s;
  for (int j = 0; j < J; ++j) {
    out.a[j] = s.a[j] + 0.5 * dt * (r1.da[j] + r2.da[j]);
    out.b[j] = s.b[j] + 0.5 * dt * (r1.db[j] + r2.db[j]);
  }
  out.t = t + dt;
  return out;
}

double cfl_dt(const FieldState& s, double t, double mu, const MetricSolution& metric,
              const SchemeOptions& opt, int J) {
  const double dx = PeriodicGrid{J}.dx();
  const FieldState uv = to_uv_state(s);
  double max_speed = 0.0;
  for (int j = 0; j < J; ++j) {
    max_speed = std::max(max_speed, std::max(std::abs(uv.a[j]), std::abs(uv.b[j])));
  }
  const double B = metric.h(t);
  const double dt_adv = dx * B / std::max(max_speed, 1e-14);
  const double dt_diff = mu > 0.0 ? dx * dx / (2.0 * mu) : std::numeric_limits<double>::infinity();
  double dt = opt.cfl * std::min(dt_adv, dt_diff);
  if (opt.dt_max > 0.0) dt = std::min(dt, opt.dt_max);
  return dt;
}

Trajectory solve(const SolverConfig& config, const MetricSolution& metric,
                 const std::optional<FieldState>& initial) {
  if (!(config.t_end > config.t_begin)) throw DomainError("solve: need t_end > t_begin");
  if (config.t_end > metric.t_max() * (1.0 + 1e-12)) {
    throw DomainError("solve: metric grid does not cover [t_begin, t_end]");
  }
  if (config.snapshots < 2) throw DomainError("solve: need at least 2 snapshots");

  const CurvatureProfile& profile = metric.profile();
  FieldState state;
  if (initial.has_value()) {
    state = *initial;
    if (state.size() != config.J) throw DomainError("solve: initial state size mismatch");
  } else {
    state = generate_rough_data(config.data, config.J, config.t_begin, config.psi0, config.seed,
                                config.data_inset);
  }
  state = config.rep == Representation::kLM ? to_lm_state(state) : to_uv_state(state);
  state.t = config.t_begin;

  Trajectory traj;
  traj.config = config;
  traj.snapshots.reserve(config.snapshots);
  traj.snapshots.push_back(state);

  const double span = config.t_end - config.t_begin;
  int next_snap = 1;
  auto snap_time = [&](int i) {
    return config.t_begin + span * static_cast<double>(i) / static_cast<double>(config.snapshots - 1);
  };

  double t = config.t_begin;
  while (t < config.t_end - 1e-13 * span) {
    double dt = cfl_dt(state, t, config.mu, metric, config.scheme, config.J);
    if (next_snap < config.snapshots) dt = std::min(dt, snap_time(next_snap) - t);
    dt = std::min(dt, config.t_end - t);
    if (!(dt > 1e-15 * span)) {
      throw RefinementError("solve: step size underflow");
    }

    RhsResult r1;
    try {
      r1 = rhs_dispatch(state, t, config.mu, metric, profile, config.scheme);
      FieldState mid = state;
      for (int j = 0; j < config.J; ++j) {
        mid.a[j] = state.a[j] + dt * r1.da[j];
        mid.b[j] = state.b[j] + dt * r1.db[j];
      }
      mid.t = t + dt;
      const RhsResult r2 = rhs_dispatch(mid, t + dt, config.mu, metric, profile, config.scheme);
      for (int j = 0; j < config.J; ++j) {
        state.a[j] += 0.5 * dt * (r1.da[j] + r2.da[j]);
        state.b[j] += 0.5 * dt * (r1.db[j] + r2.db[j]);
      }
    } catch (const DegenerateStateError& e) {
      throw SolverAbort(std::string("solve: hyperbolicity lost at t = ") + std::to_string(t) +
                            ": " + e.what(),
                        state);
    }
    t += dt;
    state.t = t;
    ++traj.steps;

    const double gap = min_gap(state);
    MonitorRecord rec;
    rec.t = t;
    rec.dt = dt;
    rec.min_gap = gap;
    rec.margins = monitor_region(state, t, config.psi0);
    rec.max_abs_dxl = r1.max_abs_dxl;
    rec.max_abs_dxm = r1.max_abs_dxm;
    rec.flagged_cells = r1.flagged;
    {
      const FieldState uv = to_uv_state(state);
      double ms = 0.0;
      for (int j = 0; j < config.J; ++j) {
        ms = std::max(ms, std::max(std::abs(uv.a[j]), std::abs(uv.b[j])));
      }
      rec.max_speed = ms / metric.h(t);
    }
    traj.monitor.push_back(rec);

    if (gap < config.scheme.gap_min) {
      std::ostringstream os;
      os << "solve: hyperbolicity lost at t = " << t << " (min gap " << gap << " < "
         << config.scheme.gap_min << ")";
      throw SolverAbort(os.str(), state);
    }

    if (next_snap < config.snapshots && t >= snap_time(next_snap) - 1e-12 * span) {
      traj.snapshots.push_back(state);
      ++next_snap;
    }
  }
  return traj;
}

}  // namespace gclab
