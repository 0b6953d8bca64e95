#include "gclab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "gclab/errors.hpp"

namespace gclab {

namespace {

double bump(double r) {
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

double dbump(double r) {
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double den = 1.0 - r2;
  return std::exp(-1.0 / den) * (-2.0 * r / (den * den));
}

int wrap(int j, int J) { return (j % J + J) % J; }

// Simpson weights over the snapshot grid (uniform, odd count preferred; a
// trapezoid patch covers the final interval when the count is even).
std::vector<double> time_weights(const std::vector<double>& t) {
  const std::size_t n = t.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  const double dt = t[1] - t[0];
  const std::size_t m = (n % 2 == 1) ? n : n - 1;
  for (std::size_t i = 0; i + 2 < m + 1; i += 2) {
    w[i] += dt / 3.0;
    w[i + 1] += 4.0 * dt / 3.0;
    w[i + 2] += dt / 3.0;
  }
  if (n % 2 == 0) {
    w[n - 2] += 0.5 * dt;
    w[n - 1] += 0.5 * dt;
  }
  return w;
}

struct LmnArrays {
  std::vector<double> l, m, n;
};

LmnArrays lmn_of(const FieldState& s) {
  const FieldState lm = to_lm_state(s);
  LmnArrays out;
  const int J = lm.size();
  out.l.resize(J);
  out.m.resize(J);
  out.n.resize(J);
  for (int j = 0; j < J; ++j) {
    out.l[j] = lm.a[j];
    out.m[j] = lm.b[j];
    out.n[j] = closure_n(lm.a[j], lm.b[j]);
  }
  return out;
}

}  // namespace

double BumpTestFunction::value(double x, double t) const {
  return bump((x - xc) / wx) * bump((t - tc) / wt);
}

double BumpTestFunction::dx(double x, double t) const {
  return dbump((x - xc) / wx) / wx * bump((t - tc) / wt);
}

double BumpTestFunction::dt(double x, double t) const {
  return bump((x - xc) / wx) * dbump((t - tc) / wt) / wt;
}

std::vector<BumpTestFunction> make_test_bank(const Window& window) {
  // Version 1: six tensor bumps on a 3x2 lattice of centers plus one wide and
  // one narrow probe, all supported strictly inside the window.
  const double xspan = window.x1 - window.x0;
  const double tspan = window.t1 - window.t0;
  std::vector<BumpTestFunction> bank;
  bank.reserve(8);
  for (double fx : {0.28, 0.5, 0.72}) {
    for (double ft : {0.40, 0.70}) {
      bank.push_back({window.x0 + fx * xspan, 0.24 * xspan, window.t0 + ft * tspan, 0.28 * tspan});
    }
  }
  bank.push_back({window.x0 + 0.5 * xspan, 0.35 * xspan, window.t0 + 0.5 * tspan, 0.45 * tspan});
  bank.push_back({window.x0 + 0.42 * xspan, 0.15 * xspan, window.t0 + 0.55 * tspan, 0.20 * tspan});
  return bank;
}

DissipationSeries dissipation_norm(const Trajectory& traj, double mu, const Window& window) {
  DissipationSeries out;
  const int J = traj.config.J;
  const double dx = PeriodicGrid{J}.dx();
  std::vector<double> sel_t;
  std::vector<double> norm2_l, norm2_m;
  for (const FieldState& s : traj.snapshots) {
    if (!window.contains_t(s.t)) continue;
    const LmnArrays f = lmn_of(s);
    double nl = 0.0, nm = 0.0;
    for (int j = 0; j < J; ++j) {
      const double x = PeriodicGrid{J}.x(j);
      if (x < window.x0 || x > window.x1) continue;
      const double dl = (f.l[wrap(j + 1, J)] - f.l[wrap(j - 1, J)]) / (2.0 * dx);
      const double dm = (f.m[wrap(j + 1, J)] - f.m[wrap(j - 1, J)]) / (2.0 * dx);
      nl += dl * dl * dx;
      nm += dm * dm * dx;
    }
    sel_t.push_back(s.t);
    norm2_l.push_back(nl);
    norm2_m.push_back(nm);
    out.sqrt_mu_dxl.push_back(std::sqrt(mu * nl));
    out.sqrt_mu_dxm.push_back(std::sqrt(mu * nm));
  }
  out.t = sel_t;
  const std::vector<double> w = time_weights(sel_t);
  double acc_l = 0.0, acc_m = 0.0;
  for (std::size_t i = 0; i < sel_t.size(); ++i) {
    acc_l += w[i] * norm2_l[i];
    acc_m += w[i] * norm2_m[i];
  }
  out.space_time_l = std::sqrt(mu * acc_l);
  out.space_time_m = std::sqrt(mu * acc_m);
  return out;
}

std::vector<WeakResidual> weak_residual(const Trajectory& traj, const MetricSolution& metric,
                                        const std::vector<BumpTestFunction>& bank) {
  const int J = traj.config.J;
  const double dx = PeriodicGrid{J}.dx();
  const CurvatureProfile& profile = metric.profile();

  std::vector<double> times;
  for (const FieldState& s : traj.snapshots) times.push_back(s.t);

  // A test function must be either fully inside the sampled time span or
  // fully outside it; a truncated bump loses its boundary terms and the
  // integral stops being a residual.
  for (const BumpTestFunction& chi : bank) {
    const double lo = chi.tc - chi.wt, hi = chi.tc + chi.wt;
    const bool inside = lo >= times.front() - 1e-12 && hi <= times.back() + 1e-12;
    const bool outside = hi <= times.front() || lo >= times.back();
    if (!inside && !outside) {
      throw DomainError("weak_residual: test function support straddles the trajectory window");
    }
  }
  const std::vector<double> tw = time_weights(times);

  std::vector<WeakResidual> out(bank.size());
  for (std::size_t b = 0; b < bank.size(); ++b) out[b].chi_id = static_cast<int>(b);

  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const FieldState& s = traj.snapshots[i];
    const LmnArrays f = lmn_of(s);
    const double h = metric.h(s.t);
    const double dlnB = metric.dln_h(s.t);
    const double dlnK = profile.dlnk(s.t);
    for (std::size_t b = 0; b < bank.size(); ++b) {
      double acc_l = 0.0, acc_m = 0.0;
      for (int j = 0; j < J; ++j) {
        const double x = PeriodicGrid{J}.x(j);
        const double chi = bank[b].value(x, s.t);
        // Cell-edge difference quotient: sums of chix telescope to exactly
        // zero over the period, so x-constant solutions are annihilated.
        const double chix =
            (bank[b].value(x + 0.5 * dx, s.t) - bank[b].value(x - 0.5 * dx, s.t)) / dx;
        const double chit = bank[b].dt(x, s.t);
        if (chi == 0.0 && chix == 0.0 && chit == 0.0) continue;
        const double sl = -(f.l[j] - f.n[j]) * dlnB - 0.5 * f.l[j] * dlnK;
        const double sm = -2.0 * f.m[j] * dlnB - 0.5 * f.m[j] * dlnK;
        acc_l += f.l[j] * chit - (f.m[j] / h) * chix + sl * chi;
        acc_m += f.m[j] * chit - (f.n[j] / h) * chix + sm * chi;
      }
      out[b].law_l += tw[i] * acc_l * dx;
      out[b].law_m += tw[i] * acc_m * dx;
    }
  }
  for (WeakResidual& r : out) {
    r.law_l = std::abs(r.law_l);
    r.law_m = std::abs(r.law_m);
  }
  return out;
}

double l1_distance(const Trajectory& a, const Trajectory& b, const Window& window) {
  if (a.snapshots.size() != b.snapshots.size() || a.config.J != b.config.J) {
    throw DomainError("l1_distance: trajectories not on a common grid");
  }
  const int J = a.config.J;
  const double dx = PeriodicGrid{J}.dx();
  std::vector<double> times, vals;
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    const FieldState& sa = a.snapshots[i];
    const FieldState& sb = b.snapshots[i];
    if (std::abs(sa.t - sb.t) > 1e-10) throw DomainError("l1_distance: snapshot times differ");
    if (!window.contains_t(sa.t)) continue;
    const LmnArrays fa = lmn_of(sa);
    const LmnArrays fb = lmn_of(sb);
    double acc = 0.0;
    for (int j = 0; j < J; ++j) {
      const double x = PeriodicGrid{J}.x(j);
      if (x < window.x0 || x > window.x1) continue;
      acc += std::abs(fa.l[j] - fb.l[j]) + std::abs(fa.m[j] - fb.m[j]) +
             std::abs(fa.n[j] - fb.n[j]);
    }
    times.push_back(sa.t);
    vals.push_back(acc * dx);
  }
  const std::vector<double> w = time_weights(times);
  double out = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) out += w[i] * vals[i];
  return out;
}

SweepReport mu_sweep(const SolverConfig& base, const MetricSolution& metric,
                     const std::vector<double>& mus, const std::optional<Window>& window,
                     int jobs) {
  if (mus.empty()) throw DomainError("mu_sweep: empty mu list");
  for (std::size_t i = 1; i < mus.size(); ++i) {
    if (!(mus[i] < mus[i - 1])) throw DomainError("mu_sweep: mu list must decrease");
  }

  SweepReport rep;
  rep.mus = mus;
  const double span = base.t_end - base.t_begin;
  rep.window = window.value_or(
      Window{base.t_begin + 0.15 * span, base.t_end, 0.0, kTwoPi});

  // Same data for every run.
  const FieldState data = generate_rough_data(base.data, base.J, base.t_begin, base.psi0,
                                              base.seed, base.data_inset);

  std::vector<Trajectory> trajs(mus.size());
  std::vector<SweepEntry> entries(mus.size());

  const int n_jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  std::size_t next = 0;
  std::mutex mtx;
  auto worker = [&]() {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mtx);
        if (next >= mus.size()) return;
        i = next++;
      }
      SolverConfig cfg = base;
      cfg.mu = mus[i];
      SweepEntry& e = entries[i];
      e.mu = mus[i];
      try {
        trajs[i] = solve(cfg, metric, data);
        e.completed = true;
      } catch (const std::exception& ex) {
        e.completed = false;
        e.failure = ex.what();
      }
    }
  };
  for (int k = 0; k < n_jobs; ++k) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  const std::vector<BumpTestFunction> bank = make_test_bank(rep.window);
  for (std::size_t i = 0; i < mus.size(); ++i) {
    SweepEntry& e = entries[i];
    if (!e.completed) continue;
    const Trajectory& tr = trajs[i];
    double mg = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    for (const MonitorRecord& r : tr.monitor) {
      mg = std::min(mg, r.margins.min());
      gap = std::min(gap, r.min_gap);
    }
    e.min_margin = mg;
    e.min_gap = gap;
    double linf = 0.0;
    for (const FieldState& s : tr.snapshots) {
      if (!rep.window.contains_t(s.t)) continue;
      const LmnArrays f = lmn_of(s);
      for (int j = 0; j < tr.config.J; ++j) {
        linf = std::max({linf, std::abs(f.l[j]), std::abs(f.m[j]), std::abs(f.n[j])});
      }
    }
    e.linf_lmn = linf;
    e.dissipation = dissipation_norm(tr, mus[i], rep.window);
    e.residuals = weak_residual(tr, metric, bank);
  }

  for (std::size_t i = 0; i + 1 < mus.size(); ++i) {
    if (entries[i].completed && entries[i + 1].completed) {
      rep.consecutive_l1.push_back(l1_distance(trajs[i], trajs[i + 1], rep.window));
    }
  }

  double sup_l = 0.0, linf = 0.0;
  std::vector<double> lx, ly;
  for (const SweepEntry& e : entries) {
    if (!e.completed) continue;
    sup_l = std::max(sup_l, e.dissipation.space_time_l);
    linf = std::max(linf, e.linf_lmn);
    if (e.dissipation.space_time_l > 0.0) {
      lx.push_back(std::log(e.mu));
      ly.push_back(std::log(e.dissipation.space_time_l));
    }
  }
  rep.sup_dissipation_l = sup_l;
  rep.uniform_linf = linf;
  if (lx.size() >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double nn = static_cast<double>(lx.size());
    rep.dissipation_slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  }

  // Gauss residual of the finest completed run (exact up to round-off: the
  // closure builds n from l, m).
  for (std::size_t i = mus.size(); i-- > 0;) {
    if (!entries[i].completed) continue;
    double res = 0.0;
    const FieldState lm = to_lm_state(trajs[i].final_state());
    for (int j = 0; j < trajs[i].config.J; ++j) {
      const double n = closure_n(lm.a[j], lm.b[j]);
      res = std::max(res, std::abs(lm.a[j] * n - lm.b[j] * lm.b[j] + 1.0));
    }
    rep.finest_gauss_residual = res;
    break;
  }

  rep.entries = std::move(entries);
  return rep;
}

}  // namespace gclab
