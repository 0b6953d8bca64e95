#include "gclab/metric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "gclab/errors.hpp"
#include "gclab/quadrature.hpp"

namespace gclab {

namespace {

// State carried by the integrator: h, h', int k*, int int k*.
using State4 = std::array<double, 4>;

State4 rhs(const CurvatureProfile& profile, double t, const State4& y) {
  const double k = profile.k(t);
  return {y[1], k * y[0], k, y[2]};
}

State4 axpy(const State4& y, double a, const State4& d) {
  return {y[0] + a * d[0], y[1] + a * d[1], y[2] + a * d[2], y[3] + a * d[3]};
}

State4 rk4_step(const CurvatureProfile& profile, double t, double dt, const State4& y) {
  const State4 k1 = rhs(profile, t, y);
  const State4 k2 = rhs(profile, t + 0.5 * dt, axpy(y, 0.5 * dt, k1));
  const State4 k3 = rhs(profile, t + 0.5 * dt, axpy(y, 0.5 * dt, k2));
  const State4 k4 = rhs(profile, t + dt, axpy(y, dt, k3));
  State4 out = y;
  for (int i = 0; i < 4; ++i) {
    out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

struct RunResult {
  std::vector<double> h, dh, ik, iik;
};

RunResult run_grid(const CurvatureProfile& profile, std::size_t n_steps, double dt,
                   std::size_t keep_every) {
  RunResult out;
  const std::size_t n_keep = n_steps / keep_every + 1;
  out.h.reserve(n_keep);
  out.dh.reserve(n_keep);
  out.ik.reserve(n_keep);
  out.iik.reserve(n_keep);
  State4 y = {1.0, 0.0, 0.0, 0.0};
  out.h.push_back(y[0]);
  out.dh.push_back(y[1]);
  out.ik.push_back(y[2]);
  out.iik.push_back(y[3]);
  for (std::size_t i = 0; i < n_steps; ++i) {
    y = rk4_step(profile, static_cast<double>(i) * dt, dt, y);
    if ((i + 1) % keep_every == 0) {
      out.h.push_back(y[0]);
      out.dh.push_back(y[1]);
      out.ik.push_back(y[2]);
      out.iik.push_back(y[3]);
    }
  }
  return out;
}

}  // namespace

MetricSolution::MetricSolution(double step, std::vector<double> h, std::vector<double> dh,
                               std::vector<double> int_k, std::vector<double> int_int_k,
                               ProfilePtr profile, double richardson_error)
    : step_(step),
      h_(std::move(h)),
      dh_(std::move(dh)),
      int_k_(std::move(int_k)),
      int_int_k_(std::move(int_int_k)),
      profile_(std::move(profile)),
      richardson_error_(richardson_error) {}

std::size_t MetricSolution::locate(double t) const {
  if (t < 0.0 || t > t_max() * (1.0 + 1e-12) + 1e-300) {
    std::ostringstream os;
    os << "MetricSolution: t = " << t << " outside [0, " << t_max() << "]";
    throw DomainError(os.str());
  }
  const double s = std::min(t / step_, static_cast<double>(h_.size() - 2));
  return static_cast<std::size_t>(std::max(0.0, s));
}

double MetricSolution::h(double t) const {
  const std::size_t i = locate(t);
  const double w = (t - node_time(i)) / step_;
  // Hermite basis on [0,1] with endpoint values and derivatives.
  const double w2 = w * w, w3 = w2 * w;
  const double h00 = 2 * w3 - 3 * w2 + 1, h10 = w3 - 2 * w2 + w;
  const double h01 = -2 * w3 + 3 * w2, h11 = w3 - w2;
  return h00 * h_[i] + h10 * step_ * dh_[i] + h01 * h_[i + 1] + h11 * step_ * dh_[i + 1];
}

double MetricSolution::dh(double t) const {
  const std::size_t i = locate(t);
  const double w = (t - node_time(i)) / step_;
  const double w2 = w * w, w3 = w2 * w;
  const double h00 = 2 * w3 - 3 * w2 + 1, h10 = w3 - 2 * w2 + w;
  const double h01 = -2 * w3 + 3 * w2, h11 = w3 - w2;
  // h''(t) = k*(t) h(t) supplies the slope of h'.
  const double ddh_i = profile_->k(node_time(i)) * h_[i];
  const double ddh_ip = profile_->k(node_time(i + 1)) * h_[i + 1];
  return h00 * dh_[i] + h10 * step_ * ddh_i + h01 * dh_[i + 1] + h11 * step_ * ddh_ip;
}

double MetricSolution::dln_h(double t) const { return dh(t) / h(t); }

MetricSolution solve_h(ProfilePtr profile, double t_max, double step, double tolerance) {
  if (!(t_max > 0.0) || !(step > 0.0)) {
    throw DomainError("solve_h: t_max and step must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(std::ceil(t_max / step - 1e-12));
  const double dt = t_max / static_cast<double>(n);

  const RunResult coarse = run_grid(*profile, n, dt, 1);
  const RunResult fine = run_grid(*profile, 2 * n, 0.5 * dt, 2);

  // Richardson difference, relative to the solution scale (h grows linearly
  // in t, so an absolute metric would force ever-smaller steps on long runs).
  double err = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    err = std::max(err, std::abs(coarse.h[i] - fine.h[i]) / std::max(1.0, std::abs(fine.h[i])));
    err = std::max(err, std::abs(coarse.dh[i] - fine.dh[i]) / std::max(1.0, std::abs(fine.dh[i])));
  }
  err /= 15.0;  // 4th-order factor
  if (err > tolerance) {
    std::ostringstream os;
    os << "solve_h: step " << dt << " gives error estimate " << err << " > tolerance "
       << tolerance;
    throw RefinementError(os.str());
  }
  return MetricSolution(dt, fine.h, fine.dh, fine.ik, fine.iik, std::move(profile), err);
}

C1Result compute_C1(const CurvatureProfile& profile, double tail_tol) {
  C1Result out;
  // Push the cut until the tail enclosure is tight enough.
  double t_cut = 64.0;
  TailBrackets tb = profile.tails(t_cut);
  if (!tb.convergent) {
    throw DivergenceError("compute_C1: profile is not integrable: " + profile.describe());
  }
  while ((tb.k.width() > tail_tol || tb.sk.width() > tail_tol) && t_cut < 1e12) {
    t_cut *= 4.0;
    tb = profile.tails(t_cut);
  }
  if (tb.k.width() > tail_tol || tb.sk.width() > tail_tol) {
    throw DivergenceError("compute_C1: tail enclosure does not tighten: " + profile.describe());
  }

  const QuadResult qk =
      integrate_adaptive([&](double s) { return profile.k(s); }, 0.0, t_cut, 1e-13);
  const QuadResult qsk =
      integrate_adaptive([&](double s) { return s * profile.k(s); }, 0.0, t_cut, 1e-13);

  out.t_cut = t_cut;
  out.int_k = qk.value + 0.5 * (tb.k.lo + tb.k.hi);
  out.int_sk = qsk.value + 0.5 * (tb.sk.lo + tb.sk.hi);
  out.value = out.int_k * std::exp(out.int_sk);
  const double ek = qk.error + 0.5 * tb.k.width();
  const double esk = qsk.error + 0.5 * tb.sk.width();
  // d(C1) = e^I2 dI1 + C1 dI2
  out.error_bound = std::exp(out.int_sk) * ek + out.value * esk;
  return out;
}

double sign_switch(const MetricSolution& metric, const CurvatureProfile& profile, double t) {
  return metric.dln_h(t) + 0.25 * profile.dlnk(t);
}

double find_T_star(const MetricSolution& metric, const CurvatureProfile& profile) {
  const std::size_t n = metric.size();
  std::size_t last_bad = n;  // sentinel: none found yet
  for (std::size_t i = 0; i < n; ++i) {
    const double t = metric.node_time(i);
    if (metric.dh_node(i) / metric.h_node(i) + 0.25 * profile.dlnk(t) <= 0.0) {
      last_bad = i;
    }
  }
  if (last_bad == n) return metric.node_time(0);
  if (last_bad == n - 1) {
    throw NotFoundError("find_T_star: no sign switch detected within grid (extend t_max)");
  }
  return metric.node_time(last_bad + 1);
}

PhiSolution::PhiSolution(std::vector<double> t, std::vector<double> phi, double T, double psi0)
    : t_(std::move(t)), phi_(std::move(phi)), T_(T), psi0_(psi0) {}

double PhiSolution::operator()(double t) const {
  if (t < T_ - 1e-12 || t > t_.back() + 1e-12) {
    throw DomainError("PhiSolution: t outside [T, t_max]");
  }
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - t_.begin());
  if (i == 0) return phi_.front();
  if (i >= t_.size()) return phi_.back();
  const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
  return (1.0 - w) * phi_[i - 1] + w * phi_[i];
}

PhiSolution phi_explicit(const MetricSolution& metric, const CurvatureProfile& profile, double T,
                         double psi0, double t_max) {
  if (!(psi0 > 0.0)) throw DomainError("phi_explicit: psi0 must be positive");
  if (T < 0.0 || t_max > metric.t_max() || T >= t_max) {
    throw DomainError("phi_explicit: [T, t_max] must lie inside the metric grid");
  }
  const double kT = profile.k(T);
  if (!(kT > 0.0)) throw DomainError("phi_explicit: k*(T) = 0, coefficient b undefined");
  const double b = psi0 / (metric.h(T) * std::sqrt(kT));

  // Dense grid; Simpson accumulation of int_T^t h h' k* ds per step.
  const double dt = std::min(metric.step(), (t_max - T) / 64.0);
  const std::size_t n = static_cast<std::size_t>(std::ceil((t_max - T) / dt - 1e-12));
  const double dts = (t_max - T) / static_cast<double>(n);
  auto integrand = [&](double s) { return metric.h(s) * metric.dh(s) * profile.k(s); };

  std::vector<double> times, values;
  times.reserve(n + 1);
  values.reserve(n + 1);
  times.push_back(T);
  values.push_back(psi0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = T + static_cast<double>(i) * dts;
    const double bb = a + dts;
    acc += dts / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + bb)) + integrand(bb));
    const double denom = 1.0 - 2.0 * b * b * acc;
    if (!(denom > 0.0)) {
      std::ostringstream os;
      os << "phi_explicit: denominator reached " << denom << " at t = " << bb
         << " (profile/psi0 inadmissible)";
      throw BlowUpError(os.str());
    }
    times.push_back(bb);
    values.push_back(b * metric.h(bb) * std::sqrt(profile.k(bb)) / std::sqrt(denom));
  }
  return PhiSolution(std::move(times), std::move(values), T, psi0);
}

PhiSolution phi_ode(const MetricSolution& metric, const CurvatureProfile& profile, double T,
                    double psi0, double t_max) {
  if (!(psi0 > 0.0)) throw DomainError("phi_ode: psi0 must be positive");
  if (T < 0.0 || t_max > metric.t_max() || T >= t_max) {
    throw DomainError("phi_ode: [T, t_max] must lie inside the metric grid");
  }
  if (!(profile.k(T) > 0.0)) throw DomainError("phi_ode: k*(T) = 0");
  const double dt = std::min(metric.step(), (t_max - T) / 64.0);
  const std::size_t n = static_cast<std::size_t>(std::ceil((t_max - T) / dt - 1e-12));
  const double dts = (t_max - T) / static_cast<double>(n);

  auto f = [&](double t, double phi) {
    return phi * (1.0 + phi * phi) * metric.dln_h(t) + 0.5 * phi * profile.dlnk(t);
  };

  std::vector<double> times, values;
  times.reserve(n + 1);
  values.reserve(n + 1);
  times.push_back(T);
  values.push_back(psi0);
  double phi = psi0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = T + static_cast<double>(i) * dts;
    const double k1 = f(t, phi);
    const double k2 = f(t + 0.5 * dts, phi + 0.5 * dts * k1);
    const double k3 = f(t + 0.5 * dts, phi + 0.5 * dts * k2);
    const double k4 = f(t + dts, phi + dts * k3);
    phi += dts / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(phi)) {
      std::ostringstream os;
      os << "phi_ode: solution blew up at t = " << t + dts;
      throw BlowUpError(os.str());
    }
    times.push_back(t + dts);
    values.push_back(phi);
  }
  return PhiSolution(std::move(times), std::move(values), T, psi0);
}

DecayReport decay_sufficiency_log(double p) {
  if (!(p > 1.0)) throw DomainError("decay_sufficiency_log: p must exceed 1");
  DecayReport rep;
  rep.p = p;
  const double ln3 = std::log(3.0);
  rep.value_109 = std::exp(1.0 / ((p - 1.0) * std::pow(1.09, p - 1.0)));
  rep.value_ln3 = std::exp(1.0 / ((p - 1.0) * std::pow(ln3, p - 1.0)));
  rep.satisfied_109 = rep.value_109 < 2.0;
  rep.satisfied_ln3 = rep.value_ln3 < 2.0;

  const LogDecayProfile profile(p);
  const C1Result c1 = compute_C1(profile);
  rep.int_sk_quadrature = c1.int_sk;
  rep.int_sk_bound = std::pow(ln3, 1.0 - p) / (p - 1.0);
  rep.sk_bound_holds = c1.int_sk <= rep.int_sk_bound + 1e-10;
  rep.int_k = c1.int_k;
  rep.c1 = c1.value;
  rep.primitive_inequality_holds = c1.int_k > 0.5 * c1.value;
  return rep;
}

}  // namespace gclab
