#pragma once

// The metric coefficient h(t) solving d2h/dt2 = k* h, h(0) = 1, h'(0) = 0,
// together with the quadrature constant C1, the sign-switch scan
// S(t) = dln h + (1/4) dln k*, the comparison function phi, and the
// weak-decay sufficiency tests for log-decay profiles.

#include <vector>

#include "gclab/curvature.hpp"

namespace gclab {

// Sampled solution of the metric ODE on a uniform grid, with the cumulative
// integrals of k* carried along for the two-sided growth bounds
//   int_0^t k* <= h'(t) <= C1,   1 + int int k* <= h(t) <= 1 + C1 t.
class MetricSolution {
 public:
  MetricSolution() = default;
  MetricSolution(double step, std::vector<double> h, std::vector<double> dh,
                 std::vector<double> int_k, std::vector<double> int_int_k, ProfilePtr profile,
                 double richardson_error);

  double t_max() const { return step_ * static_cast<double>(h_.size() - 1); }
  double step() const { return step_; }
  std::size_t size() const { return h_.size(); }
  double node_time(std::size_t i) const { return step_ * static_cast<double>(i); }

  // Cubic Hermite interpolation; h'' = k* h supplies the derivative data.
  double h(double t) const;
  double dh(double t) const;
  double dln_h(double t) const;

  double h_node(std::size_t i) const { return h_[i]; }
  double dh_node(std::size_t i) const { return dh_[i]; }
  double int_k_node(std::size_t i) const { return int_k_[i]; }
  double int_int_k_node(std::size_t i) const { return int_int_k_[i]; }

  double richardson_error() const { return richardson_error_; }
  const CurvatureProfile& profile() const { return *profile_; }
  ProfilePtr profile_ptr() const { return profile_; }

 private:
  std::size_t locate(double t) const;

  double step_ = 0.0;
  std::vector<double> h_, dh_, int_k_, int_int_k_;
  ProfilePtr profile_;
  double richardson_error_ = 0.0;
};

// Classical RK4 with fixed step; integrates at step and step/2 and uses the
// Richardson difference as the error estimate. Throws RefinementError if the
// estimate exceeds `tolerance`.
MetricSolution solve_h(ProfilePtr profile, double t_max, double step, double tolerance = 1e-8);

struct C1Result {
  double int_k = 0.0;       // int_0^inf k*
  double int_sk = 0.0;      // int_0^inf s k*
  double value = 0.0;       // int_k * exp(int_sk)
  double error_bound = 0.0; // propagated quadrature + tail enclosure width
  double t_cut = 0.0;
};

// C1 = int_0^inf k* exp(int_0^inf s k*), quadrature plus analytic tail.
// Throws DivergenceError for non-integrable profiles.
C1Result compute_C1(const CurvatureProfile& profile, double tail_tol = 1e-12);

// S(t) = dln h(t) + (1/4) dln k*(t).
double sign_switch(const MetricSolution& metric, const CurvatureProfile& profile, double t);

// Smallest grid time after which S > 0 on the whole remaining grid.
// Throws NotFoundError when the grid has no positive tail.
double find_T_star(const MetricSolution& metric, const CurvatureProfile& profile);

// phi(t) = b h sqrt(k*) / sqrt(1 - 2 b^2 int_T^t h h' k* ds),
// b = psi0 / (h(T) sqrt(k*(T))); solves
// phi' = phi (1 + phi^2) dln h + (phi/2) dln k*, phi(T) = psi0.
class PhiSolution {
 public:
  PhiSolution(std::vector<double> t, std::vector<double> phi, double T, double psi0);

  double T() const { return T_; }
  double psi0() const { return psi0_; }
  double t_max() const { return t_.back(); }
  double operator()(double t) const;  // linear interpolation on a dense grid
  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& values() const { return phi_; }

 private:
  std::vector<double> t_, phi_;
  double T_, psi0_;
};

// Closed-form solution; throws BlowUpError when the denominator reaches zero
// before t_max, DomainError when k*(T) = 0.
PhiSolution phi_explicit(const MetricSolution& metric, const CurvatureProfile& profile, double T,
                         double psi0, double t_max);

// Direct RK4 integration of the phi equation on the same grid.
PhiSolution phi_ode(const MetricSolution& metric, const CurvatureProfile& profile, double T,
                    double psi0, double t_max);

struct DecayReport {
  double p = 0.0;
  // exp(1 / ((p-1) a^{p-1})) < 2 with a = 1.09 and a = ln 3.
  double value_109 = 0.0;
  double value_ln3 = 0.0;
  bool satisfied_109 = false;
  bool satisfied_ln3 = false;
  // Quadrature check of the chain the sufficiency test shortcuts.
  double int_sk_quadrature = 0.0;
  double int_sk_bound = 0.0;  // (1/(p-1)) (ln 3)^{1-p}
  bool sk_bound_holds = false;
  double int_k = 0.0;
  double c1 = 0.0;
  bool primitive_inequality_holds = false;  // int_k > C1/2
};

DecayReport decay_sufficiency_log(double p);

}  // namespace gclab
