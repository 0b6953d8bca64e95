#pragma once

// Curvature magnitude profiles k*(t) = |K|(t) with their logarithmic
// derivatives and rigorous tail brackets for the improper integrals
// int_T^inf k* ds and int_T^inf s k* ds.

#include <memory>
#include <string>
#include <vector>

namespace gclab {

// Two-sided enclosure of a tail integral; lo == hi when a closed form exists.
struct TailBracket {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

struct TailBrackets {
  bool convergent = false;
  TailBracket k;   // int_T^inf k*(s) ds
  TailBracket sk;  // int_T^inf s k*(s) ds
};

class CurvatureProfile {
 public:
  virtual ~CurvatureProfile() = default;

  virtual double k(double t) const = 0;
  virtual double dlnk(double t) const = 0;  // d/dt ln k*(t)
  virtual TailBrackets tails(double T) const = 0;
  virtual std::string describe() const = 0;
};

using ProfilePtr = std::shared_ptr<const CurvatureProfile>;

// k*(t) = C / (1 + |t|)^{2 + delta/2}, C > 0, delta in (0, 4).
class HongPowerProfile final : public CurvatureProfile {
 public:
  HongPowerProfile(double C, double delta);

  double k(double t) const override;
  double dlnk(double t) const override;
  TailBrackets tails(double T) const override;
  std::string describe() const override;

  double amplitude() const { return c_; }
  double delta() const { return delta_; }

 private:
  double c_;
  double delta_;
  double exponent_;  // 2 + delta/2
};

// k*(t) = 1 / ((3 + t)^2 (ln(3 + t))^p), p > 1.
class LogDecayProfile final : public CurvatureProfile {
 public:
  explicit LogDecayProfile(double p);

  double k(double t) const override;
  double dlnk(double t) const override;
  TailBrackets tails(double T) const override;
  std::string describe() const override;

  double p() const { return p_; }

 private:
  double p_;
};

// k* == value >= 0. Test profile; tails diverge unless value == 0.
class ConstantProfile final : public CurvatureProfile {
 public:
  explicit ConstantProfile(double value);

  double k(double) const override { return value_; }
  double dlnk(double) const override { return 0.0; }
  TailBrackets tails(double T) const override;
  std::string describe() const override;

 private:
  double value_;
};

// Samples (t_i, k_i) on [0, t_last], log-linear interpolation in between,
// power-law tail k ~ k_last ((1+t)/(1+t_last))^{-a} fitted to the final two
// samples beyond t_last. Tails require a > 2.
class TabulatedProfile final : public CurvatureProfile {
 public:
  TabulatedProfile(std::vector<double> t, std::vector<double> k);

  double k(double t) const override;
  double dlnk(double t) const override;
  TailBrackets tails(double T) const override;
  std::string describe() const override;

  double tail_exponent() const { return tail_a_; }

 private:
  std::vector<double> t_;
  std::vector<double> lnk_;
  double tail_a_;
};

ProfilePtr make_hong_power(double C, double delta);
ProfilePtr make_log_decay(double p);
ProfilePtr make_constant(double value);
ProfilePtr make_tabulated(std::vector<double> t, std::vector<double> k);

}  // namespace gclab
