#include "gclab/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gclab/errors.hpp"

namespace gclab {

namespace {

// int_T^inf (1+s)^{-a} ds and int_T^inf s (1+s)^{-a} ds, a > 2, closed forms.
double power_tail_k(double T, double a) { return std::pow(1.0 + T, 1.0 - a) / (a - 1.0); }

double power_tail_sk(double T, double a) {
  const double w = 1.0 + T;
  return std::pow(w, 2.0 - a) / (a - 2.0) - std::pow(w, 1.0 - a) / (a - 1.0);
}

}  // namespace

HongPowerProfile::HongPowerProfile(double C, double delta)
    : c_(C), delta_(delta), exponent_(2.0 + delta / 2.0) {
  if (!(C > 0.0)) throw DomainError("HongPowerProfile: C must be positive");
  if (!(delta > 0.0 && delta < 4.0)) {
    throw DomainError("HongPowerProfile: delta must lie in (0, 4)");
  }
}

double HongPowerProfile::k(double t) const {
  return c_ / std::pow(1.0 + std::abs(t), exponent_);
}

double HongPowerProfile::dlnk(double t) const { return -exponent_ / (1.0 + t); }

TailBrackets HongPowerProfile::tails(double T) const {
  TailBrackets out;
  out.convergent = true;  // exponent_ > 2 always
  const double tk = c_ * power_tail_k(T, exponent_);
  const double tsk = c_ * power_tail_sk(T, exponent_);
  out.k = {tk, tk};
  out.sk = {tsk, tsk};
  return out;
}

std::string HongPowerProfile::describe() const {
  std::ostringstream os;
  os << "hong_power(C=" << c_ << ", delta=" << delta_ << ")";
  return os.str();
}

LogDecayProfile::LogDecayProfile(double p) : p_(p) {
  if (!(p > 1.0)) throw DomainError("LogDecayProfile: p must exceed 1");
}

double LogDecayProfile::k(double t) const {
  const double w = 3.0 + t;
  return 1.0 / (w * w * std::pow(std::log(w), p_));
}

double LogDecayProfile::dlnk(double t) const {
  const double w = 3.0 + t;
  return -2.0 / w - p_ / (w * std::log(w));
}

TailBrackets LogDecayProfile::tails(double T) const {
  // Integration by parts gives
  //   int_T^inf k* = U - p int_T^inf (3+s)^{-2} (ln(3+s))^{-p-1} ds,
  //   U = (3+T)^{-1} (ln(3+T))^{-p},
  // and the correction term lies in [0, (p/ln(3+T)) int_T^inf k*], so
  //   U / (1 + p/ln(3+T)) <= int_T^inf k* <= U.
  TailBrackets out;
  out.convergent = true;
  const double w = 3.0 + T;
  const double L = std::log(w);
  const double U = 1.0 / (w * std::pow(L, p_));
  out.k = {U / (1.0 + p_ / L), U};
  // s/(3+s)^2 = 1/(3+s) - 3/(3+s)^2, and the first part integrates exactly:
  //   int_T^inf ds / ((3+s)(ln(3+s))^p) = (ln(3+T))^{1-p} / (p-1).
  const double exact = std::pow(L, 1.0 - p_) / (p_ - 1.0);
  out.sk = {exact - 3.0 * out.k.hi, exact - 3.0 * out.k.lo};
  return out;
}

std::string LogDecayProfile::describe() const {
  std::ostringstream os;
  os << "log_decay(p=" << p_ << ")";
  return os.str();
}

ConstantProfile::ConstantProfile(double value) : value_(value) {
  if (value < 0.0) throw DomainError("ConstantProfile: value must be nonnegative");
}

TailBrackets ConstantProfile::tails(double) const {
  TailBrackets out;
  out.convergent = (value_ == 0.0);
  return out;
}

std::string ConstantProfile::describe() const {
  std::ostringstream os;
  os << "constant(" << value_ << ")";
  return os.str();
}

TabulatedProfile::TabulatedProfile(std::vector<double> t, std::vector<double> k) : t_(std::move(t)) {
  if (t_.size() < 2 || t_.size() != k.size()) {
    throw DomainError("TabulatedProfile: need matching sample arrays of length >= 2");
  }
  if (t_.front() != 0.0) throw DomainError("TabulatedProfile: samples must start at t = 0");
  lnk_.reserve(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i > 0 && !(t_[i] > t_[i - 1])) {
      throw DomainError("TabulatedProfile: sample times must be strictly increasing");
    }
    if (!(k[i] > 0.0)) throw DomainError("TabulatedProfile: samples must be positive");
    lnk_.push_back(std::log(k[i]));
  }
  const std::size_t n = t_.size();
  // Fit k ~ (1+t)^{-a} through the last two samples.
  tail_a_ = -(lnk_[n - 1] - lnk_[n - 2]) /
            (std::log(1.0 + t_[n - 1]) - std::log(1.0 + t_[n - 2]));
}

double TabulatedProfile::k(double t) const {
  if (t <= t_.front()) return std::exp(lnk_.front());
  if (t >= t_.back()) {
    return std::exp(lnk_.back()) *
           std::pow((1.0 + t) / (1.0 + t_.back()), -tail_a_);
  }
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
  return std::exp((1.0 - w) * lnk_[i] + w * lnk_[i + 1]);
}

double TabulatedProfile::dlnk(double t) const {
  if (t >= t_.back()) return -tail_a_ / (1.0 + t);
  if (t <= t_.front()) {
    return (lnk_[1] - lnk_[0]) / (t_[1] - t_[0]);
  }
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  return (lnk_[i + 1] - lnk_[i]) / (t_[i + 1] - t_[i]);
}

TailBrackets TabulatedProfile::tails(double T) const {
  TailBrackets out;
  if (!(tail_a_ > 2.0)) return out;  // not convergent
  out.convergent = true;
  const double Teff = std::max(T, t_.back());
  const double scale = k(Teff) * std::pow(1.0 + Teff, tail_a_);
  double tk = scale * power_tail_k(Teff, tail_a_);
  double tsk = scale * power_tail_sk(Teff, tail_a_);
  if (Teff > T) {
    // The caller integrates numerically up to T only; fold [T, t_last] into
    // the bracket with a crude enclosure from the sample extrema.
    double klo = k(T), khi = k(T);
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (t_[i] >= T) {
        klo = std::min(klo, std::exp(lnk_[i]));
        khi = std::max(khi, std::exp(lnk_[i]));
      }
    }
    const double span = Teff - T;
    out.k = {tk + klo * span, tk + khi * span};
    out.sk = {tsk + klo * span * T, tsk + khi * span * Teff};
    return out;
  }
  out.k = {tk, tk};
  out.sk = {tsk, tsk};
  return out;
}

std::string TabulatedProfile::describe() const {
  std::ostringstream os;
  os << "tabulated(" << t_.size() << " samples, tail exponent " << tail_a_ << ")";
  return os.str();
}

ProfilePtr make_hong_power(double C, double delta) {
  return std::make_shared<HongPowerProfile>(C, delta);
}

ProfilePtr make_log_decay(double p) { return std::make_shared<LogDecayProfile>(p); }

ProfilePtr make_constant(double value) { return std::make_shared<ConstantProfile>(value); }

ProfilePtr make_tabulated(std::vector<double> t, std::vector<double> k) {
  return std::make_shared<TabulatedProfile>(std::move(t), std::move(k));
}

}  // namespace gclab
