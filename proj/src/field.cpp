#include "gclab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gclab/errors.hpp"

namespace gclab {

FieldState to_uv_state(const FieldState& s) {
  if (s.rep == Representation::kUV) return s;
  FieldState out;
  out.rep = Representation::kUV;
  out.t = s.t;
  out.a.resize(s.a.size());
  out.b.resize(s.b.size());
  for (std::size_t j = 0; j < s.a.size(); ++j) {
    const RiemannState r = to_riemann(s.a[j], s.b[j]);
    out.a[j] = r.u;
    out.b[j] = r.v;
  }
  return out;
}

FieldState to_lm_state(const FieldState& s) {
  if (s.rep == Representation::kLM) return s;
  FieldState out;
  out.rep = Representation::kLM;
  out.t = s.t;
  out.a.resize(s.a.size());
  out.b.resize(s.b.size());
  for (std::size_t j = 0; j < s.a.size(); ++j) {
    const ScaledState z = from_riemann({s.a[j], s.b[j]});
    out.a[j] = z.l;
    out.b[j] = z.m;
  }
  return out;
}

std::vector<double> closure_n_of(const FieldState& s) {
  std::vector<double> n(s.a.size());
  if (s.rep == Representation::kLM) {
    for (std::size_t j = 0; j < s.a.size(); ++j) n[j] = closure_n(s.a[j], s.b[j]);
  } else {
    for (std::size_t j = 0; j < s.a.size(); ++j) {
      n[j] = from_riemann({s.a[j], s.b[j]}).n;
    }
  }
  return n;
}

double RegionMargins::min() const {
  return std::min(std::min(u_lower, u_upper), std::min(v_lower, v_upper));
}

RegionMargins monitor_region(const FieldState& state, double t, double psi0) {
  const FieldState uv = to_uv_state(state);
  const double inner = std::exp(-t) * psi0;
  RegionMargins m;
  m.u_lower = m.u_upper = m.v_lower = m.v_upper = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < uv.a.size(); ++j) {
    const double u = uv.a[j], v = uv.b[j];
    m.u_lower = std::min(m.u_lower, u + psi0);
    m.u_upper = std::min(m.u_upper, -inner - u);
    m.v_lower = std::min(m.v_lower, v - inner);
    m.v_upper = std::min(m.v_upper, psi0 - v);
  }
  return m;
}

double min_gap(const FieldState& state) {
  const FieldState uv = to_uv_state(state);
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < uv.a.size(); ++j) g = std::min(g, uv.b[j] - uv.a[j]);
  return g;
}

DataKind parse_data_kind(const std::string& name) {
  if (name == "constant") return DataKind::kConstant;
  if (name == "two_step") return DataKind::kTwoStep;
  if (name == "random_cells") return DataKind::kRandomCells;
  if (name == "smooth") return DataKind::kSmooth;
  throw ConfigError("unknown data kind '" + name + "'");
}

std::string data_kind_name(DataKind kind) {
  switch (kind) {
    case DataKind::kConstant: return "constant";
    case DataKind::kTwoStep: return "two_step";
    case DataKind::kRandomCells: return "random_cells";
    case DataKind::kSmooth: return "smooth";
  }
  return "?";
}

namespace {

// Platform-independent uniform double in [0, 1).
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

FieldState generate_rough_data(DataKind kind, int J, double T1, double psi0, std::uint64_t seed,
                               double inset) {
  if (J < 4) throw DomainError("generate_rough_data: J must be at least 4");
  if (!(psi0 > 0.0)) throw DomainError("generate_rough_data: psi0 must be positive");
  if (!(inset >= 0.0 && inset < 0.5)) {
    throw DomainError("generate_rough_data: inset must lie in [0, 0.5)");
  }
  const double inner = std::exp(-T1) * psi0;
  if (!(inner < psi0)) {
    throw DomainError("generate_rough_data: admissible box empty (need T1 > 0)");
  }
  const double width = psi0 - inner;
  const double ulo = -psi0 + width * inset, uhi = -inner - width * inset;
  const double vlo = inner + width * inset, vhi = psi0 - width * inset;

  std::mt19937_64 rng(seed);
  FieldState out;
  out.rep = Representation::kUV;
  out.t = T1;
  out.a.resize(J);
  out.b.resize(J);

  switch (kind) {
    case DataKind::kConstant: {
      const double u = 0.5 * (ulo + uhi), v = 0.5 * (vlo + vhi);
      std::fill(out.a.begin(), out.a.end(), u);
      std::fill(out.b.begin(), out.b.end(), v);
      break;
    }
    case DataKind::kTwoStep: {
      const double u0 = ulo + (uhi - ulo) * uniform01(rng);
      const double u1 = ulo + (uhi - ulo) * uniform01(rng);
      const double v0 = vlo + (vhi - vlo) * uniform01(rng);
      const double v1 = vlo + (vhi - vlo) * uniform01(rng);
      // Jump locations fixed off the cell seams of a power-of-two grid.
      for (int j = 0; j < J; ++j) {
        const double frac = static_cast<double>(j) / static_cast<double>(J);
        out.a[j] = frac < 0.5 ? u0 : u1;
        out.b[j] = frac < 0.35 ? v0 : v1;
      }
      break;
    }
    case DataKind::kRandomCells: {
      for (int j = 0; j < J; ++j) out.a[j] = ulo + (uhi - ulo) * uniform01(rng);
      for (int j = 0; j < J; ++j) out.b[j] = vlo + (vhi - vlo) * uniform01(rng);
      break;
    }
    case DataKind::kSmooth: {
      const double uc = 0.5 * (ulo + uhi), ua = 0.35 * (uhi - ulo);
      const double vc = 0.5 * (vlo + vhi), va = 0.35 * (vhi - vlo);
      const double pu = kTwoPi * uniform01(rng);
      const double pv = kTwoPi * uniform01(rng);
      const PeriodicGrid grid{J};
      for (int j = 0; j < J; ++j) {
        out.a[j] = uc + ua * std::sin(grid.x(j) + pu);
        out.b[j] = vc + va * std::cos(grid.x(j) + pv);
      }
      break;
    }
  }
  return out;
}

}  // namespace gclab
