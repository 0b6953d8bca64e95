#include "gclab/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Dense>

#include "gclab/errors.hpp"
#include "gclab/io.hpp"

namespace gclab {

namespace {

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Frame carried along an integration line.
struct Frame {
  Vec3 y, r1, r2, n;
};

struct Coeffs {
  double B, Bt, h11, h12, h22;
};

// d/dx (y, r1, r2, n):
//   r1' = Gamma^t_xx r2 + h11 n = -B Bt r2 + h11 n        (Gamma^x_xx = 0)
//   r2' = Gamma^x_xt r1 + h12 n = (Bt/B) r1 + h12 n
//   n'  = -h11 g^xx r1 - h12 g^tt r2 = -(h11/B^2) r1 - h12 r2
Frame deriv_x(const Frame& f, const Coeffs& c) {
  Frame d;
  d.y = f.r1;
  d.r1 = add(scale(f.r2, -c.B * c.Bt), scale(f.n, c.h11));
  d.r2 = add(scale(f.r1, c.Bt / c.B), scale(f.n, c.h12));
  d.n = add(scale(f.r1, -c.h11 / (c.B * c.B)), scale(f.r2, -c.h12));
  return d;
}

// d/dt (y, r1, r2, n):
//   r1' = Gamma^x_xt r1 + h12 n,   r2' = h22 n   (Gamma^k_tt = 0)
//   n'  = -(h12/B^2) r1 - h22 r2
Frame deriv_t(const Frame& f, const Coeffs& c) {
  Frame d;
  d.y = f.r2;
  d.r1 = add(scale(f.r1, c.Bt / c.B), scale(f.n, c.h12));
  d.r2 = scale(f.n, c.h22);
  d.n = add(scale(f.r1, -c.h12 / (c.B * c.B)), scale(f.r2, -c.h22));
  return d;
}

Frame heun(const Frame& f, const Coeffs& c0, const Coeffs& c1, double h, bool along_x) {
  auto rhs = [&](const Frame& g, const Coeffs& c) { return along_x ? deriv_x(g, c) : deriv_t(g, c); };
  const Frame d1 = rhs(f, c0);
  Frame mid;
  mid.y = add(f.y, scale(d1.y, h));
  mid.r1 = add(f.r1, scale(d1.r1, h));
  mid.r2 = add(f.r2, scale(d1.r2, h));
  mid.n = add(f.n, scale(d1.n, h));
  const Frame d2 = rhs(mid, c1);
  Frame out;
  out.y = add(f.y, scale(add(d1.y, d2.y), 0.5 * h));
  out.r1 = add(f.r1, scale(add(d1.r1, d2.r1), 0.5 * h));
  out.r2 = add(f.r2, scale(add(d1.r2, d2.r2), 0.5 * h));
  out.n = add(f.n, scale(add(d1.n, d2.n), 0.5 * h));
  return out;
}

// Minimal rotation of the frame back onto the g-compatibility manifold.
void reproject(Frame& f, double B) {
  Vec3 e1 = scale(f.r1, 1.0 / norm(f.r1));
  f.r1 = scale(e1, B);
  Vec3 r2p = sub(f.r2, scale(e1, dot(f.r2, e1)));
  f.r2 = scale(r2p, 1.0 / norm(r2p));
  Vec3 nn = cross(f.r1, f.r2);
  f.n = scale(nn, 1.0 / norm(nn));
}

}  // namespace

FormField::FormField(int nx, int nt, double x0, double dx, double t0, double dt)
    : nx_(nx), nt_(nt), x0_(x0), dx_(dx), t0_(t0), dt_(dt) {
  if (nx < 2 || nt < 2) throw DomainError("FormField: need at least a 2x2 grid");
  const std::size_t n = static_cast<std::size_t>(nx) * nt;
  B.assign(n, 1.0);
  Bt.assign(n, 0.0);
  K.assign(n, 0.0);
  h11.assign(n, 0.0);
  h12.assign(n, 0.0);
  h22.assign(n, 0.0);
}

double FormField::gauss_residual() const {
  // det II - K det I with det I = B^2.
  double r = 0.0;
  for (std::size_t i = 0; i < B.size(); ++i) {
    r = std::max(r, std::abs(h11[i] * h22[i] - h12[i] * h12[i] - K[i] * B[i] * B[i]));
  }
  return r;
}

void FormField::validate() const {
  for (std::size_t i = 0; i < B.size(); ++i) {
    if (!(B[i] > 0.0)) throw DomainError("FormField: metric not positive definite (B <= 0)");
  }
}

ImmersionSurface frame_integrate(const FormField& field, const FrameOptions& opt) {
  field.validate();
  const int nx = field.nx(), nt = field.nt();
  ImmersionSurface s;
  s.nx = nx;
  s.nt = nt;
  s.x0 = field.x(0);
  s.dx = field.dx();
  s.t0 = field.t(0);
  s.dt = field.dt();
  s.order = opt.order;
  s.reproject_every = opt.reproject_every;
  const std::size_t n = static_cast<std::size_t>(nx) * nt;
  s.y.resize(n);
  s.r1.resize(n);
  s.r2.resize(n);
  s.normal.resize(n);

  auto coeffs = [&](int ix, int it) {
    const std::size_t i = field.idx(ix, it);
    return Coeffs{field.B[i], field.Bt[i], field.h11[i], field.h12[i], field.h22[i]};
  };
  auto put = [&](int ix, int it, const Frame& f) {
    const std::size_t i = s.idx(ix, it);
    s.y[i] = f.y;
    s.r1[i] = f.r1;
    s.r2[i] = f.r2;
    s.normal[i] = f.n;
  };

  // Anchor frame compatible with g at the first node: |r1| = B, |r2| = 1,
  // orthogonal, with n = r1 x r2 / |r1 x r2|.
  Frame anchor;
  anchor.y = {0.0, 0.0, 0.0};
  anchor.r1 = {field.B[field.idx(0, 0)], 0.0, 0.0};
  anchor.r2 = {0.0, 1.0, 0.0};
  anchor.n = {0.0, 0.0, 1.0};

  auto run_line = [&](Frame f, int fixed, bool along_x) {
    // Integrates one grid line, storing each node; `fixed` is the index of
    // the transverse coordinate.
    const int len = along_x ? nx : nt;
    const double h = along_x ? field.dx() : field.dt();
    for (int k = 0; k < len; ++k) {
      if (along_x) {
        put(k, fixed, f);
      } else {
        put(fixed, k, f);
      }
      if (k + 1 == len) break;
      const Coeffs c0 = along_x ? coeffs(k, fixed) : coeffs(fixed, k);
      const Coeffs c1 = along_x ? coeffs(k + 1, fixed) : coeffs(fixed, k + 1);
      f = heun(f, c0, c1, h, along_x);
      if (opt.reproject_every > 0 && (k + 1) % opt.reproject_every == 0) {
        const std::size_t i = along_x ? field.idx(k + 1, fixed) : field.idx(fixed, k + 1);
        reproject(f, field.B[i]);
      }
    }
    return f;
  };

  if (opt.order == IntegrationOrder::kTFirst) {
    // Down the t-line at x0, then across x per t-row.
    Frame f = anchor;
    const double h = field.dt();
    for (int it = 0; it < nt; ++it) {
      run_line(f, it, /*along_x=*/true);
      if (it + 1 == nt) break;
      f = heun(f, coeffs(0, it), coeffs(0, it + 1), h, /*along_x=*/false);
      if (opt.reproject_every > 0 && (it + 1) % opt.reproject_every == 0) {
        reproject(f, field.B[field.idx(0, it + 1)]);
      }
    }
  } else {
    Frame f = anchor;
    const double h = field.dx();
    for (int ix = 0; ix < nx; ++ix) {
      run_line(f, ix, /*along_x=*/false);
      if (ix + 1 == nx) break;
      f = heun(f, coeffs(ix, 0), coeffs(ix + 1, 0), h, /*along_x=*/true);
      if (opt.reproject_every > 0 && (ix + 1) % opt.reproject_every == 0) {
        reproject(f, field.B[field.idx(ix + 1, 0)]);
      }
    }
  }

  double gram = 0.0, ndrift = 0.0, rot = 0.0;
  for (int it = 0; it < nt; ++it) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = s.idx(ix, it);
      const std::size_t fi = field.idx(ix, it);
      const double B = field.B[fi];
      gram = std::max(gram, std::abs(dot(s.r1[i], s.r1[i]) - B * B));
      gram = std::max(gram, std::abs(dot(s.r1[i], s.r2[i])));
      gram = std::max(gram, std::abs(dot(s.r2[i], s.r2[i]) - 1.0));
      ndrift = std::max(ndrift, std::abs(norm(s.normal[i]) - 1.0));
      // Rotation rates of the orthonormal frame (r1/B, r2, n) per unit
      // coordinate: along x the generator entries are Bt, h11/B, h12; along
      // t they are h12/B and h22.
      const double rx = field.dx() * std::max({std::abs(field.h11[fi]) / B,
                                               std::abs(field.h12[fi]),
                                               std::abs(field.Bt[fi])});
      const double rt = field.dt() * std::max(std::abs(field.h12[fi]) / B,
                                              std::abs(field.h22[fi]));
      rot = std::max({rot, rx, rt});
    }
  }
  s.gram_drift = gram;
  s.normal_norm_drift = ndrift;
  s.max_edge_rotation = rot;
  return s;
}

FormResiduals verify_forms(const ImmersionSurface& s, const FormField& field) {
  if (s.nx != field.nx() || s.nt != field.nt()) {
    throw DomainError("verify_forms: grid mismatch");
  }
  const int nx = s.nx, nt = s.nt;
  const double dx = s.dx, dt = s.dt;

  auto dx_y = [&](int ix, int it) {
    if (ix == 0) {
      return scale(add(scale(s.y[s.idx(0, it)], -3.0),
                       sub(scale(s.y[s.idx(1, it)], 4.0), s.y[s.idx(2, it)])),
                   1.0 / (2.0 * dx));
    }
    if (ix == nx - 1) {
      return scale(add(scale(s.y[s.idx(nx - 1, it)], 3.0),
                       sub(s.y[s.idx(nx - 3, it)], scale(s.y[s.idx(nx - 2, it)], 4.0))),
                   1.0 / (2.0 * dx));
    }
    return scale(sub(s.y[s.idx(ix + 1, it)], s.y[s.idx(ix - 1, it)]), 1.0 / (2.0 * dx));
  };
  auto dt_y = [&](int ix, int it) {
    if (it == 0) {
      return scale(add(scale(s.y[s.idx(ix, 0)], -3.0),
                       sub(scale(s.y[s.idx(ix, 1)], 4.0), s.y[s.idx(ix, 2)])),
                   1.0 / (2.0 * dt));
    }
    if (it == nt - 1) {
      return scale(add(scale(s.y[s.idx(ix, nt - 1)], 3.0),
                       sub(s.y[s.idx(ix, nt - 3)], scale(s.y[s.idx(ix, nt - 2)], 4.0))),
                   1.0 / (2.0 * dt));
    }
    return scale(sub(s.y[s.idx(ix, it + 1)], s.y[s.idx(ix, it - 1)]), 1.0 / (2.0 * dt));
  };

  FormResiduals out;
  double acc1 = 0.0, acc2 = 0.0;
  std::size_t count1 = 0, count2 = 0;
  for (int it = 0; it < nt; ++it) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = field.idx(ix, it);
      const Vec3 yx = dx_y(ix, it);
      const Vec3 yt = dt_y(ix, it);
      const double B = field.B[i];
      const double e11 = dot(yx, yx) - B * B;
      const double e12 = dot(yx, yt);
      const double e22 = dot(yt, yt) - 1.0;
      for (double e : {e11, e12, e22}) {
        out.first_max = std::max(out.first_max, std::abs(e));
        acc1 += e * e;
      }
      count1 += 3;

      const Vec3 cr = cross(yx, yt);
      const double cn = norm(cr);
      if (cn > 0.0) {
        const Vec3 nd = scale(cr, 1.0 / cn);
        out.normal_orthogonality = std::max(
            out.normal_orthogonality, std::max(std::abs(dot(nd, yx)), std::abs(dot(nd, yt))));
        if (ix > 0 && ix < nx - 1 && it > 0 && it < nt - 1) {
          const Vec3 yxx = scale(add(sub(s.y[s.idx(ix + 1, it)], scale(s.y[s.idx(ix, it)], 2.0)),
                                     s.y[s.idx(ix - 1, it)]),
                                 1.0 / (dx * dx));
          const Vec3 ytt = scale(add(sub(s.y[s.idx(ix, it + 1)], scale(s.y[s.idx(ix, it)], 2.0)),
                                     s.y[s.idx(ix, it - 1)]),
                                 1.0 / (dt * dt));
          const Vec3 yxt = scale(
              add(sub(s.y[s.idx(ix + 1, it + 1)], s.y[s.idx(ix - 1, it + 1)]),
                  sub(s.y[s.idx(ix - 1, it - 1)], s.y[s.idx(ix + 1, it - 1)])),
              1.0 / (4.0 * dx * dt));
          const double f11 = dot(yxx, nd) - field.h11[i];
          const double f12 = dot(yxt, nd) - field.h12[i];
          const double f22 = dot(ytt, nd) - field.h22[i];
          for (double e : {f11, f12, f22}) {
            out.second_max = std::max(out.second_max, std::abs(e));
            acc2 += e * e;
          }
          count2 += 3;
        }
      }
    }
  }
  out.first_l2 = std::sqrt(acc1 / static_cast<double>(std::max<std::size_t>(count1, 1)));
  out.second_l2 = std::sqrt(acc2 / static_cast<double>(std::max<std::size_t>(count2, 1)));
  return out;
}

double rigid_align_rms(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.size() != b.size() || a.empty()) throw DomainError("rigid_align_rms: size mismatch");
  const std::size_t n = a.size();
  Eigen::Vector3d ca = Eigen::Vector3d::Zero(), cb = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    ca += Eigen::Vector3d(a[i][0], a[i][1], a[i][2]);
    cb += Eigen::Vector3d(b[i][0], b[i][1], b[i][2]);
  }
  ca /= static_cast<double>(n);
  cb /= static_cast<double>(n);
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d pa = Eigen::Vector3d(a[i][0], a[i][1], a[i][2]) - ca;
    const Eigen::Vector3d pb = Eigen::Vector3d(b[i][0], b[i][1], b[i][2]) - cb;
    H += pb * pa.transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d R = svd.matrixV() * svd.matrixU().transpose();
  if (R.determinant() < 0.0) {
    Eigen::Matrix3d V = svd.matrixV();
    V.col(2) *= -1.0;
    R = V * svd.matrixU().transpose();
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d pb = Eigen::Vector3d(b[i][0], b[i][1], b[i][2]) - cb;
    const Eigen::Vector3d mapped = R * pb + ca;
    const Eigen::Vector3d diff = mapped - Eigen::Vector3d(a[i][0], a[i][1], a[i][2]);
    acc += diff.squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(n));
}

ImmersionSurface apply_rigid_motion(const ImmersionSurface& s, const std::array<double, 3>& angles,
                                    const Vec3& shift) {
  const Eigen::Matrix3d R =
      (Eigen::AngleAxisd(angles[0], Eigen::Vector3d::UnitX()) *
       Eigen::AngleAxisd(angles[1], Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(angles[2], Eigen::Vector3d::UnitZ()))
          .toRotationMatrix();
  auto map = [&](const Vec3& v, bool translate) {
    const Eigen::Vector3d w = R * Eigen::Vector3d(v[0], v[1], v[2]);
    return Vec3{w[0] + (translate ? shift[0] : 0.0), w[1] + (translate ? shift[1] : 0.0),
                w[2] + (translate ? shift[2] : 0.0)};
  };
  ImmersionSurface out = s;
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    out.y[i] = map(s.y[i], true);
    out.r1[i] = map(s.r1[i], false);
    out.r2[i] = map(s.r2[i], false);
    out.normal[i] = map(s.normal[i], false);
  }
  return out;
}

void export_obj(const ImmersionSurface& s, const std::string& path) {
  std::string out;
  out.reserve(static_cast<std::size_t>(s.nx) * s.nt * 72);
  char line[160];
  for (int it = 0; it < s.nt; ++it) {
    for (int ix = 0; ix < s.nx; ++ix) {
      const Vec3& y = s.y[s.idx(ix, it)];
      std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n", y[0], y[1], y[2]);
      out += line;
    }
  }
  auto vid = [&](int ix, int it) { return it * s.nx + ix + 1; };  // 1-based
  for (int it = 0; it + 1 < s.nt; ++it) {
    for (int ix = 0; ix + 1 < s.nx; ++ix) {
      const int a = vid(ix, it), b = vid(ix + 1, it), c = vid(ix + 1, it + 1), d = vid(ix, it + 1);
      std::snprintf(line, sizeof(line), "f %d %d %d\nf %d %d %d\n", a, b, c, a, c, d);
      out += line;
    }
  }
  write_text_atomic(path, out);
}

FormField make_plane_field(int nx, int nt) {
  FormField field(nx, nt, 0.0, 1.0 / (nx - 1), 0.0, 1.0 / (nt - 1));
  return field;  // B = 1, h_ij = 0, K = 0
}

FormField make_cylinder_field(int nx, int nt, double radius, double x_extent) {
  if (!(radius > 0.0)) throw DomainError("make_cylinder_field: radius must be positive");
  FormField field(nx, nt, 0.0, x_extent / (nx - 1), 0.0, 1.0 / (nt - 1));
  for (std::size_t i = 0; i < field.h11.size(); ++i) field.h11[i] = -1.0 / radius;
  return field;
}

std::vector<Vec3> cylinder_reference_points(const FormField& field, double radius) {
  std::vector<Vec3> pts(static_cast<std::size_t>(field.nx()) * field.nt());
  for (int it = 0; it < field.nt(); ++it) {
    for (int ix = 0; ix < field.nx(); ++ix) {
      const double th = field.x(ix) / radius;
      pts[field.idx(ix, it)] = {radius * std::sin(th), field.t(it),
                                radius * (std::cos(th) - 1.0)};
    }
  }
  return pts;
}

FormField field_from_trajectory(const Trajectory& traj, const MetricSolution& metric) {
  const int J = traj.config.J;
  const int nt = static_cast<int>(traj.snapshots.size());
  if (nt < 2) throw DomainError("field_from_trajectory: need at least two snapshots");
  const double t0 = traj.snapshots.front().t;
  const double dt = traj.snapshots[1].t - t0;
  const double dx = PeriodicGrid{J}.dx();
  const CurvatureProfile& profile = metric.profile();

  FormField field(J + 1, nt, 0.0, dx, t0, dt);
  for (int it = 0; it < nt; ++it) {
    const FieldState lm = to_lm_state(traj.snapshots[it]);
    const double tt = lm.t;
    const double B = metric.h(tt);
    const double Bt = metric.dh(tt);
    const double k = profile.k(tt);
    const double sk = std::sqrt(k);
    for (int ix = 0; ix <= J; ++ix) {
      const int j = ix % J;  // seam duplicated
      const double l = lm.a[j], m = lm.b[j];
      const double n = closure_n(l, m);
      const std::size_t i = field.idx(ix, it);
      field.B[i] = B;
      field.Bt[i] = Bt;
      field.K[i] = -k;
      // Geodesic-gauge second form: (h11, h12, h22) = (L, M, N) with
      // L = l B^2 sqrt(k), M = m B sqrt(k), N = n sqrt(k).
      field.h11[i] = l * B * B * sk;
      field.h12[i] = m * B * sk;
      field.h22[i] = n * sk;
    }
  }
  return field;
}

}  // namespace gclab
