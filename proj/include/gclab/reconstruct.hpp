#pragma once

// Frame integration of the Gauss-Weingarten system: from fundamental-form
// fields on an (x, t) grid, recover the immersion y into R^3, verify that
// the surface reproduces both forms, and export meshes.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "gclab/metric.hpp"
#include "gclab/solver.hpp"

namespace gclab {

using Vec3 = std::array<double, 3>;

enum class IntegrationOrder { kTFirst, kXFirst };

// Rectangular grid of second-form coefficients h_ij with the metric data
// (B, dB/dt) they live on; g11 = B^2, g12 = 0, g22 = 1.
class FormField {
 public:
  FormField(int nx, int nt, double x0, double dx, double t0, double dt);

  int nx() const { return nx_; }
  int nt() const { return nt_; }
  double x(int ix) const { return x0_ + dx_ * ix; }
  double t(int it) const { return t0_ + dt_ * it; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }

  std::size_t idx(int ix, int it) const { return static_cast<std::size_t>(it) * nx_ + ix; }

  std::vector<double> B, Bt;             // metric coefficient and its t-derivative
  std::vector<double> K;                 // Gauss curvature (<= 0)
  std::vector<double> h11, h12, h22;     // second fundamental form

  // max |L N - M^2 - K B^2| over nodes, with (L, M, N) = h_ij / B.
  double gauss_residual() const;
  void validate() const;  // throws DomainError on non-positive B

 private:
  int nx_, nt_;
  double x0_, dx_, t0_, dt_;
};

struct ImmersionSurface {
  int nx = 0, nt = 0;
  double x0 = 0, dx = 0, t0 = 0, dt = 0;
  std::vector<Vec3> y;
  std::vector<Vec3> r1, r2;  // integrated tangent frame
  std::vector<Vec3> normal;  // integrated unit normal
  IntegrationOrder order = IntegrationOrder::kTFirst;
  int reproject_every = 16;
  double gram_drift = 0.0;        // max |r_i . r_j - g_ij| over nodes
  double normal_norm_drift = 0.0; // max | |n| - 1 | over nodes
  // Largest frame rotation across a single grid edge, in radians. Values
  // approaching 1 mean the grid does not resolve the surface bending and the
  // integration is unreliable.
  double max_edge_rotation = 0.0;

  std::size_t idx(int ix, int it) const { return static_cast<std::size_t>(it) * nx + ix; }
};

struct FrameOptions {
  IntegrationOrder order = IntegrationOrder::kTFirst;
  // Re-impose r1.r1 = g11, r2.r2 = g22, r1.r2 = 0, |n| = 1 every k edges;
  // 0 disables reprojection.
  int reproject_every = 16;
};

ImmersionSurface frame_integrate(const FormField& field, const FrameOptions& opt = {});

struct FormResiduals {
  double first_max = 0.0, first_l2 = 0.0;    // I recovery (g_ij)
  double second_max = 0.0, second_l2 = 0.0;  // II recovery (h_ij), interior nodes
  double normal_orthogonality = 0.0;         // max |n . tangent|
};

// Discrete forms from divided differences of y against the input field.
FormResiduals verify_forms(const ImmersionSurface& surface, const FormField& field);

// RMS point distance after the optimal rigid alignment of b onto a.
double rigid_align_rms(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// Applies a rigid motion (rotation angles + translation) to every surface
// point, tangent and normal; used by the isometry-invariance checks.
ImmersionSurface apply_rigid_motion(const ImmersionSurface& s, const std::array<double, 3>& angles,
                                    const Vec3& shift);

// Wavefront OBJ: "v x y z" per node in t-major grid order (x fastest), quads
// split into triangles, 17 significant digits, LF line endings.
void export_obj(const ImmersionSurface& surface, const std::string& path);

// Fixtures satisfying the compatibility equations exactly.
FormField make_plane_field(int nx, int nt);
FormField make_cylinder_field(int nx, int nt, double radius, double x_extent = 3.0);
// Analytic cylinder in the gauge the anchor frame selects.
std::vector<Vec3> cylinder_reference_points(const FormField& field, double radius);

// Field assembled from solver output: rows are trajectory snapshots, columns
// the periodic x-grid with the seam duplicated.
FormField field_from_trajectory(const Trajectory& traj, const MetricSolution& metric);

}  // namespace gclab
