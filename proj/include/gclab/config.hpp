#pragma once

// Experiment configuration: flat key-value text with [sections], strictly
// parsed (unknown sections or keys are rejected). See README for the schema.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gclab/curvature.hpp"
#include "gclab/field.hpp"
#include "gclab/reconstruct.hpp"
#include "gclab/solver.hpp"

namespace gclab {

struct ProfileSpec {
  std::string kind = "hong_power";
  double c = 1.0;
  double delta = 2.0;
  double p = 3.0;
  double value = 1.0;
  std::string file;  // tabulated samples CSV: t,k per line

  ProfilePtr make() const;
};

struct MetricSpec {
  double t_max = 60.0;
  double step = 0.01;
  double tolerance = 1e-8;
};

struct SolverSpec {
  Representation rep = Representation::kLM;
  int J = 128;
  bool t1_auto = true;       // T1 = 2 T* when auto
  double t1 = 0.0;
  double t_end_offset = 10;  // T2 = T1 + offset unless t2 set
  std::optional<double> t2;
  double mu = 1e-3;
  double psi0 = 0.1;
  DataKind data = DataKind::kRandomCells;
  double data_inset = 0.05;
  std::uint64_t seed = 42;
  int snapshots = 65;
  SchemeOptions scheme;

  SolverConfig build(double t_begin) const;
};

struct SweepSpec {
  std::vector<double> mu_list = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  // Window defaults to [T1 + 0.15 span, T2] x [0, 2pi) when unset.
  std::optional<double> window_t0, window_t1;
};

struct ReconstructSpec {
  std::string source = "plane";  // plane | cylinder | trajectory
  std::string bundle;            // solve output dir (trajectory source)
  int nx = 65;
  int nt = 65;
  double radius = 1.0;
  double x_extent = 3.0;
  FrameOptions frame;
};

struct DecaySpec {
  double p_min = 2.0;
  double p_max = 8.0;
  double p_step = 1.0;
};

struct ExperimentConfig {
  ProfileSpec profile;
  MetricSpec metric;
  SolverSpec solver;
  SweepSpec sweep;
  ReconstructSpec reconstruct;
  DecaySpec decay;
  std::string raw;  // verbatim config text, echoed into output bundles
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace gclab
