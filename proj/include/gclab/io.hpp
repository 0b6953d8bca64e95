#pragma once

// File emission: CSV tables, the versioned binary trajectory checkpoint
// (little-endian, row-major arrays), atomic writes and content hashing.

#include <cstdint>
#include <string>

#include "gclab/metric.hpp"
#include "gclab/solver.hpp"

namespace gclab {

inline constexpr const char* kVersionString = "gclab 0.1.0";

// Write-temp-then-rename; the rename is atomic on POSIX filesystems.
void write_text_atomic(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);  // throws IoError if unreadable
std::string hex64(std::uint64_t value);

std::string format_double(double v);  // shortest round-trip via %.17g

// Columns: t,x,u,v,l,m,n - one row per (snapshot, cell).
std::string trajectory_csv(const Trajectory& traj);

// Columns: t,dt,min_gap,margin_u_lo,margin_u_hi,margin_v_lo,margin_v_hi,
//          max_abs_dxl,max_abs_dxm,flagged_cells,max_speed.
std::string monitor_csv(const Trajectory& traj);

// Columns: t,k_star,h,dh,dln_h,S over the metric grid (every `stride` node).
std::string metric_csv(const MetricSolution& metric, std::size_t stride = 1);

// Binary checkpoint, version 1. Layout (all little-endian):
//   bytes 0..7   magic "GCLABTRJ"
//   u32          format version (1)
//   u32          representation (0 = LM, 1 = UV)
//   u64          J (cells per snapshot)
//   u64          snapshot count
//   f64          x0, dx
//   per snapshot: f64 t, then J f64 of field a, then J f64 of field b
//                 (row-major: snapshots outermost).
void save_checkpoint(const Trajectory& traj, const std::string& path);

struct CheckpointData {
  Representation rep = Representation::kLM;
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<FieldState> snapshots;
};

CheckpointData load_checkpoint(const std::string& path);

}  // namespace gclab
