#include "gclab/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gclab/errors.hpp"

namespace gclab {

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("write_text_atomic: cannot open " + tmp);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f.good()) throw IoError("write_text_atomic: write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("write_text_atomic: rename to " + path + " failed: " + ec.message());
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("fnv1a64_file: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof(buf));
    const std::streamsize got = f.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,x,u,v,l,m,n\n";
  const PeriodicGrid grid{traj.config.J};
  for (const FieldState& s : traj.snapshots) {
    const FieldState uv = to_uv_state(s);
    const FieldState lm = to_lm_state(s);
    for (int j = 0; j < traj.config.J; ++j) {
      const double n = closure_n(lm.a[j], lm.b[j]);
      os << format_double(s.t) << ',' << format_double(grid.x(j)) << ','
         << format_double(uv.a[j]) << ',' << format_double(uv.b[j]) << ','
         << format_double(lm.a[j]) << ',' << format_double(lm.b[j]) << ','
         << format_double(n) << '\n';
    }
  }
  return os.str();
}

std::string monitor_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "t,dt,min_gap,margin_u_lo,margin_u_hi,margin_v_lo,margin_v_hi,"
        "max_abs_dxl,max_abs_dxm,flagged_cells,max_speed\n";
  for (const MonitorRecord& r : traj.monitor) {
    os << format_double(r.t) << ',' << format_double(r.dt) << ',' << format_double(r.min_gap)
       << ',' << format_double(r.margins.u_lower) << ',' << format_double(r.margins.u_upper)
       << ',' << format_double(r.margins.v_lower) << ',' << format_double(r.margins.v_upper)
       << ',' << format_double(r.max_abs_dxl) << ',' << format_double(r.max_abs_dxm) << ','
       << r.flagged_cells << ',' << format_double(r.max_speed) << '\n';
  }
  return os.str();
}

std::string metric_csv(const MetricSolution& metric, std::size_t stride) {
  std::ostringstream os;
  os << "t,k_star,h,dh,dln_h,S\n";
  const CurvatureProfile& profile = metric.profile();
  for (std::size_t i = 0; i < metric.size(); i += stride) {
    const double t = metric.node_time(i);
    const double h = metric.h_node(i);
    const double dh = metric.dh_node(i);
    os << format_double(t) << ',' << format_double(profile.k(t)) << ',' << format_double(h) << ','
       << format_double(dh) << ',' << format_double(dh / h) << ','
       << format_double(dh / h + 0.25 * profile.dlnk(t)) << '\n';
  }
  return os.str();
}

namespace {

template <typename T>
void put(std::string& out, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  out.append(p, sizeof(T));
}

template <typename T>
T take(std::ifstream& f, const std::string& path) {
  T v;
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f.good()) throw IoError("load_checkpoint: truncated file " + path);
  return v;
}

constexpr char kMagic[8] = {'G', 'C', 'L', 'A', 'B', 'T', 'R', 'J'};

}  // namespace

void save_checkpoint(const Trajectory& traj, const std::string& path) {
  std::string out;
  out.reserve(64 + traj.snapshots.size() * (8 + 16 * traj.config.J));
  out.append(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, 1u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(traj.config.rep));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(traj.config.J));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(traj.snapshots.size()));
  put<double>(out, 0.0);
  put<double>(out, PeriodicGrid{traj.config.J}.dx());
  for (const FieldState& s : traj.snapshots) {
    put<double>(out, s.t);
    for (double v : s.a) put<double>(out, v);
    for (double v : s.b) put<double>(out, v);
  }
  write_text_atomic(path, out);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f.good() || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("load_checkpoint: bad magic in " + path);
  }
  const auto version = take<std::uint32_t>(f, path);
  if (version != 1u) throw IoError("load_checkpoint: unsupported version in " + path);
  const auto rep = take<std::uint32_t>(f, path);
  if (rep > 1u) throw IoError("load_checkpoint: bad representation tag in " + path);
  const auto J = take<std::uint64_t>(f, path);
  const auto count = take<std::uint64_t>(f, path);
  if (J == 0 || J > (1u << 24) || count == 0 || count > (1u << 24)) {
    throw IoError("load_checkpoint: implausible dimensions in " + path);
  }
  CheckpointData out;
  out.rep = static_cast<Representation>(rep);
  out.x0 = take<double>(f, path);
  out.dx = take<double>(f, path);
  out.snapshots.resize(count);
  for (auto& s : out.snapshots) {
    s.rep = out.rep;
    s.t = take<double>(f, path);
    s.a.resize(J);
    s.b.resize(J);
    for (auto& v : s.a) v = take<double>(f, path);
    for (auto& v : s.b) v = take<double>(f, path);
  }
  return out;
}

}  // namespace gclab
