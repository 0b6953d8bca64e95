#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gclab/config.hpp"
#include "gclab/errors.hpp"
#include "gclab/io.hpp"

using namespace gclab;

namespace {

Trajectory tiny_trajectory() {
  Trajectory traj;
  traj.config.rep = Representation::kUV;
  traj.config.J = 4;
  traj.config.t_begin = 1.0;
  traj.config.t_end = 2.0;
  traj.config.snapshots = 3;
  for (int k = 0; k < 3; ++k) {
    FieldState s;
    s.rep = Representation::kUV;
    s.t = 1.0 + 0.5 * k;
    s.a = {-0.05, -0.04, -0.06, -0.055};
    s.b = {0.03, 0.045, 0.05, 0.02};
    s.a[0] -= 0.001 * k;
    traj.snapshots.push_back(s);
  }
  return traj;
}

}  // namespace

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64("", 0) == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("hello", 5) == 0xa430d84680aabd0bull);
  CHECK(hex64(0xa430d84680aabd0bull) == "a430d84680aabd0b");
}

TEST_CASE("atomic writes land complete and leave no temp file") {
  const std::string path = "io_test_atomic.txt";
  write_text_atomic(path, "alpha\nbeta\n");
  std::ifstream f(path);
  std::ostringstream os;
  os << f.rdbuf();
  CHECK(os.str() == "alpha\nbeta\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK(fnv1a64_file(path) == fnv1a64("alpha\nbeta\n", 11));
  std::remove(path.c_str());
  CHECK_THROWS_AS(fnv1a64_file("does_not_exist_anywhere.bin"), IoError);
}

TEST_CASE("csv emitters carry the documented headers") {
  const Trajectory traj = tiny_trajectory();
  const std::string tcsv = trajectory_csv(traj);
  CHECK(tcsv.rfind("t,x,u,v,l,m,n\n", 0) == 0);
  // 3 snapshots x 4 cells + header.
  int lines = 0;
  for (char c : tcsv) lines += c == '\n';
  CHECK(lines == 13);

  const std::string mcsv = monitor_csv(traj);
  CHECK(mcsv.rfind("t,dt,min_gap,", 0) == 0);

  const MetricSolution m = solve_h(make_constant(1.0), 1.0, 0.01);
  const std::string csv = metric_csv(m);
  CHECK(csv.rfind("t,k_star,h,dh,dln_h,S\n", 0) == 0);
}

TEST_CASE("checkpoint round trip is exact") {
  const Trajectory traj = tiny_trajectory();
  const std::string path = "io_test_ckpt.bin";
  save_checkpoint(traj, path);
  const CheckpointData back = load_checkpoint(path);
  CHECK(back.rep == Representation::kUV);
  REQUIRE(back.snapshots.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.snapshots[i].t == traj.snapshots[i].t);
    CHECK(back.snapshots[i].a == traj.snapshots[i].a);  // bit-exact
    CHECK(back.snapshots[i].b == traj.snapshots[i].b);
  }

  // Corrupt the magic and the loader refuses.
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.write("XX", 2);
  }
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
}

TEST_CASE("config defaults and full parse") {
  const ExperimentConfig d = parse_config_text("");
  CHECK(d.profile.kind == "hong_power");
  CHECK(d.solver.J == 128);
  CHECK(d.solver.t1_auto);
  CHECK(d.solver.scheme.cfl == doctest::Approx(0.4));
  CHECK(d.sweep.mu_list.size() == 4);

  const std::string text = R"(# experiment
[profile]
kind = log_decay
p = 3.5

[metric]
t_max = 80
step = 0.02

[solver]
representation = uv
j = 256
t1 = 4.5
t2 = 9.0
mu = 2e-4
psi0 = 0.05
data = smooth
data_inset = 0.1
seed = 99
snapshots = 33
cfl = 0.3
dt_max = 0.01
gap_min = 1e-9
flag_theta = 0.4
flag_kappa = 0.2

[sweep]
mu_list = 1e-2, 1e-3
window_t0 = 5.0

[reconstruct]
source = cylinder
nx = 33
nt = 17
radius = 2.0
order = x_first
reproject_every = 8

[decay]
p_min = 2
p_max = 4
p_step = 0.5
)";
  const ExperimentConfig c = parse_config_text(text);
  CHECK(c.profile.kind == "log_decay");
  CHECK(c.profile.p == doctest::Approx(3.5));
  CHECK(c.metric.t_max == doctest::Approx(80.0));
  CHECK(c.solver.rep == Representation::kUV);
  CHECK(c.solver.J == 256);
  CHECK_FALSE(c.solver.t1_auto);
  CHECK(c.solver.t1 == doctest::Approx(4.5));
  REQUIRE(c.solver.t2.has_value());
  CHECK(*c.solver.t2 == doctest::Approx(9.0));
  CHECK(c.solver.data == DataKind::kSmooth);
  CHECK(c.solver.seed == 99);
  CHECK(c.solver.scheme.dt_max == doctest::Approx(0.01));
  CHECK(c.sweep.mu_list == std::vector<double>{1e-2, 1e-3});
  REQUIRE(c.sweep.window_t0.has_value());
  CHECK(c.reconstruct.frame.order == IntegrationOrder::kXFirst);
  CHECK(c.reconstruct.frame.reproject_every == 8);
  CHECK(c.decay.p_step == doctest::Approx(0.5));
  CHECK(c.raw == text);

  const SolverConfig built = c.solver.build(4.5);
  CHECK(built.t_end == doctest::Approx(9.0));
}

TEST_CASE("strict parsing rejects unknown or malformed input") {
  CHECK_THROWS_AS(parse_config_text("[nope]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[solver]\nwhatever = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[solver]\nj = twelve\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[solver]\nj = 128\nj = 64\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("key_outside = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[solver]\nrepresentation = banana\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[solver\nj = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[reconstruct]\nsource = sphere\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[sweep]\nmu_list = ,\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_file("no_such_config.ini"), ConfigError);

  // Profile construction validates its own parameters.
  ExperimentConfig c = parse_config_text("[profile]\nkind = hong_power\ndelta = 9\n");
  CHECK_THROWS_AS(c.profile.make(), DomainError);
  ExperimentConfig c2 = parse_config_text("[profile]\nkind = martian\n");
  CHECK_THROWS_AS(c2.profile.make(), ConfigError);
}

TEST_CASE("tabulated profile loads from csv") {
  const std::string path = "io_test_profile.csv";
  {
    std::ofstream f(path);
    f << "# t,k\n";
    for (double t = 0.0; t <= 40.0 + 1e-9; t += 0.25) {
      f << t << "," << 1.0 / std::pow(1.0 + t, 3.0) << "\n";
    }
  }
  ExperimentConfig c = parse_config_text("[profile]\nkind = tabulated\nfile = " + path + "\n");
  ProfilePtr p = c.profile.make();
  CHECK(p->k(2.0) == doctest::Approx(1.0 / 27.0).epsilon(1e-3));
  std::remove(path.c_str());
  CHECK_THROWS_AS(c.profile.make(), ConfigError);
}
