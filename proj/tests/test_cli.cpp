#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef GCLAB_BIN
#error "GCLAB_BIN must point at the built CLI"
#endif

namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  fs::path file(const std::string& name, const std::string& content) const {
    const fs::path p = dir / name;
    std::ofstream f(p);
    f << content;
    return p;
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(GCLAB_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

const char* kDemoConfig = R"([profile]
kind = hong_power
c = 1.0
delta = 2.0

[solver]
representation = lm
j = 64
mu = 1e-3
psi0 = 0.1
data = random_cells
seed = 42
snapshots = 17
t_end_offset = 4.0
)";

}  // namespace

TEST_CASE("solve bundles are byte-identical across reruns") {
  Sandbox sb("gclab_cli_det");
  const fs::path cfg = sb.file("demo.ini", kDemoConfig);
  REQUIRE(run("solve --config " + cfg.string() + " --out " + (sb.dir / "a").string()) == 0);
  REQUIRE(run("solve --config " + cfg.string() + " --out " + (sb.dir / "b").string()) == 0);
  for (const char* name : {"trajectory.csv", "trajectory.ckpt", "monitor.csv", "summary.json"}) {
    CHECK(slurp(sb.dir / "a" / name) == slurp(sb.dir / "b" / name));
    CHECK_FALSE(slurp(sb.dir / "a" / name).empty());
  }

  // A different seed produces different fields.
  REQUIRE(run("solve --config " + cfg.string() + " --seed 43 --out " + (sb.dir / "c").string()) ==
          0);
  CHECK(slurp(sb.dir / "a" / "trajectory.csv") != slurp(sb.dir / "c" / "trajectory.csv"));
}

TEST_CASE("reconstruct consumes solve bundles and exports obj deterministically") {
  Sandbox sb("gclab_cli_recon");
  const fs::path cfg = sb.file("demo.ini", kDemoConfig);
  REQUIRE(run("solve --config " + cfg.string() + " --out " + (sb.dir / "run").string()) == 0);

  const fs::path rcfg = sb.file("recon.ini", "[reconstruct]\nsource = trajectory\nbundle = " +
                                                 (sb.dir / "run").string() + "\n");
  REQUIRE(run("reconstruct --config " + rcfg.string() + " --out " + (sb.dir / "ra").string()) == 0);
  REQUIRE(run("reconstruct --config " + rcfg.string() + " --out " + (sb.dir / "rb").string()) == 0);
  CHECK(slurp(sb.dir / "ra" / "surface.obj") == slurp(sb.dir / "rb" / "surface.obj"));
  CHECK_FALSE(slurp(sb.dir / "ra" / "surface.obj").empty());

  // Plane fixture reconstructs to numerical exactness.
  const fs::path pcfg = sb.file("plane.ini", "[reconstruct]\nsource = plane\nnx = 9\nnt = 9\n");
  REQUIRE(run("reconstruct --config " + pcfg.string() + " --out " + (sb.dir / "rp").string()) == 0);
  const std::string rj = slurp(sb.dir / "rp" / "reconstruct.json");
  CHECK(rj.find("\"first_form_max\"") != std::string::npos);
}

TEST_CASE("exit codes distinguish config, numerical and missing-input failures") {
  Sandbox sb("gclab_cli_codes");
  const fs::path bad = sb.file("bad.ini", "[solver]\nmystery = 1\n");
  CHECK(run("solve --config " + bad.string() + " --out " + (sb.dir / "x1").string()) == 2);
  CHECK(run("solve --config /does/not/exist.ini --out " + (sb.dir / "x2").string()) == 2);

  // gap_min above the admissible gap forces a hyperbolicity abort.
  std::string abort_cfg = kDemoConfig;
  abort_cfg += "gap_min = 0.5\n";
  const fs::path acfg = sb.file("abort.ini", abort_cfg);
  CHECK(run("solve --config " + acfg.string() + " --out " + (sb.dir / "x3").string()) == 3);
  CHECK(fs::exists(sb.dir / "x3" / "abort_snapshot.csv"));

  const fs::path mcfg = sb.file("missing.ini",
                                "[reconstruct]\nsource = trajectory\nbundle = /nope\n");
  CHECK(run("reconstruct --config " + mcfg.string() + " --out " + (sb.dir / "x4").string()) == 4);

  CHECK(run("frobnicate --config " + acfg.string()) == 2);
}

TEST_CASE("metric command reports the quadrature constant and switch time") {
  Sandbox sb("gclab_cli_metric");
  const fs::path cfg = sb.file("demo.ini", kDemoConfig);
  REQUIRE(run("metric --config " + cfg.string() + " --out " + (sb.dir / "m").string()) == 0);
  const std::string s = slurp(sb.dir / "m" / "summary.json");
  CHECK(s.find("\"C1\": 0.82436063") != std::string::npos);
  CHECK(s.find("\"p_threshold\": 3") != std::string::npos);
  CHECK(s.find("\"phi_admissible\": true") != std::string::npos);
  CHECK_FALSE(slurp(sb.dir / "m" / "metric.csv").empty());
  CHECK_FALSE(slurp(sb.dir / "m" / "manifest.json").empty());
  CHECK(slurp(sb.dir / "m" / "config.echo.ini") == kDemoConfig);
}
