#include "gclab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gclab/errors.hpp"

namespace gclab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

using Section = std::map<std::string, std::string>;

struct RawConfig {
  std::map<std::string, Section> sections;
};

RawConfig tokenize(const std::string& text) {
  RawConfig out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      }
      out.sections[section];  // may be empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!out.sections[section].emplace(key, value).second) {
      throw ConfigError("duplicate key '" + key + "' in [" + section + "]");
    }
  }
  return out;
}

// Typed access with strict consumption bookkeeping.
class SectionReader {
 public:
  SectionReader(const RawConfig& raw, const std::string& name) : name_(name) {
    const auto it = raw.sections.find(name);
    if (it != raw.sections.end()) entries_ = &it->second;
  }

  bool has(const std::string& key) {
    if (entries_ == nullptr) return false;
    return entries_->count(key) > 0;
  }

  std::optional<std::string> get(const std::string& key) {
    seen_.insert(key);
    if (entries_ == nullptr) return std::nullopt;
    const auto it = entries_->find(key);
    if (it == entries_->end()) return std::nullopt;
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& def) {
    return get(key).value_or(def);
  }

  double get_double(const std::string& key, double def) {
    const auto v = get(key);
    if (!v) return def;
    return parse_double(key, *v);
  }

  int get_int(const std::string& key, int def) {
    const auto v = get(key);
    if (!v) return def;
    try {
      std::size_t pos = 0;
      const long parsed = std::stol(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return static_cast<int>(parsed);
    } catch (...) {
      throw ConfigError("[" + name_ + "] " + key + ": expected integer, got '" + *v + "'");
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def) {
    const auto v = get(key);
    if (!v) return def;
    try {
      std::size_t pos = 0;
      const unsigned long long parsed = std::stoull(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("");
      return parsed;
    } catch (...) {
      throw ConfigError("[" + name_ + "] " + key + ": expected unsigned integer, got '" + *v + "'");
    }
  }

  std::vector<double> get_double_list(const std::string& key, std::vector<double> def) {
    const auto v = get(key);
    if (!v) return def;
    std::vector<double> out;
    std::istringstream in(*v);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      out.push_back(parse_double(key, tok));
    }
    if (out.empty()) throw ConfigError("[" + name_ + "] " + key + ": empty list");
    return out;
  }

  void finish() const {
    if (entries_ == nullptr) return;
    for (const auto& [key, value] : *entries_) {
      if (seen_.count(key) == 0) {
        throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

 private:
  double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double parsed = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return parsed;
    } catch (...) {
      throw ConfigError("[" + name_ + "] " + key + ": expected number, got '" + v + "'");
    }
  }

  std::string name_;
  const Section* entries_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

ProfilePtr ProfileSpec::make() const {
  if (kind == "hong_power") return make_hong_power(c, delta);
  if (kind == "log_decay") return make_log_decay(p);
  if (kind == "constant") return make_constant(value);
  if (kind == "tabulated") {
    std::ifstream f(file);
    if (!f) throw ConfigError("profile file '" + file + "' unreadable");
    std::vector<double> ts, ks;
    std::string line;
    while (std::getline(f, line)) {
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      std::istringstream row(line);
      std::string a, b;
      if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) {
        throw ConfigError("profile file '" + file + "': expected t,k per line");
      }
      ts.push_back(std::stod(a));
      ks.push_back(std::stod(b));
    }
    return make_tabulated(std::move(ts), std::move(ks));
  }
  throw ConfigError("unknown profile kind '" + kind + "'");
}

SolverConfig SolverSpec::build(double t_begin) const {
  SolverConfig cfg;
  cfg.rep = rep;
  cfg.J = J;
  cfg.t_begin = t_begin;
  cfg.t_end = t2.value_or(t_begin + t_end_offset);
  cfg.mu = mu;
  cfg.psi0 = psi0;
  cfg.data = data;
  cfg.data_inset = data_inset;
  cfg.seed = seed;
  cfg.snapshots = snapshots;
  cfg.scheme = scheme;
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  const RawConfig raw = tokenize(text);
  static const std::set<std::string> known_sections = {"profile",     "metric", "solver",
                                                       "sweep",       "decay",  "reconstruct"};
  for (const auto& [name, entries] : raw.sections) {
    if (known_sections.count(name) == 0) {
      throw ConfigError("unknown section [" + name + "]");
    }
  }

  ExperimentConfig cfg;
  cfg.raw = text;

  {
    SectionReader s(raw, "profile");
    cfg.profile.kind = s.get_string("kind", cfg.profile.kind);
    cfg.profile.c = s.get_double("c", cfg.profile.c);
    cfg.profile.delta = s.get_double("delta", cfg.profile.delta);
    cfg.profile.p = s.get_double("p", cfg.profile.p);
    cfg.profile.value = s.get_double("value", cfg.profile.value);
    cfg.profile.file = s.get_string("file", cfg.profile.file);
    s.finish();
  }
  {
    SectionReader s(raw, "metric");
    cfg.metric.t_max = s.get_double("t_max", cfg.metric.t_max);
    cfg.metric.step = s.get_double("step", cfg.metric.step);
    cfg.metric.tolerance = s.get_double("tolerance", cfg.metric.tolerance);
    s.finish();
  }
  {
    SectionReader s(raw, "solver");
    const std::string rep = s.get_string("representation", "lm");
    if (rep == "lm") {
      cfg.solver.rep = Representation::kLM;
    } else if (rep == "uv") {
      cfg.solver.rep = Representation::kUV;
    } else {
      throw ConfigError("[solver] representation must be lm or uv, got '" + rep + "'");
    }
    cfg.solver.J = s.get_int("j", cfg.solver.J);
    const std::string t1 = s.get_string("t1", "auto");
    if (t1 == "auto") {
      cfg.solver.t1_auto = true;
    } else {
      cfg.solver.t1_auto = false;
      try {
        cfg.solver.t1 = std::stod(t1);
      } catch (...) {
        throw ConfigError("[solver] t1 must be 'auto' or a number, got '" + t1 + "'");
      }
    }
    cfg.solver.t_end_offset = s.get_double("t_end_offset", cfg.solver.t_end_offset);
    if (s.has("t2")) cfg.solver.t2 = s.get_double("t2", 0.0);
    cfg.solver.mu = s.get_double("mu", cfg.solver.mu);
    cfg.solver.psi0 = s.get_double("psi0", cfg.solver.psi0);
    cfg.solver.data = parse_data_kind(s.get_string("data", data_kind_name(cfg.solver.data)));
    cfg.solver.data_inset = s.get_double("data_inset", cfg.solver.data_inset);
    cfg.solver.seed = s.get_u64("seed", cfg.solver.seed);
    cfg.solver.snapshots = s.get_int("snapshots", cfg.solver.snapshots);
    cfg.solver.scheme.cfl = s.get_double("cfl", cfg.solver.scheme.cfl);
    cfg.solver.scheme.dt_max = s.get_double("dt_max", cfg.solver.scheme.dt_max);
    cfg.solver.scheme.gap_min = s.get_double("gap_min", cfg.solver.scheme.gap_min);
    cfg.solver.scheme.flag_theta = s.get_double("flag_theta", cfg.solver.scheme.flag_theta);
    cfg.solver.scheme.flag_kappa = s.get_double("flag_kappa", cfg.solver.scheme.flag_kappa);
    s.finish();
  }
  {
    SectionReader s(raw, "sweep");
    cfg.sweep.mu_list = s.get_double_list("mu_list", cfg.sweep.mu_list);
    if (s.has("window_t0")) cfg.sweep.window_t0 = s.get_double("window_t0", 0.0);
    if (s.has("window_t1")) cfg.sweep.window_t1 = s.get_double("window_t1", 0.0);
    s.finish();
  }
  {
    SectionReader s(raw, "reconstruct");
    cfg.reconstruct.source = s.get_string("source", cfg.reconstruct.source);
    if (cfg.reconstruct.source != "plane" && cfg.reconstruct.source != "cylinder" &&
        cfg.reconstruct.source != "trajectory") {
      throw ConfigError("[reconstruct] source must be plane, cylinder or trajectory");
    }
    cfg.reconstruct.bundle = s.get_string("bundle", cfg.reconstruct.bundle);
    cfg.reconstruct.nx = s.get_int("nx", cfg.reconstruct.nx);
    cfg.reconstruct.nt = s.get_int("nt", cfg.reconstruct.nt);
    cfg.reconstruct.radius = s.get_double("radius", cfg.reconstruct.radius);
    cfg.reconstruct.x_extent = s.get_double("x_extent", cfg.reconstruct.x_extent);
    cfg.reconstruct.frame.reproject_every =
        s.get_int("reproject_every", cfg.reconstruct.frame.reproject_every);
    const std::string order = s.get_string("order", "t_first");
    if (order == "t_first") {
      cfg.reconstruct.frame.order = IntegrationOrder::kTFirst;
    } else if (order == "x_first") {
      cfg.reconstruct.frame.order = IntegrationOrder::kXFirst;
    } else {
      throw ConfigError("[reconstruct] order must be t_first or x_first");
    }
    s.finish();
  }
  {
    SectionReader s(raw, "decay");
    cfg.decay.p_min = s.get_double("p_min", cfg.decay.p_min);
    cfg.decay.p_max = s.get_double("p_max", cfg.decay.p_max);
    cfg.decay.p_step = s.get_double("p_step", cfg.decay.p_step);
    s.finish();
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config file '" + path + "' unreadable");
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config_text(os.str());
}

}  // namespace gclab
