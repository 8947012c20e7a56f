#include "hsns/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <future>
#include <numbers>
#include <sstream>

#include "hsns/bl_norms.hpp"
#include "hsns/checkpoint.hpp"
#include "hsns/closed_form.hpp"
#include "hsns/error.hpp"
#include "hsns/green_stokes.hpp"

namespace hsns {

namespace {

constexpr const char* kTimeseriesVersion = "# hsns-timeseries v1";
constexpr const char* kSweepVersion = "# hsns-sweep v1";
constexpr const char* kGreenVersion = "# hsns-green-crosscheck v1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto s = trim(v);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

template <typename I>
I parse_integer(const std::string& key, const std::string& v) {
  I out = 0;
  const auto s = trim(v);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  const auto s = trim(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

bool is_sweep(CommandKind c) { return c == CommandKind::sweep_kato || c == CommandKind::sweep_inviscid; }

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Grid parameters of a checkpoint datum override the configured ones so the
// stored field can be used as is.
SolverConfig adopt_datum_grid(SolverConfig c, const std::string& datum) {
  const auto spec = DatumSpec::parse(datum);
  if (!spec.is_checkpoint()) return c;
  const auto ck = load_checkpoint(spec.checkpoint);
  c.K = ck.K;
  c.n_nodes = ck.n_nodes;
  c.z_max = ck.z_max;
  c.delta_ref = ck.delta_ref;
  return c;
}

double sup_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

class OutputDir {
 public:
  explicit OutputDir(const std::filesystem::path& dir) : dir_(dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
  }
  void write(const std::string& rel, const std::string& bytes) {
    const auto path = dir_ / rel;
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
      if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    write_file_atomic(path, bytes);
    files_.push_back(rel);
  }
  void record(const std::string& rel) { files_.push_back(rel); }
  const std::filesystem::path& path() const { return dir_; }
  std::vector<std::string> files() const {
    auto f = files_;
    std::sort(f.begin(), f.end());
    return f;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

nlohmann::json trajectory_summary(const Trajectory& traj, double nu) {
  int iterations = 0;
  int halvings = 0;
  for (int i : traj.iterations) iterations += i;
  for (int h : traj.halvings) halvings += h;
  nlohmann::json j{{"stored_times", traj.times.size()},
                   {"final_time", traj.times.empty() ? 0.0 : traj.times.back()},
                   {"complete", traj.complete},
                   {"failure", traj.failure},
                   {"energy_initial", traj.energy.empty() ? 0.0 : traj.energy.front()},
                   {"energy_final", traj.energy.empty() ? 0.0 : traj.energy.back()},
                   {"max_no_slip_residual", sup_of(traj.no_slip_residual)},
                   {"max_u2_wall", sup_of(traj.u2_wall)},
                   {"max_divergence_residual", sup_of(traj.divergence_residual)},
                   {"max_reality_defect", sup_of(traj.reality_defect)},
                   {"max_contraction", sup_of(traj.max_contraction)},
                   {"picard_iterations", iterations},
                   {"halvings", halvings}};
  if (nu > 0.0 && !traj.vorticity.empty()) j["kato"] = kato_functional(traj, nu);
  return j;
}

std::vector<std::string> write_checkpoints(OutputDir& out, const Trajectory& traj, double nu, int every,
                                           const std::string& hash) {
  std::vector<std::string> written;
  if (every <= 0) return written;
  const auto n = static_cast<std::size_t>(every);
  for (std::size_t i = 0; i < traj.vorticity.size(); i += n) {
    char name[64];
    std::snprintf(name, sizeof name, "checkpoints/state_%06zu.hsns", i);
    const auto path = out.path() / name;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    save_checkpoint(path, traj.vorticity[i], nu, traj.times[i], hash);
    out.record(name);
    written.emplace_back(name);
  }
  return written;
}

std::string green_csv(const GreenCrossCheck& r) {
  std::string s = std::string(kGreenVersion) + "\nnu,alpha,t,y,z,closed,quadrature,contour,regime,agree\n";
  for (const auto& g : r.samples) {
    s += format_number(g.nu) + "," + std::to_string(g.alpha) + "," + format_number(g.t) + "," + format_number(g.y) +
         "," + format_number(g.z) + "," + format_number(g.closed) + "," + format_number(g.quadrature) + "," +
         format_number(g.contour) + "," + to_string(g.regime) + "," + (g.agree ? "1" : "0") + "\n";
  }
  return s;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(CommandKind c) {
  switch (c) {
    case CommandKind::verify_green: return "verify-green";
    case CommandKind::simulate_ns: return "simulate-ns";
    case CommandKind::simulate_euler: return "simulate-euler";
    case CommandKind::sweep_kato: return "sweep-kato";
    case CommandKind::sweep_inviscid: return "sweep-inviscid";
    case CommandKind::norms_report: return "norms-report";
  }
  return "unknown";
}

CommandKind parse_command(const std::string& s) {
  for (auto c : {CommandKind::verify_green, CommandKind::simulate_ns, CommandKind::simulate_euler,
                 CommandKind::sweep_kato, CommandKind::sweep_inviscid, CommandKind::norms_report}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown command '" + s +
                    "' (expected verify-green, simulate-ns, simulate-euler, sweep-kato, sweep-inviscid or norms-report)");
}

DatumSpec DatumSpec::parse(const std::string& text) {
  DatumSpec d;
  const auto t = trim(text);
  if (t.empty()) throw ConfigError("empty datum descriptor");
  const auto colon = t.find(':');
  d.name = trim(t.substr(0, colon));
  if (d.name == "checkpoint") {
    if (colon == std::string::npos || trim(t.substr(colon + 1)).empty()) {
      throw ConfigError("checkpoint datum needs a path: checkpoint:PATH");
    }
    d.checkpoint = trim(t.substr(colon + 1));
    return d;
  }
  if (colon == std::string::npos) return d;
  std::stringstream ss(t.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("datum parameter '" + item + "' is not key=value");
    const auto key = trim(item.substr(0, eq));
    d.params[key] = parse_double("datum." + key, item.substr(eq + 1));
  }
  return d;
}

std::vector<double> default_nu_ladder() { return {1e-3, 4e-4, 1e-4, 4e-5, 1e-5}; }

std::vector<std::string> config_keys() {
  return {"command", "nu",          "K",          "z_max",          "n_nodes",  "delta_ref",
          "nx",      "T",           "dt",         "picard_tol",     "picard_max", "max_halvings",
          "dealias_fraction",       "n_time_quad", "linear",        "nu_list",  "datum",
          "out",     "seed",        "checkpoint_every", "green_samples", "jobs"};
}

void set_config_value(ExperimentConfig& cfg, const std::string& key_in, const std::string& value) {
  const auto key = trim(key_in);
  auto& s = cfg.solver;
  if (key == "command") cfg.command = parse_command(trim(value));
  else if (key == "nu") s.nu = parse_double(key, value);
  else if (key == "K" || key == "modes") s.K = parse_integer<int>(key, value);
  else if (key == "z_max") s.z_max = parse_double(key, value);
  else if (key == "n_nodes" || key == "grid") s.n_nodes = parse_integer<std::size_t>(key, value);
  else if (key == "delta_ref") s.delta_ref = parse_double(key, value);
  else if (key == "nx") s.nx = parse_integer<std::size_t>(key, value);
  else if (key == "T") s.T = parse_double(key, value);
  else if (key == "dt") s.dt = parse_double(key, value);
  else if (key == "picard_tol") s.picard_tol = parse_double(key, value);
  else if (key == "picard_max") s.picard_max = parse_integer<int>(key, value);
  else if (key == "max_halvings") s.max_halvings = parse_integer<int>(key, value);
  else if (key == "dealias_fraction") s.dealias_fraction = parse_double(key, value);
  else if (key == "n_time_quad") s.n_time_quad = parse_integer<int>(key, value);
  else if (key == "linear") s.linear = parse_bool(key, value);
  else if (key == "nu_list") cfg.nu_list = parse_list(key, value);
  else if (key == "datum") cfg.datum = trim(value);
  else if (key == "out") cfg.out_dir = trim(value);
  else if (key == "seed") cfg.seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "checkpoint_every") cfg.checkpoint_every = parse_integer<int>(key, value);
  else if (key == "green_samples") cfg.green_samples = parse_integer<std::size_t>(key, value);
  else if (key == "jobs") cfg.jobs = parse_integer<int>(key, value);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

void apply_override(ExperimentConfig& cfg, const std::string& key_value) {
  const auto eq = key_value.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + key_value + "' is not key=value");
  set_config_value(cfg, key_value.substr(0, eq), key_value.substr(eq + 1));
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      set_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void ExperimentConfig::validate() const {
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (command == CommandKind::verify_green && green_samples == 0) throw ConfigError("green_samples must be >= 1");
  const auto d = DatumSpec::parse(datum);
  if (d.is_checkpoint()) {
    if (!std::filesystem::exists(d.checkpoint)) throw ConfigError("checkpoint datum " + d.checkpoint + " not found");
  } else {
    named_datum(d.name, d.params);
  }
  if (is_sweep(command)) {
    const auto nus = nu_list.empty() ? default_nu_ladder() : nu_list;
    for (std::size_t i = 0; i < nus.size(); ++i) {
      if (!(nus[i] > 0.0) || !std::isfinite(nus[i])) {
        throw ConfigError("nu_list entries must be positive (the Euler reference is computed separately)");
      }
      if (i > 0 && !(nus[i] < nus[i - 1])) throw ConfigError("nu_list must be strictly decreasing");
    }
    auto s = solver;
    s.nu = nus.back();
    s.validate();
  } else {
    auto s = solver;
    if (command == CommandKind::simulate_euler) s.nu = 0.0;
    s.validate();
    if (command == CommandKind::simulate_ns && !(s.nu > 0.0)) {
      throw ConfigError("simulate-ns needs nu > 0 (use simulate-euler for nu = 0)");
    }
  }
}

std::string ExperimentConfig::to_text(bool with_location) const {
  const auto& s = solver;
  std::string list;
  for (std::size_t i = 0; i < nu_list.size(); ++i) list += (i ? "," : "") + format_number(nu_list[i]);
  std::string t;
  auto kv = [&t](const std::string& k, const std::string& v) { t += k + " = " + v + "\n"; };
  kv("command", to_string(command));
  kv("nu", format_number(s.nu));
  kv("K", std::to_string(s.K));
  kv("z_max", format_number(s.z_max));
  kv("n_nodes", std::to_string(s.n_nodes));
  kv("delta_ref", format_number(s.delta_ref));
  kv("nx", std::to_string(s.nx));
  kv("T", format_number(s.T));
  kv("dt", format_number(s.dt));
  kv("picard_tol", format_number(s.picard_tol));
  kv("picard_max", std::to_string(s.picard_max));
  kv("max_halvings", std::to_string(s.max_halvings));
  kv("dealias_fraction", format_number(s.dealias_fraction));
  kv("n_time_quad", std::to_string(s.n_time_quad));
  kv("linear", s.linear ? "true" : "false");
  kv("nu_list", list);
  kv("datum", datum);
  if (with_location) kv("out", out_dir);
  kv("seed", std::to_string(seed));
  kv("checkpoint_every", std::to_string(checkpoint_every));
  kv("green_samples", std::to_string(green_samples));
  if (with_location) kv("jobs", std::to_string(jobs));
  return t;
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_text(false))));
  return buf;
}

SpectralField resolve_datum(const std::string& descriptor, std::shared_ptr<const GradedGrid> grid, int K) {
  const auto d = DatumSpec::parse(descriptor);
  if (!d.is_checkpoint()) return named_datum(d.name, d.params).sample(std::move(grid), K);
  const auto ck = load_checkpoint(d.checkpoint);
  if (ck.K != K) {
    throw ConfigError(d.checkpoint + ": checkpoint has K = " + std::to_string(ck.K) + ", run expects " +
                      std::to_string(K));
  }
  if (ck.field.grid().nodes != grid->nodes) {
    throw ConfigError(d.checkpoint + ": checkpoint grid differs from the run grid");
  }
  SpectralField w(grid, K, true);
  for (int a = -K; a <= K; ++a) w.mode(a) = ck.field.mode(a);
  return w;
}

std::vector<double> kato_integrand(const Trajectory& traj, double nu) {
  if (traj.vorticity.empty()) throw DomainError("kato_integrand: empty trajectory");
  std::vector<double> out;
  out.reserve(traj.vorticity.size());
  for (const auto& w : traj.vorticity) {
    const auto& g = w.grid();
    double s = 0.0;
    std::vector<double> sq(g.size());
    for (int a = -w.truncation(); a <= w.truncation(); ++a) {
      const auto& m = w.mode(a);
      for (std::size_t j = 0; j < g.size(); ++j) sq[j] = std::norm(m[j]);
      s += integrate(g, sq);
    }
    out.push_back(nu * 2.0 * std::numbers::pi * s);
  }
  return out;
}

double kato_functional(const Trajectory& traj, double nu) {
  const auto f = kato_integrand(traj, nu);
  if (traj.times.size() != f.size()) throw DomainError("kato_functional: times and states differ in length");
  double s = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) s += 0.5 * (f[i] + f[i - 1]) * (traj.times[i] - traj.times[i - 1]);
  return s;
}

double velocity_lp_difference(const Velocity& a, const Velocity& b, double p, std::size_t nx) {
  if (!(p >= 1.0)) throw DomainError("velocity_lp_difference: p must be >= 1");
  const auto d1 = inverse_transform(a.u1 - b.u1, nx);
  const auto d2 = inverse_transform(a.u2 - b.u2, nx);
  const auto& g = *d1.grid;
  std::vector<double> row(g.size());
  const double hx = 2.0 * std::numbers::pi / static_cast<double>(nx);
  for (std::size_t j = 0; j < g.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      const double m2 = d1.at(i, j) * d1.at(i, j) + d2.at(i, j) * d2.at(i, j);
      s += std::pow(m2, 0.5 * p);
    }
    row[j] = hx * s;
  }
  return std::pow(std::max(integrate(g, row), 0.0), 1.0 / p);
}

double velocity_sup(const Velocity& u, std::size_t nx) {
  const auto p1 = inverse_transform(u.u1, nx);
  const auto p2 = inverse_transform(u.u2, nx);
  double m = 0.0;
  for (std::size_t k = 0; k < p1.values.size(); ++k) m = std::max(m, std::hypot(p1.values[k], p2.values[k]));
  return m;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need at least two matched points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("loglog_slope: x values are all equal");
  return (n * sxy - sx * sy) / den;
}

SolverConfig sweep_solver_config(const ExperimentConfig& cfg) {
  auto c = adopt_datum_grid(cfg.solver, cfg.datum);
  const auto nus = cfg.nu_list.empty() ? default_nu_ladder() : cfg.nu_list;
  const double nu_min = *std::min_element(nus.begin(), nus.end());
  if (!(c.delta_ref > 0.0)) c.delta_ref = std::min(std::sqrt(nu_min), std::sqrt(nu_min * c.dt));
  c.nu = nu_min;
  return c;
}

SweepTable run_sweep(const ExperimentConfig& cfg_in, bool with_euler) {
  auto cfg = cfg_in;
  if (cfg.nu_list.empty()) cfg.nu_list = default_nu_ladder();
  cfg.command = with_euler ? CommandKind::sweep_inviscid : CommandKind::sweep_kato;
  cfg.validate();
  const auto base = sweep_solver_config(cfg);
  const auto grid = base.make_grid();
  const auto w0 = resolve_datum(cfg.datum, grid, base.K);
  const std::size_t nx = base.resolved_nx();

  SweepTable table;
  table.with_euler = with_euler;

  Trajectory euler;
  std::vector<Velocity> euler_u;
  if (with_euler) {
    auto e = base;
    e.nu = 0.0;
    euler = run_euler(e, w0);
    if (!euler.complete) {
      table.complete = false;
      table.failure = "euler reference: " + euler.failure;
      return table;
    }
    for (std::size_t i = 0; i < euler.vorticity.size(); ++i) euler_u.push_back(euler.velocity(i));
  }

  auto member = [&](double nu) {
    auto c = base;
    c.nu = nu;
    SweepRow row;
    row.nu = nu;
    const auto traj = run_navier_stokes(c, w0);
    if (!traj.complete) {
      row.complete = false;
      return std::make_pair(row, traj.failure);
    }
    row.kato = kato_functional(traj, nu);
    for (int it : traj.iterations) row.picard_iterations += it;
    const auto c0 = bl_profile_fit(traj, nu, kDefaultBeta, kDefaultP, nx);
    row.max_c0 = sup_of(c0);
    for (std::size_t i = 0; i < traj.vorticity.size(); ++i) {
      const auto u = traj.velocity(i);
      row.sup_u = std::max(row.sup_u, velocity_sup(u, nx));
      if (!with_euler) continue;
      if (i >= euler.times.size() || std::abs(euler.times[i] - traj.times[i]) > 1e-12 * std::max(1.0, c.T)) {
        row.complete = false;
        return std::make_pair(row, std::string("stored times differ from the Euler reference"));
      }
      row.sup_l2 = std::max(row.sup_l2, velocity_lp_difference(u, euler_u[i], 2.0, nx));
      row.sup_l4 = std::max(row.sup_l4, velocity_lp_difference(u, euler_u[i], 4.0, nx));
    }
    return std::make_pair(row, std::string());
  };

  const auto jobs = static_cast<std::size_t>(std::max(1, cfg.jobs));
  for (std::size_t start = 0; start < cfg.nu_list.size() && table.complete; start += jobs) {
    std::vector<std::future<std::pair<SweepRow, std::string>>> batch;
    const std::size_t end = std::min(cfg.nu_list.size(), start + jobs);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, member, cfg.nu_list[i]));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::pair<SweepRow, std::string> r;
      try {
        r = batch[i].get();
      } catch (const std::exception& e) {
        r.first.nu = cfg.nu_list[start + i];
        r.first.complete = false;
        r.second = e.what();
      }
      if (!table.complete) continue;
      if (!r.first.complete) {
        table.complete = false;
        table.failure = "nu = " + format_number(r.first.nu) + ": " + r.second;
        continue;
      }
      table.rows.push_back(r.first);
    }
  }

  if (table.rows.size() >= 2) {
    std::vector<double> nus, katos;
    for (const auto& r : table.rows) {
      nus.push_back(r.nu);
      katos.push_back(r.kato);
    }
    if (std::all_of(katos.begin(), katos.end(), [](double k) { return k > 0.0; })) {
      table.kato_slope = loglog_slope(nus, katos);
    }
    if (with_euler) {
      for (std::size_t i = 1; i < table.rows.size(); ++i) {
        const auto& a = table.rows[i - 1];
        const auto& b = table.rows[i];
        const double ratio = b.sup_l2 > 0.0 ? a.sup_l2 / b.sup_l2 : std::numeric_limits<double>::infinity();
        table.l2_reduction.push_back(ratio);
        table.l2_reduction_per4.push_back(std::pow(ratio, std::log(4.0) / std::log(a.nu / b.nu)));
      }
    }
  }
  return table;
}

nlohmann::json to_json(const SweepTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json j{{"nu", r.nu},
                     {"kato", r.kato},
                     {"sup_u", r.sup_u},
                     {"max_c0", r.max_c0},
                     {"picard_iterations", r.picard_iterations},
                     {"complete", r.complete}};
    if (t.with_euler) {
      j["sup_l2"] = r.sup_l2;
      j["sup_l4"] = r.sup_l4;
    }
    rows.push_back(j);
  }
  nlohmann::json j{{"rows", rows}, {"with_euler", t.with_euler}, {"complete", t.complete}, {"failure", t.failure},
                   {"kato_slope", t.kato_slope}};
  if (t.with_euler) {
    j["l2_reduction"] = t.l2_reduction;
    j["l2_reduction_per4"] = t.l2_reduction_per4;
  }
  return j;
}

std::string to_csv(const SweepTable& t) {
  std::string s = std::string(kSweepVersion) + "\nnu,kato,sup_l2,sup_l4,sup_u,max_c0,picard_iterations\n";
  for (const auto& r : t.rows) {
    s += format_number(r.nu) + "," + format_number(r.kato) + "," + (t.with_euler ? format_number(r.sup_l2) : "") +
         "," + (t.with_euler ? format_number(r.sup_l4) : "") + "," + format_number(r.sup_u) + "," +
         format_number(r.max_c0) + "," + std::to_string(r.picard_iterations) + "\n";
  }
  return s;
}

std::string timeseries_csv(const Trajectory& traj, double nu) {
  std::string s = std::string(kTimeseriesVersion) +
                  "\nt,energy,kato_integrand,u1_wall,no_slip_residual,u2_wall,divergence_residual,reality_defect,"
                  "picard_iterations,max_contraction,halvings,c0\n";
  if (traj.vorticity.empty()) return s;
  const auto kato = kato_integrand(traj, nu);
  const auto c0 = nu > 0.0 ? bl_profile_fit(traj, nu) : std::vector<double>(traj.times.size(), 0.0);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    s += format_number(traj.times[i]) + "," + format_number(traj.energy[i]) + "," + format_number(kato[i]) + "," +
         format_number(traj.u1_wall[i]) + "," + format_number(traj.no_slip_residual[i]) + "," +
         format_number(traj.u2_wall[i]) + "," + format_number(traj.divergence_residual[i]) + "," +
         format_number(traj.reality_defect[i]) + "," + std::to_string(traj.iterations[i]) + "," +
         format_number(traj.max_contraction[i]) + "," + std::to_string(traj.halvings[i]) + "," +
         (nu > 0.0 ? format_number(c0[i]) : "") + "\n";
  }
  return s;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  OutputDir out(cfg.out_dir);
  RunReport report;
  report.command = cfg.command;
  report.out_dir = cfg.out_dir;
  const auto hash = cfg.hash();
  out.write("config.txt", cfg.to_text(false));

  nlohmann::json summary{{"command", to_string(cfg.command)}, {"config_hash", hash}};

  switch (cfg.command) {
    case CommandKind::verify_green: {
      const auto cross = cross_validate_green(cfg.green_samples, cfg.seed);
      out.write("green_crosscheck.csv", green_csv(cross));
      nlohmann::json bounds = nlohmann::json::array();
      for (int k = 0; k <= 1; ++k) bounds.push_back(to_json(verify_pointwise_bounds(BoundSweep{}, k)));
      out.write("bounds.json", bounds.dump(2) + "\n");
      auto cj = to_json(cross);
      summary["crosscheck"] = cj;
      summary["bounds"] = bounds;
      report.complete = cross.disagreements == 0;
      break;
    }
    case CommandKind::simulate_ns:
    case CommandKind::simulate_euler: {
      auto c = adopt_datum_grid(cfg.solver, cfg.datum);
      const bool euler = cfg.command == CommandKind::simulate_euler;
      if (euler) c.nu = 0.0;
      const auto w0 = resolve_datum(cfg.datum, c.make_grid(), c.K);
      const auto traj = euler ? run_euler(c, w0) : run_navier_stokes(c, w0);
      out.write("timeseries.csv", timeseries_csv(traj, c.nu));
      const auto ck = write_checkpoints(out, traj, c.nu, cfg.checkpoint_every, hash);
      summary["trajectory"] = trajectory_summary(traj, c.nu);
      summary["checkpoints"] = ck;
      report.complete = traj.complete;
      break;
    }
    case CommandKind::sweep_kato:
    case CommandKind::sweep_inviscid: {
      const bool euler = cfg.command == CommandKind::sweep_inviscid;
      const auto table = run_sweep(cfg, euler);
      out.write("sweep.csv", to_csv(table));
      summary["sweep"] = to_json(table);
      report.complete = table.complete;
      break;
    }
    case CommandKind::norms_report: {
      const auto c = adopt_datum_grid(cfg.solver, cfg.datum);
      const auto w0 = resolve_datum(cfg.datum, c.make_grid(), c.K);
      nlohmann::json datum = nlohmann::json::object();
      const auto p = BLWeightParams::at(c.nu, 0.0);
      nlohmann::json bl = nlohmann::json::array();
      for (double rho : {0.0, 0.25, 0.5}) {
        for (int k = 0; k <= 2; ++k) {
          bl.push_back({{"rho", rho}, {"k", k}, {"value", bl_norm(w0, 0.0, rho, p, k)}});
        }
      }
      datum["bl_norms_t0"] = bl;
      nlohmann::json an = nlohmann::json::array();
      for (double rho : {0.0, 0.25, 0.5}) {
        AnalyticNormSpec s;
        s.rho = rho;
        const auto n = analytic_norms(w0, s);
        an.push_back({{"rho", rho}, {"l1", n.l1}, {"w11", n.wk1}, {"linf", n.linf}});
      }
      datum["analytic_norms"] = an;
      summary["datum"] = datum;

      const auto lemmas = verify_norm_lemmas(closed_form_corpus());
      summary["lemmas"] = to_json(lemmas);

      const auto traj = run_navier_stokes(c, w0);
      IterativeNormSpec ispec;
      ispec.gamma = 0.5 * ispec.rho0 / c.T;
      const auto it = iterative_norms(traj, ispec, c.nu);
      summary["iterative_norms"] = to_json(it);
      const auto c0 = bl_profile_fit(traj, c.nu);
      std::string csv = std::string(kTimeseriesVersion) + "\nt,c0\n";
      for (std::size_t i = 0; i < c0.size(); ++i) csv += format_number(traj.times[i]) + "," + format_number(c0[i]) + "\n";
      out.write("profile_fit.csv", csv);
      summary["trajectory"] = trajectory_summary(traj, c.nu);
      summary["max_c0"] = sup_of(c0);
      report.complete = traj.complete;
      break;
    }
  }

  summary["complete"] = report.complete;
  auto files = out.files();
  files.push_back("summary.json");
  std::sort(files.begin(), files.end());
  summary["files"] = files;
  out.write("summary.json", summary.dump(2) + "\n");
  const nlohmann::json meta{{"created", utc_now()}, {"config_hash", hash}, {"command", to_string(cfg.command)}};
  write_file_atomic(out.path() / "run_meta.json", meta.dump(2) + "\n");
  report.summary = summary;
  report.files = files;
  report.files.push_back("run_meta.json");
  std::sort(report.files.begin(), report.files.end());
  return report;
}

}  // namespace hsns
