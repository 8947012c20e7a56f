#pragma once

// Experiment harness: configuration files, initial data, the Kato and
// inviscid-limit sweeps, and deterministic report emission.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hsns/biot_savart.hpp"
#include "hsns/ns_solver.hpp"

namespace hsns {

enum class CommandKind { verify_green, simulate_ns, simulate_euler, sweep_kato, sweep_inviscid, norms_report };

std::string to_string(CommandKind c);
CommandKind parse_command(const std::string& s);

/// "name", "name:key=value,key=value" or "checkpoint:PATH".
struct DatumSpec {
  std::string name;
  std::map<std::string, double> params;
  std::string checkpoint;

  static DatumSpec parse(const std::string& text);
  bool is_checkpoint() const { return !checkpoint.empty(); }
};

struct ExperimentConfig {
  CommandKind command = CommandKind::simulate_ns;
  SolverConfig solver;
  std::vector<double> nu_list;
  std::string datum = "wall_mode";
  std::string out_dir = "hslab_out";
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // stored steps between checkpoints; 0 disables
  std::size_t green_samples = 200;
  int jobs = 1;              // concurrent sweep members

  void validate() const;
  /// Canonical "key = value" text, one key per line in a fixed order. Without
  /// `with_location` the keys that do not affect results (out, jobs) are omitted.
  std::string to_text(bool with_location = true) const;
  /// FNV-1a of to_text(false), as 16 hex digits.
  std::string hash() const;
};

/// Flat "key = value" lines; '#' starts a comment. Unknown keys raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// "key=value".
void apply_override(ExperimentConfig& cfg, const std::string& key_value);
std::vector<std::string> config_keys();

/// The ladder used by the sweeps when nu_list is empty.
std::vector<double> default_nu_ladder();

/// Initial vorticity on `grid` with truncation K.
SpectralField resolve_datum(const std::string& descriptor, std::shared_ptr<const GradedGrid> grid, int K);

/// nu * 2 pi * sum_alpha int |w_alpha|^2 dz at each stored time.
std::vector<double> kato_integrand(const Trajectory& traj, double nu);
/// Trapezoid in time of kato_integrand.
double kato_functional(const Trajectory& traj, double nu);

/// (int int |a - b|^p dx dz)^{1/p} with |.| the Euclidean norm of the velocity, on nx points in x.
double velocity_lp_difference(const Velocity& a, const Velocity& b, double p, std::size_t nx);
double velocity_sup(const Velocity& u, std::size_t nx);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepRow {
  double nu = 0.0;
  double kato = 0.0;
  double sup_l2 = 0.0;
  double sup_l4 = 0.0;
  double sup_u = 0.0;  // sup_t sup_{x,z} |u^nu|
  double max_c0 = 0.0; // sup_t of the boundary-layer profile constant
  int picard_iterations = 0;
  bool complete = true;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  bool with_euler = false;
  bool complete = true;
  std::string failure;
  double kato_slope = 0.0;
  /// sup-L2 ratio between consecutive rows, and the same ratio rescaled to a
  /// factor-4 change in nu: ratio^{log 4 / log(nu_i / nu_{i+1})}.
  std::vector<double> l2_reduction;
  std::vector<double> l2_reduction_per4;
};

/// The solver configuration shared by all sweep members: the grid is resolved
/// for the smallest viscosity of the ladder.
SolverConfig sweep_solver_config(const ExperimentConfig& cfg);

/// Kato functional (and, with `with_euler`, sup_t ||u^nu - u^0||_{L^p}, p = 2, 4)
/// along cfg.nu_list. A failed member stops the sweep; the table keeps the
/// completed rows.
SweepTable run_sweep(const ExperimentConfig& cfg, bool with_euler);
inline SweepTable inviscid_limit_study(const ExperimentConfig& cfg) { return run_sweep(cfg, true); }

nlohmann::json to_json(const SweepTable& t);
std::string to_csv(const SweepTable& t);

/// Time series CSV of a trajectory (version line, header, one row per stored time).
std::string timeseries_csv(const Trajectory& traj, double nu);

struct RunReport {
  CommandKind command = CommandKind::simulate_ns;
  std::filesystem::path out_dir;
  std::vector<std::string> files;  // relative to out_dir
  nlohmann::json summary;
  bool complete = true;
};

/// Runs the configured command and writes its outputs under cfg.out_dir.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Deterministic number formatting used by every report.
std::string format_number(double v);

}  // namespace hsns
