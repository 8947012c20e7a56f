// hslab: runs one experiment command and writes its reports.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hsns/error.hpp"
#include "hsns/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Half-space Navier-Stokes laboratory"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> modes;
  std::optional<std::size_t> grid;
  std::vector<std::string> overrides;
  bool print_config = false;

  app.add_option("command", command,
                 "verify-green | simulate-ns | simulate-euler | sweep-kato | sweep-inviscid | norms-report");
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for randomized sample sets");
  app.add_option("--modes", modes, "Fourier truncation K");
  app.add_option("--grid", grid, "number of wall-normal grid nodes");
  app.add_option("--override", overrides, "key=value, applied after the config file (repeatable)");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    hsns::ExperimentConfig cfg = config_path.empty() ? hsns::ExperimentConfig{} : hsns::load_config(config_path);
    if (!command.empty()) cfg.command = hsns::parse_command(command);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed) cfg.seed = *seed;
    if (modes) cfg.solver.K = *modes;
    if (grid) cfg.solver.n_nodes = *grid;
    for (const auto& o : overrides) hsns::apply_override(cfg, o);
    cfg.validate();
    if (print_config) {
      std::cout << cfg.to_text();
      return 0;
    }
    const auto report = hsns::run_experiment(cfg);
    std::cout << hsns::to_string(report.command) << ": wrote " << report.files.size() << " files to "
              << report.out_dir.string() << "\n";
    for (const auto& f : report.files) std::cout << "  " << f << "\n";
    if (!report.complete) {
      std::cerr << "run incomplete; see summary.json\n";
      return 2;
    }
    return 0;
  } catch (const hsns::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
