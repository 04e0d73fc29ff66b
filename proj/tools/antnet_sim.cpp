// Command-line experiment runner.
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "antsim/antsim.hpp"

namespace {

std::filesystem::path output_dir(const antsim::ExperimentConfig& c, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!c.output_dir.empty()) return c.output_dir;
  return std::filesystem::path("results") / c.name;
}

int cmd_run(const std::string& config, const std::string& out, int trials, long long seed,
            const std::string& algorithm) {
  antsim::ExperimentConfig c = antsim::load_config_file(config);
  if (!algorithm.empty()) {
    c.algorithm = algorithm;
    c.name += "_" + algorithm;
  }
  if (trials > 0) c.trials = trials;
  if (seed >= 0) c.master_seed = static_cast<std::uint64_t>(seed);
  const auto dir = output_dir(c, out);
  antsim::run_configured(c, dir, &std::cerr);
  std::cout << "results written to " << dir.string() << '\n';
  return 0;
}

int cmd_sweep_rate(const std::string& config, const std::vector<double>& rates, const std::string& out, int trials,
                   long long seed) {
  antsim::ExperimentConfig c = antsim::load_config_file(config);
  if (trials > 0) c.trials = trials;
  if (seed >= 0) c.master_seed = static_cast<std::uint64_t>(seed);
  const auto dir = output_dir(c, out);
  auto rows = antsim::sweep_ant_rate(c, rates, &dir, &std::cerr);
  const std::string csv = antsim::rate_rows_csv(rows);
  antsim::write_text(dir / "sweep_rate.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_topo_stats(const std::string& name) {
  antsim::Topology t = antsim::resolve_topology(name);
  antsim::TopologyStats s = antsim::topology_stats(t);
  std::cout << std::fixed << std::setprecision(4) << t.name() << ": mean_hops " << s.mean_hops << ", stddev_hops "
            << s.stddev_hops << ", nodes " << s.node_count << ", directed_links " << t.links().size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet-network routing simulator (AntNet and competitors)"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int trials = 0;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "Run a multi-trial experiment from a JSON config");
  run->add_option("config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory");
  run->add_option("--trials", trials, "Override the number of trials")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Override the master seed")->check(CLI::NonNegativeNumber);
  std::string algorithm;
  run->add_option("--algorithm", algorithm, "Override the routing algorithm")
      ->check(CLI::IsMember(antsim::algorithm_names()));

  std::vector<double> rates;
  auto* sweep = app.add_subcommand("sweep-rate", "Sweep the ant launch interval and report power vs overhead");
  sweep->add_option("config", config, "Experiment config file (algorithm must be antnet)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--rates", rates, "Launch intervals in seconds")->required();
  sweep->add_option("--out", out, "Output directory");
  sweep->add_option("--trials", trials, "Override the number of trials")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "Override the master seed")->check(CLI::NonNegativeNumber);

  std::string topo;
  auto* stats = app.add_subcommand("topo-stats", "Print hop statistics of a topology");
  stats->add_option("topology", topo, "Built-in name (simplenet, nsfnet, nttnet) or topology file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, out, trials, seed, algorithm);
    if (*sweep) return cmd_sweep_rate(config, rates, out, trials, seed);
    if (*stats) return cmd_topo_stats(topo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
