// twoclass: performance of two-class FCFS queues with impatient customers.

#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace twoclass::cli;

int main(int argc, char** argv) {
  CLI::App app{"Two-class FCFS queues with abandonment: analytic solver and simulator"};
  app.require_subcommand(1);

  const std::map<std::string, Format> formats{{"json", Format::kJson},
                                              {"csv", Format::kCsv}};
  std::string out_path;
  std::string scenario;
  std::vector<std::string> scenarios;
  std::uint64_t seed = 0;
  long horizon = 0;
  int replications = 0;

  auto add_common = [&](CLI::App* sub, Format& format) {
    sub->add_option("--format", format, "Output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_option("--out", out_path, "Write output to this file instead of stdout");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Simulation seed (overrides the scenario)");
    sub->add_option("--horizon", horizon, "Arrivals per replication")->check(CLI::Range(1000L, LONG_MAX));
    sub->add_option("--replications", replications, "Independent replications")->check(CLI::PositiveNumber);
  };

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Analytic measures for one scenario");
  solve_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  add_common(solve_cmd, solve.format);

  SweepOptions sweep;
  double split = -1.0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Analytic measures over a range of arrival rates");
  sweep_cmd->add_option("scenarios", scenarios, "Scenario JSON files, one per system")->required();
  sweep_cmd->add_option("--vary", sweep.vary, "total_arrival_rate, arrival_rate_1 or arrival_rate_2")
      ->check(CLI::IsMember({"total_arrival_rate", "arrival_rate_1", "arrival_rate_2"}));
  sweep_cmd->add_option("--from", sweep.from, "First value");
  sweep_cmd->add_option("--to", sweep.to, "Last value");
  sweep_cmd->add_option("--steps", sweep.steps, "Number of points")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--split", split, "Class-1 fraction of the total arrival rate")
      ->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--gnuplot", sweep.gnuplot_path, "Also write a gnuplot script");
  add_common(sweep_cmd, sweep.format);

  SimulateOptions simulate;
  auto* sim_cmd = app.add_subcommand("simulate", "Discrete-event simulation estimates");
  sim_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  sim_cmd->add_flag("--virtual-wait", simulate.virtual_wait,
                    "Check waits against the virtual waiting time recursion");
  add_common(sim_cmd, simulate.format);
  add_sim(sim_cmd);

  CompareOptions compare;
  auto* cmp_cmd = app.add_subcommand("compare", "Analytic, pooled-rate and simulated measures side by side");
  cmp_cmd->add_option("scenario", scenario, "Scenario JSON file")->required();
  add_common(cmp_cmd, compare.format);
  add_sim(cmp_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "error: cannot open " << out_path << " for writing\n";
      return kExitInput;
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  auto set = [](auto& dst, auto* opt, auto value) {
    if (opt->count() > 0) dst = value;
  };

  if (*solve_cmd) return cmd_solve(scenario, solve, out, std::cerr);
  if (*sweep_cmd) {
    if (split >= 0.0) sweep.split = split;
    sweep.data_path = out_path;
    return cmd_sweep(scenarios, sweep, out, std::cerr);
  }
  if (*sim_cmd) {
    set(simulate.seed, sim_cmd->get_option("--seed"), seed);
    set(simulate.horizon, sim_cmd->get_option("--horizon"), horizon);
    set(simulate.replications, sim_cmd->get_option("--replications"), replications);
    return cmd_simulate(scenario, simulate, out, std::cerr);
  }
  set(compare.seed, cmp_cmd->get_option("--seed"), seed);
  set(compare.horizon, cmp_cmd->get_option("--horizon"), horizon);
  set(compare.replications, cmp_cmd->get_option("--replications"), replications);
  return cmd_compare(scenario, compare, out, std::cerr);
}
