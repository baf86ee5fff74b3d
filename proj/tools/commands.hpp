#pragma once

// Subcommand implementations. Each returns the process exit code:
// 0 success, 1 malformed input, 2 solver non-convergence.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace twoclass::cli {

enum class Format { kJson, kCsv };

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitSolver = 2;

struct SolveOptions {
  Format format = Format::kJson;
};

struct SweepOptions {
  Format format = Format::kCsv;
  std::string vary = "total_arrival_rate";  // or arrival_rate_1, arrival_rate_2
  double from = 6.0;
  double to = 20.0;
  int steps = 15;
  /// Class-1 fraction of the total rate; defaults to the scenario's mix.
  std::optional<double> split;
  /// Where to write a gnuplot script for the four summary panels.
  std::string gnuplot_path;
  /// CSV file the script reads (normally the --out path).
  std::string data_path;
};

struct SimulateOptions {
  Format format = Format::kJson;
  std::optional<std::uint64_t> seed;
  std::optional<long> horizon;
  std::optional<int> replications;
  bool virtual_wait = false;
};

struct CompareOptions {
  Format format = Format::kJson;
  std::optional<std::uint64_t> seed;
  std::optional<long> horizon;
  std::optional<int> replications;
};

int cmd_solve(const std::string& scenario_path, const SolveOptions& options,
              std::ostream& out, std::ostream& err);

int cmd_sweep(const std::vector<std::string>& scenario_paths,
              const SweepOptions& options, std::ostream& out, std::ostream& err);

int cmd_simulate(const std::string& scenario_path,
                 const SimulateOptions& options, std::ostream& out,
                 std::ostream& err);

int cmd_compare(const std::string& scenario_path, const CompareOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace twoclass::cli
