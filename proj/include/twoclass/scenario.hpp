#pragma once

// Scenario files: JSON documents validated against docs/scenario.schema.json
// and converted into solver and simulator configurations.
//
// Service and patience parameters, and every reported time, are in
// units.time. Arrival rates are per units.arrivals (default: units.time),
// so a call-center table with per-hour arrivals and second-valued service
// times can be entered as printed.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "twoclass/measures.hpp"
#include "twoclass/model.hpp"
#include "twoclass/sim.hpp"

namespace twoclass {

/// Malformed or schema-violating scenario input.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { kMg1, kMmk };
enum class TimeUnit { kSeconds, kMinutes, kHours };

double seconds_per(TimeUnit unit);
std::string unit_name(TimeUnit unit);

struct SimSettings {
  long horizon = 1'000'000;
  double warmup = 0.1;
  int replications = 10;
  std::uint64_t seed = 1;
};

struct Scenario {
  std::string name;
  ModelKind model = ModelKind::kMmk;
  int servers = 1;
  /// Arrival rates here are already per units.time.
  std::array<ClassParams, 2> classes;
  SeriesControl series;
  SimSettings sim;
  TimeUnit time_unit = TimeUnit::kSeconds;
  TimeUnit arrival_unit = TimeUnit::kSeconds;

  /// Converts a rate per arrival_unit into a rate per time_unit.
  double arrival_scale() const;
  /// Arrival rate of class c per arrival_unit.
  double arrival_rate(int c) const;
  /// Copy with both arrival rates replaced (given per arrival_unit).
  Scenario with_arrival_rates(double rate1, double rate2) const;

  MmkConfig mmk() const;
  Mg1Config mg1() const;
  SimConfig sim_config() const;
  /// Validates through the model's own rules; throws InvalidModel.
  void validate() const;
};

/// Schema check, then conversion. Throws ScenarioError or InvalidModel.
Scenario parse_scenario(const nlohmann::json& document,
                        const std::string& default_name = "scenario");
Scenario load_scenario(const std::string& path);

/// Analytic measures plus solver diagnostics.
struct AnalyticResult {
  PerformanceReport report;
  std::string solution_path;
  int truncation_diagonal_used = 0;
  double tail_bound = 0.0;
  int working_digits = 16;
};

/// solve_mg1 or solve_mmk according to the scenario's model.
AnalyticResult solve_scenario(const Scenario& scenario);

/// M/M/k+M with both classes served at the arrival-weighted pooled mean
/// service time, solved by the equal-rate recursion. Requires the mmk model
/// (or exponential services in mg1).
AnalyticResult solve_pooled(const Scenario& scenario);

/// Arrival-weighted average of the class mean service times.
double pooled_mean_service(const Scenario& scenario);

}  // namespace twoclass
