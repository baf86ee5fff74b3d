#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "twoclass/mg1.hpp"
#include "twoclass/mmk.hpp"

namespace twoclass {

struct ClassMeasures {
  double p_serve = 0.0;        // P(T > W)
  double awt = 0.0;            // E min(W, T)
  double wait_served = 0.0;    // E(W | T > W)
  double wait_reneged = 0.0;   // E(min(W, T) | T <= W)
  double lq = 0.0;             // mean number waiting
  double l_total = 0.0;        // mean number waiting or in service
  double throughput = 0.0;
  double reneging_rate = 0.0;
};

/// Per-class and aggregate steady-state measures. Probabilities are
/// fractions; times are in the configuration's time unit. A class with no
/// arrivals reports all zeros, as does the aggregate of an empty system.
struct PerformanceReport {
  std::array<ClassMeasures, 2> classes;
  double utilization = 0.0;  // fraction of servers busy
  double throughput = 0.0;
  double reneging_rate = 0.0;
  double pct_served_all = 0.0;
  double overall_awt = 0.0;
  double avg_service_time_served = 0.0;
  double class2_share_of_served = 0.0;
};

PerformanceReport measures_mmk(const MmkSolution& solution,
                               const MmkConfig& config);

PerformanceReport measures_mg1(const Mg1Solution& solution,
                               const Mg1Config& config);

/// Convenience wrappers: solve then convert.
PerformanceReport evaluate(const MmkConfig& config);
PerformanceReport evaluate(const Mg1Config& config);

/// Flat (name, value) view in a fixed order, used for output and for
/// field-wise comparisons. Class fields are suffixed _1 and _2.
std::vector<std::pair<std::string, double>> report_fields(
    const PerformanceReport& report);

/// Names of report_fields in order.
const std::vector<std::string>& report_field_names();

/// Inverse of report_fields; throws std::invalid_argument on a length mismatch.
PerformanceReport report_from_values(const std::vector<double>& values);

}  // namespace twoclass
