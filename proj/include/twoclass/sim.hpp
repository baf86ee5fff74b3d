#pragma once

// Discrete-event simulation of the two-class FCFS multi-server queue with
// abandonment. Patience applies to waiting only; expired customers are
// discarded lazily when a server looks for the next customer.

#include <array>
#include <cstdint>
#include <vector>

#include "twoclass/measures.hpp"
#include "twoclass/model.hpp"

namespace twoclass {

struct SimConfig {
  int servers = 1;
  std::array<ClassParams, 2> classes;
  long horizon = 1'000'000;  // arrivals per replication, both classes
  double warmup = 0.1;       // leading fraction of arrivals discarded
  int replications = 10;
  std::uint64_t seed = 1;
  /// Recompute every wait from the server free-time recursion and compare.
  bool track_virtual_wait = false;
  /// Worker threads; 0 reads TWOCLASS_THREADS, falling back to the number
  /// of hardware threads.
  int threads = 0;

  void validate() const;
};

SimConfig sim_config(const MmkConfig& config);
SimConfig sim_config(const Mg1Config& config);

/// Customer accounting over the counted arrivals of one replication, taken
/// at the epoch of the last arrival.
struct ReplicationCounts {
  std::array<long, 2> arrivals{};
  std::array<long, 2> served{};      // service completed
  std::array<long, 2> reneged{};     // patience expired while waiting
  std::array<long, 2> in_system{};   // waiting or in service

  bool conserved() const;
};

struct ReplicationResult {
  PerformanceReport report;
  ReplicationCounts counts;
  long virtual_checked = 0;
  long virtual_outcome_mismatches = 0;
  double virtual_wait_max_error = 0.0;
};

struct SimEstimate {
  PerformanceReport mean;
  /// Half-widths of 95% Student-t intervals across replications (0 with a
  /// single replication).
  PerformanceReport half_width;
  std::vector<ReplicationCounts> counts;
  long virtual_checked = 0;
  long virtual_outcome_mismatches = 0;
  double virtual_wait_max_error = 0.0;

  /// True when |value - mean| <= half_width for the named report field.
  bool covers(const std::string& field, double value) const;
};

ReplicationResult simulate_replication(const SimConfig& config, int index);

SimEstimate simulate(const SimConfig& config);

}  // namespace twoclass
