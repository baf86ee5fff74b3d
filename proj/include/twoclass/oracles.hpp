#pragma once

// Single-class M/M/k+M (Erlang-A) reference solution by birth-death truncation.

#include <stdexcept>

#include "twoclass/model.hpp"

namespace twoclass {

struct ErlangAParams {
  double lambda = 0.0;
  double mu = 1.0;
  double theta = 1.0;
  int servers = 1;
  long truncation = 100000;  // initial number of states; doubled as needed
};

struct ErlangAResult {
  double p_serve = 1.0;
  double awt = 0.0;
  double lq = 0.0;
  double utilization = 0.0;
  long states_used = 0;
  double tail_mass = 0.0;  // stationary mass of the last retained state
};

class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws InvalidModel for bad parameters and TruncationError when the tail
/// mass stays above 1e-12 up to 2^26 states.
ErlangAResult erlang_a(const ErlangAParams& params);

/// Both classes merged into one Erlang-A stream. Requires equal service
/// rates and equal patience rates.
ErlangAResult erlang_a_pooled(const MmkConfig& config);

}  // namespace twoclass
