#pragma once

// Exact two-class M/M/k+M chain with the FCFS order of the queue kept in the
// state, truncated at a maximum queue length. Independent of the LST route.

#include <array>

namespace twoclass::testing {

struct CtmcParams {
  int servers = 1;
  std::array<double, 2> lambda{};
  std::array<double, 2> mu{1.0, 1.0};
  std::array<double, 2> theta{1.0, 1.0};
  int max_queue = 12;
};

struct CtmcResult {
  std::array<double, 2> p_serve{};   // 1 - theta E[Q_c] / lambda_c
  std::array<double, 2> lq{};        // E[Q_c]
  std::array<double, 2> busy{};      // E[servers busy with class c]
  double utilization = 0.0;
  double full_queue_mass = 0.0;      // P(queue length == max_queue)
  long states = 0;
};

CtmcResult solve_ctmc(const CtmcParams& params);

}  // namespace twoclass::testing
