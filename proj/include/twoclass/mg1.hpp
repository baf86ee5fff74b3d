#pragma once

// Single-server two-class FCFS queue with general service and exponential
// (or hyper-exponential) patience.
//
// The LST of the stationary virtual queueing time W satisfies
//
//   psi(s) = p0 + sum_b w_b * psi(s + theta_b) * H_{class(b)}(s),
//
// where b ranges over the patience branches of both classes (one branch per
// class for exponential patience) and H_i is the equilibrium factor. Its
// solution is psi(s) = p0 * c(s), with c(s) a path sum over the lattice of
// branch shifts, accumulated level by level (|n| = n_1 + ... + n_B).

#include <map>

#include "twoclass/model.hpp"
#include "twoclass/series.hpp"

namespace twoclass {

struct CSeriesResult {
  ScaledValue value;       // c(s)
  ScaledValue derivative;  // c'(s), same log scale as value
  SeriesDiagnostics diagnostics;
};

/// c(s) and c'(s) for s > 0. Does not throw on non-convergence; check
/// diagnostics.converged.
CSeriesResult c_series(const Mg1Config& config, double s);

struct Mg1Solution {
  double p0 = 1.0;
  /// psi(theta) for every patience branch rate theta of either class.
  std::map<double, double> psi_at;
  /// psi'(theta) at the same rates (<= 0).
  std::map<double, double> dpsi_at;
  int truncation_diagonal_used = 0;
  double tail_bound = 0.0;

  double psi(double theta) const { return psi_at.at(theta); }
  double dpsi(double theta) const { return dpsi_at.at(theta); }
};

/// Throws ConvergenceError when a series does not converge within
/// max_diagonal, and SingularSystem when p0 falls outside (0, 1].
Mg1Solution solve_mg1(const Mg1Config& config);

}  // namespace twoclass
