#pragma once

// Multi-server two-class FCFS queue with exponential service and patience.
//
// State of the augmented virtual-queueing-time process: (W, N1, N2) where
// N1 + N2 <= k - 1 counts busy servers (by class) just before a virtual
// arrival would enter service. Boundary atoms p_n = P(W = 0, N1 + N2 = n)
// are indexed by the number of class-1 servers, and the row vector
// psi(s) = [E(exp(-sW); N1 = i, N2 = k-1-i)]_i satisfies
//
//   psi(s) = p_{k-1} D(s) + psi(s + theta_1) H_1(s) + psi(s + theta_2) H_2(s)
//
// whose solution is psi(s) = p_{k-1} C(s) with C(s) a matrix path sum.

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "twoclass/model.hpp"
#include "twoclass/series.hpp"

namespace twoclass {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;  // row vectors of the theory stored as columns

/// Birth-death structure of the W = 0 boundary.
struct BoundaryMatrices {
  int servers = 0;
  std::vector<Matrix> arrivals;  // Lambda_n: (n+1) x (n+2)
  std::vector<Matrix> services;  // M_n: (n+1) x n (n >= 1; index 0 empty)
  std::vector<Matrix> rates;     // Delta_n: (n+1) x (n+1) diagonal
  std::vector<Matrix> reduction; // R_n: (n+1) x n (n >= 1; index 0 empty)

  /// Delta_{k-1} - R_{k-1} Lambda_{k-2}
  Matrix boundary_generator() const;
};

/// Builds Lambda_n, M_n, Delta_n for n < k and the reduction matrices R_n.
/// Requires k >= 2 and a positive total arrival rate; throws SingularSystem
/// if the R recursion meets a singular matrix.
BoundaryMatrices build_boundary(const MmkConfig& config);

struct JumpMatrices {
  Matrix a1, a2;  // A_i(s)
  Matrix d;       // D(s)
  Matrix h1, h2;  // H_i(s) = A_i(s) / s
};

/// A_1(s), A_2(s), D(s), H_1(s), H_2(s) for s > 0.
JumpMatrices jump_matrices(const MmkConfig& config,
                           const BoundaryMatrices& boundary, double s);

/// A_1(s) and A_2(s) alone; valid for s >= 0.
std::array<Matrix, 2> arrival_jump_matrices(const MmkConfig& config, double s);

/// d/ds A_1(s) and d/ds A_2(s) in closed form; valid for s >= 0.
std::array<Matrix, 2> arrival_jump_derivatives(const MmkConfig& config,
                                               double s);

/// C(s) and C'(s) in scaled form: the true matrices are
/// c * exp(log_scale) and dc * exp(log_scale).
struct CMatrixSeries {
  Matrix c;
  Matrix dc;
  double log_scale = 0.0;
  SeriesDiagnostics diagnostics;
};

/// Accumulates C(s) and C'(s) jointly over anti-diagonals. Does not throw on
/// non-convergence; check diagnostics.converged.
CMatrixSeries c_matrix_series(const MmkConfig& config,
                              const BoundaryMatrices& boundary, double s);

enum class SolutionPath {
  kEmpty,         // no arrivals
  kSingleServer,  // k == 1, solved as M/G/1+M
  kGeneral,       // matrix solver
  kEqualMu,       // scalar recursion for mu_1 == mu_2
};

enum class SolutionForm {
  kFull,        // p_n has n+1 entries, psi vectors have k entries
  kAggregated,  // every vector holds a single entry: its sum over N1
};

struct MmkSolution {
  SolutionPath path = SolutionPath::kGeneral;
  SolutionForm form = SolutionForm::kFull;
  std::vector<Vector> p_vectors;    // n = 0..k-1
  std::array<Vector, 2> psi_theta;  // psi(theta_1), psi(theta_2)
  std::array<Vector, 2> dpsi_theta; // psi'(theta_1), psi'(theta_2)
  Vector phi0;                      // phi(0)
  int truncation_diagonal_used = 0;
  /// Estimated relative error of psi from series truncation, including the
  /// amplification by cancellation in p_{k-1} C(s).
  double tail_bound = 0.0;
  /// Decimal digits of the arithmetic used (16 for double).
  int working_digits = 16;
  /// log10 of the cancellation ratio |p_{k-1}| |C| e / |p_{k-1} C e|.
  double cancellation_digits = 0.0;

  /// sum_{n < k-1} p_n e
  double idle_mass() const;
  /// P(T_i > W), i in {0, 1}
  double p_serve(int cls) const;
  /// E(W exp(-theta_i W)) = -psi'(theta_i) e
  double wait_moment(int cls) const;
  /// sum_n p_n e + phi(0) e
  double total_mass() const;
};

/// Full solver. k == 1 is routed to the M/G/1+M solver; an empty system
/// (no arrivals) returns the trivial solution. psi(theta) = p_{k-1} C(theta)
/// cancels heavily when the load is high, so the solve is repeated in MPFR
/// arithmetic when double precision cannot carry the lost digits (see
/// SeriesControl::working_digits). Throws ConvergenceError or SingularSystem
/// on numerical failure.
MmkSolution solve_mmk(const MmkConfig& config);

/// Scalar recursion for mu_1 == mu_2 (any k >= 1). Returns aggregated form.
/// Throws InvalidModel if the service rates differ.
MmkSolution solve_mmk_equal_mu(const MmkConfig& config);

}  // namespace twoclass
