#pragma once

// Anti-diagonal truncation for the LST path-sum series.
//
// Series terms can grow like (lambda/theta)^n / n! before they decay, which
// overflows doubles for heavily overloaded systems. Every diagonal is
// therefore kept normalized together with a natural-log scale, and sums are
// carried as (mantissa, log_scale) pairs.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "twoclass/model.hpp"

namespace twoclass {

/// The series hit max_diagonal before the stopping rule fired.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A boundary or reduction system could not be solved.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeriesDiagnostics {
  int diagonals_used = 0;  // index of the last anti-diagonal summed
  /// Geometric estimate of the omitted tail, relative to the accumulated
  /// absolute mass of the series.
  double tail_bound = 0.0;
  bool converged = true;
};

/// value = mantissa * exp(log_scale)
struct ScaledValue {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double value() const { return mantissa * std::exp(log_scale); }
};

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// Stopping rule: stop after diagonal n once its absolute mass is below
/// tolerance times the accumulated mass and the diagonals are shrinking.
/// The tail is then estimated as mass_n * r / (1 - r), r the ratio of the
/// last two diagonal masses.
class TruncationMonitor {
 public:
  explicit TruncationMonitor(const SeriesControl& control)
      : control_(control) {}

  /// Feed log(absolute mass) of the next diagonal. Returns true when the
  /// summation should stop after this diagonal.
  bool add_diagonal(double log_mass) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    const int n = next_++;
    log_total_ = log_add_exp(log_total_, log_mass);
    const double prev = last_log_mass_;
    last_log_mass_ = log_mass;
    diag_.diagonals_used = n;

    if (log_mass == kNegInf && n > 0) {
      diag_.tail_bound = 0.0;
      diag_.converged = true;
      return true;
    }
    const double log_ratio = n > 0 ? log_mass - prev : 0.0;
    const double rel = std::exp(log_mass - log_total_);
    if (n > 0 && log_ratio < 0.0) {
      const double r = std::exp(log_ratio);
      diag_.tail_bound = rel * r / (1.0 - r);
    } else {
      diag_.tail_bound = std::numeric_limits<double>::infinity();
    }

    if (control_.fixed_diagonals > 0) {
      if (n + 1 >= control_.fixed_diagonals) {
        diag_.converged = true;
        return true;
      }
      return false;
    }
    if (n > 0 && log_ratio < 0.0 && rel < control_.tolerance) {
      diag_.converged = true;
      return true;
    }
    if (n + 1 >= control_.max_diagonal) {
      diag_.converged = false;
      return true;
    }
    return false;
  }

  const SeriesDiagnostics& diagnostics() const { return diag_; }

 private:
  SeriesControl control_;
  int next_ = 0;
  double log_total_ = -std::numeric_limits<double>::infinity();
  double last_log_mass_ = -std::numeric_limits<double>::infinity();
  SeriesDiagnostics diag_;
};

}  // namespace twoclass
