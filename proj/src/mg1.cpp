#include "twoclass/mg1.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <vector>

namespace twoclass {

namespace {

struct Branch {
  int cls;
  double weight;
  double rate;
};

/// Branches that actually generate lattice steps (nonzero arrival rate and
/// weight).
std::vector<Branch> active_branches(const Mg1Config& config) {
  std::vector<Branch> out;
  for (int c = 0; c < 2; ++c) {
    if (config.classes[c].arrival_rate == 0.0) continue;
    for (const auto& b : config.classes[c].patience.branches()) {
      if (b.weight > 0.0) out.push_back({c, b.weight, b.rate});
    }
  }
  return out;
}

/// Lexicographic ranking of weak compositions of a level into a fixed number
/// of parts.
class CompositionIndex {
 public:
  explicit CompositionIndex(int parts) : parts_(parts) {}

  /// Number of weak compositions of m into r parts.
  std::uint64_t count(int m, int r) const {
    if (r == 0) return m == 0 ? 1 : 0;
    return binom(m + r - 1, r - 1);
  }

  std::uint64_t level_size(int level) const { return count(level, parts_); }

  std::uint64_t rank(const std::vector<int>& idx, int level) const {
    std::uint64_t rk = 0;
    int remaining = level;
    for (int t = 0; t + 1 < parts_; ++t) {
      const int r = parts_ - 1 - t;
      // compositions with a smaller value at position t
      rk += binom(remaining + r, r) - binom(remaining - idx[t] + r, r);
      remaining -= idx[t];
    }
    return rk;
  }

  /// Advance idx to the next composition of the same level in lex order.
  static bool next(std::vector<int>& idx) {
    const int parts = static_cast<int>(idx.size());
    if (parts == 1) return false;
    // Find the rightmost position (excluding the last) that can grow.
    int tail = idx[parts - 1];
    for (int t = parts - 2; t >= 0; --t) {
      if (tail > 0) {
        ++idx[t];
        const int moved = tail - 1;
        for (int u = t + 1; u < parts; ++u) idx[u] = 0;
        idx[parts - 1] = moved;
        return true;
      }
      tail += idx[t];
    }
    return false;
  }

 private:
  static std::uint64_t binom(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
  }

  int parts_;
};

constexpr std::uint64_t kMaxLevelSize = 20'000'000;

}  // namespace

CSeriesResult c_series(const Mg1Config& config, double s) {
  if (!(s > 0.0)) throw std::domain_error("c_series: s must be positive");

  const std::vector<Branch> branches = active_branches(config);
  const int parts = static_cast<int>(branches.size());
  TruncationMonitor monitor(config.series);

  CSeriesResult out;
  out.value = {1.0, 0.0};
  out.derivative = {0.0, 0.0};
  monitor.add_diagonal(0.0);  // c_0 = 1
  if (parts == 0) {
    monitor.add_diagonal(-std::numeric_limits<double>::infinity());
    out.diagnostics = monitor.diagnostics();
    return out;
  }

  const CompositionIndex index(parts);
  // Level storage (normalized) for c and c'.
  std::vector<double> prev_c{1.0}, prev_d{0.0}, cur_c, cur_d;
  double prev_log = 0.0;

  double acc_c = 1.0, acc_d = 0.0, acc_log = 0.0;

  std::vector<int> idx(parts), pred(parts);
  for (int level = 1;; ++level) {
    const std::uint64_t size = index.level_size(level);
    if (size > kMaxLevelSize) {
      out.diagnostics = monitor.diagnostics();
      out.diagnostics.converged = false;
      break;
    }
    cur_c.assign(size, 0.0);
    cur_d.assign(size, 0.0);

    std::fill(idx.begin(), idx.end(), 0);
    idx[parts - 1] = level;
    std::uint64_t pos = 0;
    double max_abs = 0.0;
    do {
      double shift = s;
      for (int b = 0; b < parts; ++b) shift += idx[b] * branches[b].rate;
      double vc = 0.0, vd = 0.0;
      for (int b = 0; b < parts; ++b) {
        if (idx[b] == 0) continue;
        pred = idx;
        --pred[b];
        const std::uint64_t pr = index.rank(pred, level - 1);
        const double x = shift - branches[b].rate;
        const auto& cls = config.classes[branches[b].cls];
        const double h = branches[b].weight * equilibrium_factor(cls, x);
        const double hd =
            branches[b].weight * equilibrium_factor_derivative(cls, x);
        vc += h * prev_c[pr];
        vd += h * prev_d[pr] + hd * prev_c[pr];
      }
      cur_c[pos] = vc;
      cur_d[pos] = vd;
      max_abs = std::max({max_abs, std::abs(vc), std::abs(vd)});
      ++pos;
    } while (CompositionIndex::next(idx));

    double level_log = -std::numeric_limits<double>::infinity();
    double sum_c = 0.0, sum_d = 0.0, mass = 0.0;
    if (max_abs > 0.0) {
      for (std::uint64_t p = 0; p < size; ++p) {
        cur_c[p] /= max_abs;
        cur_d[p] /= max_abs;
        sum_c += cur_c[p];
        sum_d += cur_d[p];
        mass += std::abs(cur_c[p]) + std::abs(cur_d[p]);
      }
      level_log = prev_log + std::log(max_abs);
      if (level_log > acc_log) {
        const double f = std::exp(acc_log - level_log);
        acc_c = acc_c * f + sum_c;
        acc_d = acc_d * f + sum_d;
        acc_log = level_log;
      } else {
        const double f = std::exp(level_log - acc_log);
        acc_c += sum_c * f;
        acc_d += sum_d * f;
      }
    }
    const double log_mass =
        mass > 0.0 ? level_log + std::log(mass)
                   : -std::numeric_limits<double>::infinity();
    const bool stop = monitor.add_diagonal(log_mass);
    std::swap(prev_c, cur_c);
    std::swap(prev_d, cur_d);
    prev_log = level_log;
    if (stop) {
      out.diagnostics = monitor.diagnostics();
      break;
    }
  }
  out.value = {acc_c, acc_log};
  out.derivative = {acc_d, acc_log};
  return out;
}

Mg1Solution solve_mg1(const Mg1Config& config) {
  config.validate();

  // Every patience rate of either class is an evaluation point.
  struct Point {
    double rate;
    CSeriesResult series;
  };
  std::vector<Point> points;
  for (const auto& cls : config.classes) {
    for (const auto& b : cls.patience.branches()) {
      const bool seen = std::any_of(points.begin(), points.end(),
                                    [&](const Point& p) { return p.rate == b.rate; });
      if (!seen) points.push_back({b.rate, c_series(config, b.rate)});
    }
  }

  Mg1Solution sol;
  for (const auto& p : points) {
    const auto& d = p.series.diagnostics;
    if (!d.converged) {
      std::ostringstream msg;
      msg << "M/G/1 series at s=" << p.rate << " did not converge within "
          << config.series.max_diagonal << " diagonals";
      throw ConvergenceError(msg.str());
    }
    sol.truncation_diagonal_used =
        std::max(sol.truncation_diagonal_used, d.diagonals_used);
    sol.tail_bound = std::max(sol.tail_bound, d.tail_bound);
  }

  // p0 = [1 + sum_b w_b c(theta_b) lambda_i tau_i]^{-1}, carried in scaled
  // form relative to the largest log scale.
  double log_max = 0.0;
  for (const auto& p : points)
    log_max = std::max(log_max, p.series.value.log_scale);
  auto rescaled = [&](const ScaledValue& v) {
    return v.mantissa * std::exp(v.log_scale - log_max);
  };

  double denom = std::exp(-log_max);
  for (const auto& cls : config.classes) {
    const double load = cls.arrival_rate * cls.service.mean();
    for (const auto& b : cls.patience.branches()) {
      const auto it = std::find_if(points.begin(), points.end(),
                                   [&](const Point& p) { return p.rate == b.rate; });
      denom += b.weight * load * rescaled(it->series.value);
    }
  }
  // p0 * exp(log_max)
  const double beta = 1.0 / denom;
  sol.p0 = beta * std::exp(-log_max);
  if (!(sol.p0 > 0.0 && sol.p0 <= 1.0 + 1e-12)) {
    // An underflowed p0 in extreme overload is genuine, not a failure.
    if (!(sol.p0 == 0.0 && log_max > 700.0)) {
      std::ostringstream msg;
      msg << "M/G/1 boundary probability p0=" << sol.p0
          << " outside (0,1]; truncation too coarse";
      throw SingularSystem(msg.str());
    }
  }
  sol.p0 = std::min(sol.p0, 1.0);

  for (const auto& p : points) {
    sol.psi_at[p.rate] = beta * rescaled(p.series.value);
    sol.dpsi_at[p.rate] = beta * rescaled(p.series.derivative);
  }
  return sol;
}

}  // namespace twoclass
