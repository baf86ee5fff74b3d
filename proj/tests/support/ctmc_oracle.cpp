#include "ctmc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

namespace twoclass::testing {

namespace {

// Queue as a bit string (bit j set: position j holds class 2) plus length.
struct State {
  int b1, b2, q;
  std::uint32_t bits;
};

std::uint64_t key(const State& s) {
  return (std::uint64_t(s.b1) << 48) | (std::uint64_t(s.b2) << 40) |
         (std::uint64_t(s.q) << 32) | s.bits;
}

std::uint32_t remove_at(std::uint32_t bits, int j) {
  const std::uint32_t low = bits & ((1u << j) - 1u);
  const std::uint32_t high = bits >> (j + 1);
  return low | (high << j);
}

}  // namespace

CtmcResult solve_ctmc(const CtmcParams& p) {
  const int k = p.servers;
  if (p.max_queue > 20) throw std::invalid_argument("max_queue too large");
  std::vector<State> states;
  std::unordered_map<std::uint64_t, int> index;
  auto add_state = [&](const State& s) {
    index.emplace(key(s), static_cast<int>(states.size()));
    states.push_back(s);
  };
  for (int b1 = 0; b1 <= k; ++b1) {
    for (int b2 = 0; b1 + b2 <= k; ++b2) {
      if (b1 + b2 < k) {
        add_state({b1, b2, 0, 0});
        continue;
      }
      for (int q = 0; q <= p.max_queue; ++q) {
        for (std::uint32_t bits = 0; bits < (1u << q); ++bits) add_state({b1, b2, q, bits});
      }
    }
  }
  const int n = static_cast<int>(states.size());
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> out_rate(n, 0.0);
  auto add = [&](int from, const State& to, double rate) {
    if (rate <= 0.0) return;
    trip.emplace_back(index.at(key(to)), from, rate);  // transposed generator
    out_rate[from] += rate;
  };

  for (int i = 0; i < n; ++i) {
    const State s = states[i];
    if (s.b1 + s.b2 < k) {
      add(i, {s.b1 + 1, s.b2, 0, 0}, p.lambda[0]);
      add(i, {s.b1, s.b2 + 1, 0, 0}, p.lambda[1]);
    } else if (s.q < p.max_queue) {
      add(i, {s.b1, s.b2, s.q + 1, s.bits}, p.lambda[0]);
      add(i, {s.b1, s.b2, s.q + 1, s.bits | (1u << s.q)}, p.lambda[1]);
    }
    for (int c = 0; c < 2; ++c) {
      const int busy = c == 0 ? s.b1 : s.b2;
      if (busy == 0) continue;
      int b[2] = {s.b1, s.b2};
      --b[c];
      State to{b[0], b[1], 0, 0};
      if (s.q > 0) {
        const int head = s.bits & 1u;
        ++(head ? to.b2 : to.b1);
        to.q = s.q - 1;
        to.bits = s.bits >> 1;
      }
      add(i, to, busy * p.mu[c]);
    }
    for (int j = 0; j < s.q; ++j) {
      const int c = (s.bits >> j) & 1u;
      add(i, {s.b1, s.b2, s.q - 1, remove_at(s.bits, j)}, p.theta[c]);
    }
  }
  // Gauss-Seidel on the balance equations pi(i) out(i) = sum_j pi(j) q(j, i).
  Eigen::SparseMatrix<double, Eigen::RowMajor> in(n, n);
  in.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int sweep = 0;; ++sweep) {
    if (sweep == 200000) throw std::runtime_error("CTMC iteration did not converge");
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      double flow = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(in, i); it; ++it)
        flow += it.value() * pi(it.col());
      const double v = flow / out_rate[i];
      change = std::max(change, std::abs(v - pi(i)) / std::max(v, 1e-300));
      pi(i) = v;
    }
    pi /= pi.sum();
    if (change < 1e-14) break;
  }

  CtmcResult r;
  r.states = n;
  for (int i = 0; i < n; ++i) {
    const State& s = states[i];
    const int q2 = __builtin_popcount(s.bits);
    r.lq[0] += pi(i) * (s.q - q2);
    r.lq[1] += pi(i) * q2;
    r.busy[0] += pi(i) * s.b1;
    r.busy[1] += pi(i) * s.b2;
    if (s.q == p.max_queue) r.full_queue_mass += pi(i);
  }
  for (int c = 0; c < 2; ++c) {
    r.p_serve[c] = p.lambda[c] > 0.0 ? 1.0 - p.theta[c] * r.lq[c] / p.lambda[c] : 0.0;
  }
  r.utilization = (r.busy[0] + r.busy[1]) / k;
  return r;
}

}  // namespace twoclass::testing
