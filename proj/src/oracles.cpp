#include "twoclass/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace twoclass {

namespace {

constexpr double kTailTarget = 1e-12;
constexpr long kMaxStates = 1L << 26;

}  // namespace

ErlangAResult erlang_a(const ErlangAParams& p) {
  if (!(p.lambda >= 0.0) || !(p.mu > 0.0) || !(p.theta > 0.0) ||
      p.servers < 1 || p.truncation < 2)
    throw InvalidModel("erlang_a: invalid parameters");
  ErlangAResult out;
  if (p.lambda == 0.0) {
    out.states_used = 1;
    return out;
  }
  const int k = p.servers;
  std::vector<double> logp;
  for (long states = p.truncation;; states *= 2) {
    if (states > kMaxStates)
      throw TruncationError("erlang_a: tail mass above threshold at state cap");
    logp.assign(states, 0.0);
    const double log_lambda = std::log(p.lambda);
    for (long n = 1; n < states; ++n) {
      const double death = std::min<long>(n, k) * p.mu +
                           std::max<long>(n - k, 0) * p.theta;
      logp[n] = logp[n - 1] + log_lambda - std::log(death);
    }
    const double mx = *std::max_element(logp.begin(), logp.end());
    double total = 0.0;
    for (double v : logp) total += std::exp(v - mx);
    const double log_norm = mx + std::log(total);
    out.tail_mass = std::exp(logp.back() - log_norm);
    out.states_used = states;
    if (out.tail_mass < kTailTarget) break;
  }
  double queue = 0.0, busy = 0.0;
  const double mx = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  for (double v : logp) total += std::exp(v - mx);
  for (long n = 0; n < out.states_used; ++n) {
    const double pn = std::exp(logp[n] - mx) / total;
    busy += std::min<long>(n, k) * pn;
    queue += std::max<long>(n - k, 0) * pn;
  }
  out.lq = queue;
  out.awt = queue / p.lambda;
  out.p_serve = 1.0 - p.theta * queue / p.lambda;
  out.utilization = busy / k;
  return out;
}

ErlangAResult erlang_a_pooled(const MmkConfig& config) {
  config.validate();
  if (config.mu(0) != config.mu(1) || config.theta(0) != config.theta(1))
    throw InvalidModel("erlang_a_pooled: classes differ in service or patience");
  return erlang_a({config.total_arrival_rate(), config.mu(0), config.theta(0),
                   config.servers});
}

}  // namespace twoclass
