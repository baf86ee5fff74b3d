#include "twoclass/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "twoclass/parallel.hpp"

namespace twoclass {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum Stream { kArrival1, kArrival2, kService1, kService2, kPatience1, kPatience2 };

std::mt19937_64 make_stream(std::uint64_t seed, int replication, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(s)};
  return std::mt19937_64(seq);
}

struct Customer {
  double arrival;
  double deadline;
  double service;
  int cls;
  bool counted;
  double predicted_wait;
  bool predicted_served;
};

struct InService {
  double end;
  double start;
  int cls;
  bool counted;
  bool operator>(const InService& o) const { return end > o.end; }
};

class Replication {
 public:
  Replication(const SimConfig& config, int index)
      : config_(config),
        warm_(static_cast<long>(std::floor(config.warmup * config.horizon))),
        free_(config.servers) {
    for (int c = 0; c < 2; ++c) {
      arrival_rng_[c] = make_stream(config.seed, index, Stream(kArrival1 + c));
      service_rng_[c] = make_stream(config.seed, index, Stream(kService1 + c));
      patience_rng_[c] = make_stream(config.seed, index, Stream(kPatience1 + c));
    }
    if (config.track_virtual_wait)
      virtual_free_.assign(config.servers, 0.0);
  }

  ReplicationResult run() {
    for (int c = 0; c < 2; ++c) next_arrival_[c] = draw_interarrival(c, 0.0);
    while (true) {
      const double t_arr = std::min(next_arrival_[0], next_arrival_[1]);
      const double t_done = busy_.empty() ? kInf : busy_.top().end;
      if (t_arr == kInf && t_done == kInf) break;
      if (t_done <= t_arr) {
        complete(t_done);
      } else {
        arrive(t_arr, next_arrival_[0] <= next_arrival_[1] ? 0 : 1);
      }
    }
    // Servers are idle, so anything still queued has expired.
    while (!queue_.empty()) {
      renege(queue_.front());
      queue_.pop_front();
    }
    return finish();
  }

 private:
  double draw_interarrival(int c, double now) {
    const double rate = config_.classes[c].arrival_rate;
    if (rate <= 0.0) return kInf;
    return now + std::exponential_distribution<double>(rate)(arrival_rng_[c]);
  }

  double overlap(double from, double to) const {
    if (!window_open_) return 0.0;
    const double lo = std::max(from, t0_);
    const double hi = std::min(to, t1_);
    return hi > lo ? hi - lo : 0.0;
  }

  void arrive(double t, int c) {
    ++arrivals_;
    const bool counted = arrivals_ > warm_;
    if (counted && !window_open_) {
      window_open_ = true;
      t0_ = t;
    }
    Customer cust{t, 0.0, 0.0, c, counted, 0.0, false};
    cust.service = config_.classes[c].service.sample(service_rng_[c]);
    cust.deadline = t + config_.classes[c].patience.sample(patience_rng_[c]);
    if (counted) ++counts_.arrivals[c];
    if (config_.track_virtual_wait) predict(cust);

    if (free_ > 0) {
      // Nothing valid can be waiting while a server is idle.
      while (!queue_.empty()) {
        renege(queue_.front());
        queue_.pop_front();
      }
      start(cust, t);
    } else {
      queue_.push_back(cust);
    }

    next_arrival_[c] = draw_interarrival(c, t);
    if (arrivals_ >= config_.horizon) {
      next_arrival_[0] = next_arrival_[1] = kInf;
      t1_ = t;
      snapshot(t);
    }
  }

  void complete(double t) {
    const InService done = busy_.top();
    busy_.pop();
    ++free_;
    busy_area_[done.cls] += overlap(done.start, done.end);
    if (done.counted) ++completed_[done.cls];
    while (free_ > 0 && !queue_.empty()) {
      const Customer cust = queue_.front();
      queue_.pop_front();
      if (cust.deadline <= t) {
        renege(cust);
      } else {
        start(cust, t);
      }
    }
  }

  void start(const Customer& cust, double t) {
    const double wait = t - cust.arrival;
    --free_;
    busy_.push({t + cust.service, t, cust.cls, cust.counted});
    wait_area_[cust.cls] += overlap(cust.arrival, t);
    if (cust.counted) {
      ++served_[cust.cls];
      sum_min_wait_[cust.cls] += wait;
      sum_wait_served_[cust.cls] += wait;
      sum_service_ += cust.service;
    }
    if (config_.track_virtual_wait) {
      ++virtual_checked_;
      if (!cust.predicted_served) ++virtual_mismatch_;
      virtual_error_ =
          std::max(virtual_error_, std::abs(wait - cust.predicted_wait));
    }
  }

  void renege(const Customer& cust) {
    const double patience = cust.deadline - cust.arrival;
    wait_area_[cust.cls] += overlap(cust.arrival, cust.deadline);
    if (cust.counted) {
      ++reneged_[cust.cls];
      sum_min_wait_[cust.cls] += patience;
      sum_wait_reneged_[cust.cls] += patience;
    }
    if (config_.track_virtual_wait) {
      ++virtual_checked_;
      if (cust.predicted_served) ++virtual_mismatch_;
    }
  }

  /// Server free-time recursion: the wait of an arrival is the time until
  /// the earliest of the k committed server free times.
  void predict(Customer& cust) {
    std::pop_heap(virtual_free_.begin(), virtual_free_.end(), std::greater<>());
    double& earliest = virtual_free_.back();
    cust.predicted_wait = std::max(0.0, earliest - cust.arrival);
    cust.predicted_served = cust.deadline - cust.arrival > cust.predicted_wait;
    if (cust.predicted_served)
      earliest = cust.arrival + cust.predicted_wait + cust.service;
    std::push_heap(virtual_free_.begin(), virtual_free_.end(), std::greater<>());
  }

  /// Counted customers by state at the last arrival epoch.
  void snapshot(double t) {
    for (int c = 0; c < 2; ++c) {
      counts_.served[c] = completed_[c];
      counts_.reneged[c] = reneged_[c];
      counts_.in_system[c] = 0;
    }
    auto heap_copy = busy_;
    while (!heap_copy.empty()) {
      if (heap_copy.top().counted) ++counts_.in_system[heap_copy.top().cls];
      heap_copy.pop();
    }
    for (const Customer& cust : queue_) {
      if (!cust.counted) continue;
      if (cust.deadline <= t) {
        ++counts_.reneged[cust.cls];
      } else {
        ++counts_.in_system[cust.cls];
      }
    }
  }

  ReplicationResult finish() const {
    ReplicationResult out;
    out.counts = counts_;
    out.virtual_checked = virtual_checked_;
    out.virtual_outcome_mismatches = virtual_mismatch_;
    out.virtual_wait_max_error = virtual_error_;
    PerformanceReport& r = out.report;
    const double span = window_open_ ? t1_ - t0_ : 0.0;
    if (!(span > 0.0)) return out;

    long arrived = 0, served = 0;
    double min_wait = 0.0, busy = 0.0;
    for (int c = 0; c < 2; ++c) {
      const long n = counts_.arrivals[c];
      ClassMeasures& m = r.classes[c];
      arrived += n;
      served += served_[c];
      min_wait += sum_min_wait_[c];
      busy += busy_area_[c];
      m.lq = wait_area_[c] / span;
      m.l_total = (wait_area_[c] + busy_area_[c]) / span;
      m.throughput = served_[c] / span;
      m.reneging_rate = reneged_[c] / span;
      if (n == 0) continue;
      m.p_serve = static_cast<double>(served_[c]) / n;
      m.awt = sum_min_wait_[c] / n;
      if (served_[c] > 0) m.wait_served = sum_wait_served_[c] / served_[c];
      if (reneged_[c] > 0) m.wait_reneged = sum_wait_reneged_[c] / reneged_[c];
    }
    r.utilization = busy / (config_.servers * span);
    r.throughput = r.classes[0].throughput + r.classes[1].throughput;
    r.reneging_rate = r.classes[0].reneging_rate + r.classes[1].reneging_rate;
    if (arrived > 0) {
      r.pct_served_all = static_cast<double>(served) / arrived;
      r.overall_awt = min_wait / arrived;
    }
    if (served > 0) {
      r.avg_service_time_served = sum_service_ / served;
      r.class2_share_of_served = static_cast<double>(served_[1]) / served;
    }
    return out;
  }

  const SimConfig& config_;
  long warm_;
  int free_;
  std::array<std::mt19937_64, 2> arrival_rng_, service_rng_, patience_rng_;
  std::array<double, 2> next_arrival_{kInf, kInf};
  std::deque<Customer> queue_;
  std::priority_queue<InService, std::vector<InService>, std::greater<>> busy_;
  std::vector<double> virtual_free_;

  long arrivals_ = 0;
  bool window_open_ = false;
  double t0_ = 0.0, t1_ = kInf;

  std::array<long, 2> served_{}, reneged_{}, completed_{};
  std::array<double, 2> sum_min_wait_{}, sum_wait_served_{}, sum_wait_reneged_{};
  std::array<double, 2> wait_area_{}, busy_area_{};
  double sum_service_ = 0.0;
  ReplicationCounts counts_;

  long virtual_checked_ = 0;
  long virtual_mismatch_ = 0;
  double virtual_error_ = 0.0;
};

}  // namespace

void SimConfig::validate() const {
  if (servers < 1) throw InvalidModel("simulation needs at least one server");
  if (horizon < 1000) throw InvalidModel("simulation horizon must be >= 1000");
  if (!(warmup >= 0.0 && warmup < 1.0))
    throw InvalidModel("warmup fraction must lie in [0, 1)");
  if (replications < 1) throw InvalidModel("replications must be >= 1");
  for (const auto& cls : classes) {
    if (!(cls.arrival_rate >= 0.0) || !std::isfinite(cls.arrival_rate))
      throw InvalidModel("arrival rates must be finite and nonnegative");
  }
}

SimConfig sim_config(const MmkConfig& config) {
  SimConfig out;
  out.servers = config.servers;
  out.classes = config.classes;
  return out;
}

SimConfig sim_config(const Mg1Config& config) {
  SimConfig out;
  out.servers = 1;
  out.classes = config.classes;
  return out;
}

bool ReplicationCounts::conserved() const {
  for (int c = 0; c < 2; ++c) {
    if (arrivals[c] != served[c] + reneged[c] + in_system[c]) return false;
  }
  return true;
}

bool SimEstimate::covers(const std::string& field, double value) const {
  const auto m = report_fields(mean);
  const auto h = report_fields(half_width);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].first == field) return std::abs(value - m[i].second) <= h[i].second;
  }
  throw std::invalid_argument("unknown report field: " + field);
}

ReplicationResult simulate_replication(const SimConfig& config, int index) {
  config.validate();
  Replication rep(config, index);
  return rep.run();
}

SimEstimate simulate(const SimConfig& config) {
  config.validate();
  const int reps = config.replications;
  std::vector<ReplicationResult> results(reps);
  if (config.classes[0].arrival_rate + config.classes[1].arrival_rate > 0.0) {
    parallel_for(
        reps,
        [&](int i) {
          Replication rep(config, i);
          results[i] = rep.run();
        },
        config.threads);
  }

  const std::size_t nf = report_field_names().size();
  std::vector<double> mean(nf, 0.0), half(nf, 0.0);
  std::vector<std::vector<double>> samples(nf);
  SimEstimate est;
  for (const auto& r : results) {
    const auto f = report_fields(r.report);
    for (std::size_t i = 0; i < nf; ++i) samples[i].push_back(f[i].second);
    est.counts.push_back(r.counts);
    est.virtual_checked += r.virtual_checked;
    est.virtual_outcome_mismatches += r.virtual_outcome_mismatches;
    est.virtual_wait_max_error =
        std::max(est.virtual_wait_max_error, r.virtual_wait_max_error);
  }
  double quantile = 0.0;
  if (reps > 1) {
    boost::math::students_t dist(reps - 1);
    quantile = boost::math::quantile(dist, 0.975);
  }
  for (std::size_t i = 0; i < nf; ++i) {
    double sum = 0.0;
    for (double v : samples[i]) sum += v;
    mean[i] = sum / reps;
    if (reps > 1) {
      double ss = 0.0;
      for (double v : samples[i]) ss += (v - mean[i]) * (v - mean[i]);
      half[i] = quantile * std::sqrt(ss / (reps - 1) / reps);
    }
  }
  est.mean = report_from_values(mean);
  est.half_width = report_from_values(half);
  return est;
}

}  // namespace twoclass
