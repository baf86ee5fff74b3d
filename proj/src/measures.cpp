#include "twoclass/measures.hpp"

#include <stdexcept>

namespace twoclass {

namespace {

/// Fills waits, counts and rates once p_serve, awt and E(W; T > W) are known.
void complete_class(ClassMeasures& m, double lambda, double wait_moment) {
  m.lq = lambda * m.awt;
  m.throughput = lambda * m.p_serve;
  m.reneging_rate = lambda - m.throughput;
  m.wait_served = m.p_serve > 0.0 ? wait_moment / m.p_serve : 0.0;
  m.wait_reneged = m.p_serve < 1.0
                       ? (m.awt - wait_moment) / (1.0 - m.p_serve)
                       : 0.0;
}

void complete_aggregate(PerformanceReport& r, const std::array<double, 2>& lambda,
                        const std::array<double, 2>& mean_service) {
  const double lam = lambda[0] + lambda[1];
  double served_time = 0.0, awt_weighted = 0.0;
  r.throughput = r.reneging_rate = 0.0;
  for (int c = 0; c < 2; ++c) {
    // A class without arrivals has no customers to measure.
    if (lambda[c] <= 0.0) r.classes[c] = ClassMeasures{};
    r.throughput += r.classes[c].throughput;
    r.reneging_rate += r.classes[c].reneging_rate;
    served_time += r.classes[c].throughput * mean_service[c];
    awt_weighted += lambda[c] * r.classes[c].awt;
  }
  if (lam > 0.0) {
    r.pct_served_all = r.throughput / lam;
    r.overall_awt = awt_weighted / lam;
  } else {
    r.pct_served_all = 0.0;
    r.overall_awt = 0.0;
  }
  if (r.throughput > 0.0) {
    r.avg_service_time_served = served_time / r.throughput;
    r.class2_share_of_served = r.classes[1].throughput / r.throughput;
  }
}

}  // namespace

PerformanceReport measures_mmk(const MmkSolution& solution,
                               const MmkConfig& config) {
  PerformanceReport r;
  std::array<double, 2> lambda{}, tau{};
  double busy = 0.0;
  for (int c = 0; c < 2; ++c) {
    lambda[c] = config.lambda(c);
    tau[c] = 1.0 / config.mu(c);
    ClassMeasures& m = r.classes[c];
    m.p_serve = solution.p_serve(c);
    m.awt = (1.0 - m.p_serve) / config.theta(c);
    complete_class(m, lambda[c], solution.wait_moment(c));
    m.l_total = m.lq + m.throughput * tau[c];
    busy += m.throughput * tau[c];
  }
  r.utilization = busy / config.servers;
  complete_aggregate(r, lambda, tau);
  return r;
}

PerformanceReport measures_mg1(const Mg1Solution& solution,
                               const Mg1Config& config) {
  PerformanceReport r;
  std::array<double, 2> lambda{}, tau{};
  double busy = 0.0;
  for (int c = 0; c < 2; ++c) {
    const ClassParams& cls = config.classes[c];
    lambda[c] = cls.arrival_rate;
    tau[c] = cls.service.mean();
    ClassMeasures& m = r.classes[c];
    double moment = 0.0;
    m.p_serve = m.awt = 0.0;
    for (const auto& b : cls.patience.branches()) {
      const double psi = solution.psi(b.rate);
      m.p_serve += b.weight * psi;
      m.awt += b.weight * (1.0 - psi) / b.rate;
      moment -= b.weight * solution.dpsi(b.rate);
    }
    complete_class(m, lambda[c], moment);
    m.l_total = m.lq + m.throughput * tau[c];
    busy += m.throughput * tau[c];
  }
  r.utilization = busy;
  complete_aggregate(r, lambda, tau);
  return r;
}

PerformanceReport evaluate(const MmkConfig& config) {
  return measures_mmk(solve_mmk(config), config);
}

PerformanceReport evaluate(const Mg1Config& config) {
  return measures_mg1(solve_mg1(config), config);
}

const std::vector<std::string>& report_field_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const char* suffix : {"_1", "_2"}) {
      for (const char* f : {"p_serve", "awt", "wait_served", "wait_reneged",
                            "lq", "l_total", "throughput", "reneging_rate"})
        out.push_back(std::string(f) + suffix);
    }
    for (const char* f : {"utilization", "throughput", "reneging_rate",
                          "pct_served_all", "overall_awt",
                          "avg_service_time_served", "class2_share_of_served"})
      out.emplace_back(f);
    return out;
  }();
  return names;
}

std::vector<std::pair<std::string, double>> report_fields(
    const PerformanceReport& r) {
  std::vector<double> v;
  for (const auto& m : r.classes) {
    v.insert(v.end(), {m.p_serve, m.awt, m.wait_served, m.wait_reneged, m.lq,
                       m.l_total, m.throughput, m.reneging_rate});
  }
  v.insert(v.end(), {r.utilization, r.throughput, r.reneging_rate,
                     r.pct_served_all, r.overall_awt, r.avg_service_time_served,
                     r.class2_share_of_served});
  const auto& names = report_field_names();
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(names[i], v[i]);
  return out;
}

PerformanceReport report_from_values(const std::vector<double>& v) {
  if (v.size() != report_field_names().size())
    throw std::invalid_argument("report_from_values: wrong number of values");
  PerformanceReport r;
  std::size_t i = 0;
  for (auto& m : r.classes) {
    for (double* f : {&m.p_serve, &m.awt, &m.wait_served, &m.wait_reneged,
                      &m.lq, &m.l_total, &m.throughput, &m.reneging_rate})
      *f = v[i++];
  }
  for (double* f : {&r.utilization, &r.throughput, &r.reneging_rate,
                    &r.pct_served_all, &r.overall_awt,
                    &r.avg_service_time_served, &r.class2_share_of_served})
    *f = v[i++];
  return r;
}

}  // namespace twoclass
