#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "twoclass/measures.hpp"
#include "twoclass/sim.hpp"

namespace twoclass {
namespace {

// Agreement within three 95% half-widths, so a single unlucky interval does
// not fail the suite.
::testing::AssertionResult agrees(const SimEstimate& est, const std::string& field, double value) {
  const auto m = report_fields(est.mean), h = report_fields(est.half_width);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].first != field) continue;
    if (std::abs(value - m[i].second) <= 3 * h[i].second) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << field << ": simulated " << m[i].second << " +- " << h[i].second
                                         << ", analytic " << value;
  }
  return ::testing::AssertionFailure() << "unknown field " << field;
}

SimConfig base_system(long horizon, int reps) {
  SimConfig s = sim_config(make_mmk(5, {10, 10}, {1, 2}, {1.5, 1.5}));
  s.horizon = horizon;
  s.replications = reps;
  return s;
}

TEST(SimConfig, Validation) {
  SimConfig s = base_system(1000, 1);
  EXPECT_NO_THROW(s.validate());
  s.horizon = 999;
  EXPECT_THROW(s.validate(), InvalidModel);
  s = base_system(1000, 0);
  EXPECT_THROW(s.validate(), InvalidModel);
  s = base_system(1000, 1);
  s.warmup = 1.0;
  EXPECT_THROW(s.validate(), InvalidModel);
}

TEST(Simulate, EmptySystemGivesZeros) {
  SimConfig s = sim_config(make_mmk(3, {0, 0}, {1, 2}, {1, 1}));
  s.replications = 3;
  s.horizon = 1000;
  const auto est = simulate(s);
  for (const auto& [name, v] : report_fields(est.mean)) EXPECT_EQ(v, 0.0) << name;
  for (const auto& [name, v] : report_fields(est.half_width)) EXPECT_EQ(v, 0.0) << name;
}

TEST(Simulate, SameSeedIsBitIdentical) {
  SimConfig s = base_system(20000, 4);
  s.threads = 4;
  const auto a = report_fields(simulate(s).mean);
  s.threads = 1;
  const auto b = report_fields(simulate(s).mean);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].second, b[i].second) << a[i].first;
  s.seed = 2;
  const auto c = report_fields(simulate(s).mean);
  EXPECT_NE(a[0].second, c[0].second);
}

TEST(Simulate, CountsAreConserved) {
  const auto est = simulate(base_system(50000, 3));
  for (const auto& c : est.counts) {
    EXPECT_TRUE(c.conserved());
    EXPECT_GT(c.in_system[0] + c.in_system[1], 0);
    EXPECT_EQ(c.arrivals[0] + c.arrivals[1], 45000);
  }
}

TEST(Simulate, EmpiricalLittleLaw) {
  const auto est = simulate(base_system(200000, 10));
  const double lambda = 10.0;
  for (int c = 0; c < 2; ++c) {
    const double diff = std::abs(est.mean.classes[c].lq - lambda * est.mean.classes[c].awt);
    EXPECT_LE(diff, 3 * est.half_width.classes[c].lq);
  }
}

TEST(Simulate, VirtualWaitRecursionMatchesEveryCustomer) {
  SimConfig s = base_system(100000, 2);
  s.track_virtual_wait = true;
  const auto est = simulate(s);
  EXPECT_EQ(est.virtual_checked, 200000);
  EXPECT_EQ(est.virtual_outcome_mismatches, 0);
  EXPECT_LE(est.virtual_wait_max_error, 1e-9);
}

TEST(Simulate, BaseSystemCoversAnalyticValues) {
  const auto cfg = make_mmk(5, {10, 10}, {1, 2}, {1.5, 1.5});
  const auto est = simulate(base_system(1000000, 10));
  const auto r = evaluate(cfg);
  EXPECT_TRUE(agrees(est, "pct_served_all", r.pct_served_all));
  EXPECT_TRUE(agrees(est, "wait_served_1", r.classes[0].wait_served));
  EXPECT_TRUE(agrees(est, "awt_2", r.classes[1].awt));
}

TEST(Simulate, DeterministicServiceSingleServerMatchesSolver) {
  Mg1Config g;
  g.classes[0] = {0.4, ServiceModel::deterministic(1.0), PatienceSpec::exponential(1.0)};
  g.classes[1] = {0.4, ServiceModel::deterministic(0.5), PatienceSpec::exponential(2.0)};
  SimConfig s = sim_config(g);
  s.horizon = 1000000;
  const auto est = simulate(s);
  const auto r = evaluate(g);
  for (int c = 0; c < 2; ++c) {
    const std::string suffix = c == 0 ? "_1" : "_2";
    EXPECT_TRUE(agrees(est, "p_serve" + suffix, r.classes[c].p_serve));
    EXPECT_TRUE(agrees(est, "lq" + suffix, r.classes[c].lq));
  }
}

TEST(Simulate, ExponentialSingleServerMatchesSolver) {
  Mg1Config g;
  g.classes[0] = {0.5, ServiceModel::exponential(1.0), PatienceSpec::exponential(1.0)};
  g.classes[1] = {0.5, ServiceModel::exponential(1.0), PatienceSpec::exponential(1.0)};
  SimConfig s = sim_config(g);
  const auto est = simulate(s);
  const auto r = evaluate(g);
  EXPECT_TRUE(agrees(est, "pct_served_all", r.pct_served_all));
  EXPECT_TRUE(agrees(est, "lq_1", r.classes[0].lq));
}

TEST(Simulate, HalfWidthsAreNonnegativeAndZeroForOneReplication) {
  auto est = simulate(base_system(5000, 1));
  for (const auto& [name, v] : report_fields(est.half_width)) EXPECT_EQ(v, 0.0) << name;
  est = simulate(base_system(5000, 5));
  for (const auto& [name, v] : report_fields(est.half_width)) EXPECT_GE(v, 0.0) << name;
  EXPECT_THROW(est.covers("no_such_field", 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace twoclass
