#include <gtest/gtest.h>

#include <cmath>

#include "twoclass/measures.hpp"
#include "twoclass/oracles.hpp"
#include "twoclass/sim.hpp"

namespace twoclass {
namespace {

TEST(ErlangA, EmptySystem) {
  const auto r = erlang_a({0.0, 1.0, 1.0, 3});
  EXPECT_EQ(r.p_serve, 1.0);
  EXPECT_EQ(r.lq, 0.0);
  EXPECT_EQ(r.utilization, 0.0);
}

TEST(ErlangA, SingleServerClosedForm) {
  // M/M/1+M with theta = mu: the number in system is Poisson(lambda/mu).
  const double lambda = 1.7, mu = 0.9;
  const auto r = erlang_a({lambda, mu, mu, 1});
  const double rho = lambda / mu;
  EXPECT_NEAR(r.utilization, 1.0 - std::exp(-rho), 1e-12);
  EXPECT_NEAR(r.lq, rho - (1.0 - std::exp(-rho)), 1e-12);
  EXPECT_LT(r.tail_mass, 1e-12);
}

TEST(ErlangA, LittleAndFlowIdentities) {
  const auto r = erlang_a({30.0, 1.0, 0.4, 25});
  EXPECT_NEAR(r.awt, r.lq / 30.0, 1e-14);
  EXPECT_NEAR(30.0 * r.p_serve, 25.0 * r.utilization * 1.0, 1e-9);
}

TEST(ErlangA, LargeLoadDoesNotOverflow) {
  const auto r = erlang_a({5000.0, 1.0, 1.0, 1000});
  EXPECT_TRUE(std::isfinite(r.p_serve));
  EXPECT_GT(r.p_serve, 0.0);
  EXPECT_LT(r.p_serve, 1.0);
}

TEST(ErlangA, RejectsBadParameters) {
  EXPECT_THROW(erlang_a({1.0, 0.0, 1.0, 1}), InvalidModel);
  EXPECT_THROW(erlang_a({1.0, 1.0, 1.0, 0}), InvalidModel);
  EXPECT_THROW(erlang_a({-1.0, 1.0, 1.0, 1}), InvalidModel);
}

TEST(ErlangA, PooledMatchesScalarRecursion) {
  const auto cfg = make_mmk(5, {10, 10}, {1.5, 1.5}, {1.2, 1.2});
  const auto o = erlang_a_pooled(cfg);
  const auto r = measures_mmk(solve_mmk_equal_mu(cfg), cfg);
  EXPECT_NEAR(o.p_serve, r.pct_served_all, 1e-8 * o.p_serve);
  EXPECT_NEAR(o.lq, r.classes[0].lq + r.classes[1].lq, 1e-8 * o.lq);
  EXPECT_THROW(erlang_a_pooled(make_mmk(5, {1, 1}, {1, 2}, {1, 1})), InvalidModel);
  EXPECT_THROW(erlang_a_pooled(make_mmk(5, {1, 1}, {1, 1}, {1, 2})), InvalidModel);
}

TEST(ErlangA, VeryImpatientCustomersAgainstSimulation) {
  const auto o = erlang_a({1.0, 1.0, 1e6, 1});
  SimConfig s = sim_config(make_mmk(1, {1.0, 0.0}, {1.0, 1.0}, {1e6, 1.0}));
  s.horizon = 200000;
  s.replications = 8;
  const auto est = simulate(s);
  EXPECT_LE(std::abs(est.mean.classes[0].p_serve - o.p_serve),
            est.half_width.classes[0].p_serve + 1e-9);
}

}  // namespace
}  // namespace twoclass
