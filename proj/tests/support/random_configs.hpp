#pragma once

// Seeded random system configurations for property tests.

#include <random>

#include "twoclass/model.hpp"

namespace twoclass::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Any of the four service families with the given mean.
inline ServiceModel random_service(std::mt19937_64& rng, double mean) {
  switch (uniform_int(rng, 0, 3)) {
    case 0:
      return ServiceModel::exponential(1.0 / mean);
    case 1:
      return ServiceModel::deterministic(mean);
    case 2: {
      const double w = uniform(rng, 0.1, 0.9);
      const double m1 = mean * uniform(rng, 0.2, 0.9);
      const double m2 = (mean - w * m1) / (1.0 - w);
      return ServiceModel::hyper_exponential({w, 1.0 - w}, {1.0 / m1, 1.0 / m2});
    }
    default: {
      const int n = uniform_int(rng, 2, 5);
      return ServiceModel::erlang(n, n / mean);
    }
  }
}

/// M/M/k+M system with offered load per server between 0.2 and 1.6.
inline MmkConfig random_mmk(std::mt19937_64& rng, int k_lo = 1, int k_hi = 6) {
  const int k = uniform_int(rng, k_lo, k_hi);
  const double mu1 = uniform(rng, 0.5, 2.0), mu2 = uniform(rng, 0.5, 2.0);
  const double rho = uniform(rng, 0.2, 1.6);
  const double share = uniform(rng, 0.2, 0.8);
  // Split k * rho of work between the classes.
  const double l1 = share * k * rho * mu1, l2 = (1.0 - share) * k * rho * mu2;
  return make_mmk(k, {l1, l2}, {mu1, mu2},
                  {uniform(rng, 0.3, 3.0), uniform(rng, 0.3, 3.0)});
}

/// Single-server system with general service and exponential or
/// hyper-exponential patience.
inline Mg1Config random_mg1(std::mt19937_64& rng) {
  Mg1Config c;
  const double rho = uniform(rng, 0.2, 1.6);
  const double share = uniform(rng, 0.2, 0.8);
  for (int i = 0; i < 2; ++i) {
    const double mean = uniform(rng, 0.5, 2.0);
    c.classes[i].service = random_service(rng, mean);
    c.classes[i].arrival_rate = (i == 0 ? share : 1.0 - share) * rho / mean;
    if (uniform_int(rng, 0, 2) == 0) {
      const double w = uniform(rng, 0.2, 0.8);
      c.classes[i].patience = PatienceSpec::hyper_exponential(
          {w, 1.0 - w}, {uniform(rng, 0.3, 3.0), uniform(rng, 0.3, 3.0)});
    } else {
      c.classes[i].patience = PatienceSpec::exponential(uniform(rng, 0.3, 3.0));
    }
  }
  return c;
}

}  // namespace twoclass::testing
