#pragma once

// Parameter types shared by the analytic solvers and the simulator.
//
// All rates and durations are expressed in one caller-chosen time unit.
// Unit conversion (e.g. per-hour arrivals with per-second services) is the
// job of the scenario loader, not of these types.

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace twoclass {

/// Thrown when a parameter set violates a documented invariant.
class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Service-time distributions

struct ExponentialService {
  double rate;
};

struct DeterministicService {
  double duration;
};

struct HyperExponentialService {
  std::vector<double> weights;
  std::vector<double> rates;
};

struct ErlangService {
  int phases;
  double rate;  // per-phase rate
};

/// A service-time distribution with a closed-form LST.
class ServiceModel {
 public:
  using Variant = std::variant<ExponentialService, DeterministicService,
                               HyperExponentialService, ErlangService>;

  // Validating constructors.
  static ServiceModel exponential(double rate);
  static ServiceModel deterministic(double duration);
  static ServiceModel hyper_exponential(std::vector<double> weights,
                                        std::vector<double> rates);
  static ServiceModel erlang(int phases, double rate);

  const Variant& variant() const { return v_; }
  bool is_exponential() const {
    return std::holds_alternative<ExponentialService>(v_);
  }
  /// Rate of an exponential model; throws for other variants.
  double exponential_rate() const;

  double mean() const;

  /// E[exp(-sX)], s >= 0.
  double lst(double s) const;

  /// d/ds E[exp(-sX)], s >= 0.
  double lst_derivative(double s) const;

  /// (1 - lst(s)) / s, evaluated without cancellation. Equals mean() at s = 0.
  double excess_lst(double s) const;

  /// d/ds of excess_lst.
  double excess_lst_derivative(double s) const;

  double sample(std::mt19937_64& rng) const;

 private:
  explicit ServiceModel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// ---------------------------------------------------------------------------
// Patience

struct PatienceBranch {
  double weight;
  double rate;
};

/// Exponential or hyper-exponential patience time.
class PatienceSpec {
 public:
  static PatienceSpec exponential(double rate);
  static PatienceSpec hyper_exponential(std::vector<double> weights,
                                        std::vector<double> rates);

  /// One branch of weight 1 for the exponential case.
  const std::vector<PatienceBranch>& branches() const { return branches_; }
  bool is_exponential() const { return branches_.size() == 1; }
  double exponential_rate() const;
  double mean() const;
  double sample(std::mt19937_64& rng) const;

 private:
  explicit PatienceSpec(std::vector<PatienceBranch> b)
      : branches_(std::move(b)) {}
  std::vector<PatienceBranch> branches_;
};

// ---------------------------------------------------------------------------
// Classes and systems

struct ClassParams {
  double arrival_rate = 0.0;
  ServiceModel service = ServiceModel::exponential(1.0);
  PatienceSpec patience = PatienceSpec::exponential(1.0);
};

/// lambda * (1 - lst(s)) / s. Requires s > 0; for s below 1e-8 times the
/// service rate scale the exact limit lambda * mean is returned.
double equilibrium_factor(const ClassParams& cls, double s);

/// Derivative of equilibrium_factor with respect to s.
double equilibrium_factor_derivative(const ClassParams& cls, double s);

/// Series truncation controls shared by all LST series.
struct SeriesControl {
  double tolerance = 1e-12;
  int max_diagonal = 10000;
  /// When positive, sum exactly this many anti-diagonals and skip the
  /// stopping rule (used for truncation-stability checks).
  int fixed_diagonals = 0;
  /// Decimal digits of working precision for the M/M/k matrix solver.
  /// 0 selects automatically: double precision when the measured
  /// cancellation allows it, otherwise extended precision.
  int working_digits = 0;
};

struct Mg1Config {
  std::array<ClassParams, 2> classes;
  SeriesControl series;

  void validate() const;
};

/// Two-class M/M/k+M system: exponential service and patience only.
struct MmkConfig {
  int servers = 1;
  std::array<ClassParams, 2> classes;
  SeriesControl series;

  void validate() const;

  double lambda(int c) const { return classes[c].arrival_rate; }
  double mu(int c) const { return classes[c].service.exponential_rate(); }
  double theta(int c) const { return classes[c].patience.exponential_rate(); }
  double total_arrival_rate() const { return lambda(0) + lambda(1); }

  /// The same system viewed as an M/G/1+M instance (valid for any k, but
  /// only meaningful as a solver route when k == 1).
  Mg1Config as_mg1() const;
};

/// Builds an M/M/k+M configuration from plain rates.
MmkConfig make_mmk(int servers, std::array<double, 2> lambda,
                   std::array<double, 2> mu, std::array<double, 2> theta,
                   SeriesControl series = {});

}  // namespace twoclass
