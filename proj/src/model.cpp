#include "twoclass/model.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace twoclass {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidModel(what);
}

void check_mixture(const std::vector<double>& weights,
                   const std::vector<double>& rates, const char* what) {
  require(!weights.empty(), std::string(what) + ": no branches");
  require(weights.size() == rates.size(),
          std::string(what) + ": weights and rates differ in length");
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0,
            std::string(what) + ": weights must be nonnegative");
  }
  for (double r : rates) {
    require(std::isfinite(r) && r > 0.0,
            std::string(what) + ": rates must be positive");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(std::abs(total - 1.0) <= kWeightSumTolerance,
          std::string(what) + ": weights must sum to 1");
}

void check_s(double s) {
  if (!(s >= 0.0)) throw std::domain_error("transform argument must be >= 0");
}

double pick_branch_rate(const std::vector<double>& weights,
                        const std::vector<double>& rates,
                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
    if (u < weights[j]) return rates[j];
    u -= weights[j];
  }
  return rates.back();
}

}  // namespace

// ---------------------------------------------------------------------------
// ServiceModel

ServiceModel ServiceModel::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0,
          "exponential service: rate must be positive");
  return ServiceModel(ExponentialService{rate});
}

ServiceModel ServiceModel::deterministic(double duration) {
  require(std::isfinite(duration) && duration > 0.0,
          "deterministic service: duration must be positive");
  return ServiceModel(DeterministicService{duration});
}

ServiceModel ServiceModel::hyper_exponential(std::vector<double> weights,
                                             std::vector<double> rates) {
  check_mixture(weights, rates, "hyper-exponential service");
  return ServiceModel(
      HyperExponentialService{std::move(weights), std::move(rates)});
}

ServiceModel ServiceModel::erlang(int phases, double rate) {
  require(phases >= 1, "erlang service: phases must be >= 1");
  require(std::isfinite(rate) && rate > 0.0,
          "erlang service: rate must be positive");
  return ServiceModel(ErlangService{phases, rate});
}

double ServiceModel::exponential_rate() const {
  if (const auto* e = std::get_if<ExponentialService>(&v_)) return e->rate;
  throw InvalidModel("service model is not exponential");
}

double ServiceModel::mean() const {
  return std::visit(
      Overloaded{
          [](const ExponentialService& e) { return 1.0 / e.rate; },
          [](const DeterministicService& d) { return d.duration; },
          [](const HyperExponentialService& h) {
            double m = 0.0;
            for (std::size_t j = 0; j < h.rates.size(); ++j)
              m += h.weights[j] / h.rates[j];
            return m;
          },
          [](const ErlangService& e) { return e.phases / e.rate; },
      },
      v_);
}

double ServiceModel::lst(double s) const {
  check_s(s);
  return std::visit(
      Overloaded{
          [s](const ExponentialService& e) { return e.rate / (e.rate + s); },
          [s](const DeterministicService& d) {
            return std::exp(-s * d.duration);
          },
          [s](const HyperExponentialService& h) {
            double v = 0.0;
            for (std::size_t j = 0; j < h.rates.size(); ++j)
              v += h.weights[j] * h.rates[j] / (h.rates[j] + s);
            return v;
          },
          [s](const ErlangService& e) {
            return std::pow(e.rate / (e.rate + s), e.phases);
          },
      },
      v_);
}

double ServiceModel::lst_derivative(double s) const {
  check_s(s);
  return std::visit(
      Overloaded{
          [s](const ExponentialService& e) {
            return -e.rate / ((e.rate + s) * (e.rate + s));
          },
          [s](const DeterministicService& d) {
            return -d.duration * std::exp(-s * d.duration);
          },
          [s](const HyperExponentialService& h) {
            double v = 0.0;
            for (std::size_t j = 0; j < h.rates.size(); ++j) {
              const double a = h.rates[j] + s;
              v -= h.weights[j] * h.rates[j] / (a * a);
            }
            return v;
          },
          [s](const ErlangService& e) {
            const double q = e.rate / (e.rate + s);
            return -e.phases / (e.rate + s) * std::pow(q, e.phases);
          },
      },
      v_);
}

double ServiceModel::excess_lst(double s) const {
  check_s(s);
  if (s == 0.0) return mean();
  return std::visit(
      Overloaded{
          [s](const ExponentialService& e) { return 1.0 / (e.rate + s); },
          [s](const DeterministicService& d) {
            return -std::expm1(-s * d.duration) / s;
          },
          [s](const HyperExponentialService& h) {
            double v = 0.0;
            for (std::size_t j = 0; j < h.rates.size(); ++j)
              v += h.weights[j] / (h.rates[j] + s);
            return v;
          },
          [s](const ErlangService& e) {
            // 1 - q^n = (1 - q)(1 + q + ... + q^{n-1}) and (1 - q)/s = 1/(r+s)
            const double q = e.rate / (e.rate + s);
            double term = 1.0, v = 0.0;
            for (int m = 0; m < e.phases; ++m) {
              v += term;
              term *= q;
            }
            return v / (e.rate + s);
          },
      },
      v_);
}

double ServiceModel::excess_lst_derivative(double s) const {
  check_s(s);
  return std::visit(
      Overloaded{
          [s](const ExponentialService& e) {
            return -1.0 / ((e.rate + s) * (e.rate + s));
          },
          [s](const DeterministicService& d) {
            const double x = s * d.duration;
            if (x < 0.5) {
              // -d^2 * sum_m (-x)^m (m+1)/(m+2)!
              double sum = 0.0, power = 1.0, fact = 2.0;
              for (int m = 0; m < 30; ++m) {
                sum += power * (m + 1) / fact;
                power *= -x;
                fact *= (m + 3);
              }
              return -d.duration * d.duration * sum;
            }
            return (std::exp(-x) * (1.0 + x) - 1.0) / (s * s);
          },
          [s](const HyperExponentialService& h) {
            double v = 0.0;
            for (std::size_t j = 0; j < h.rates.size(); ++j) {
              const double a = h.rates[j] + s;
              v -= h.weights[j] / (a * a);
            }
            return v;
          },
          [s](const ErlangService& e) {
            const double q = e.rate / (e.rate + s);
            double term = 1.0, v = 0.0;
            for (int m = 0; m < e.phases; ++m) {
              v += (m + 1) * term;
              term *= q;
            }
            return -v / ((e.rate + s) * (e.rate + s));
          },
      },
      v_);
}

double ServiceModel::sample(std::mt19937_64& rng) const {
  return std::visit(
      Overloaded{
          [&rng](const ExponentialService& e) {
            return std::exponential_distribution<double>(e.rate)(rng);
          },
          [](const DeterministicService& d) { return d.duration; },
          [&rng](const HyperExponentialService& h) {
            const double r = pick_branch_rate(h.weights, h.rates, rng);
            return std::exponential_distribution<double>(r)(rng);
          },
          [&rng](const ErlangService& e) {
            return std::gamma_distribution<double>(e.phases, 1.0 / e.rate)(rng);
          },
      },
      v_);
}

// ---------------------------------------------------------------------------
// PatienceSpec

PatienceSpec PatienceSpec::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0,
          "exponential patience: rate must be positive");
  return PatienceSpec({PatienceBranch{1.0, rate}});
}

PatienceSpec PatienceSpec::hyper_exponential(std::vector<double> weights,
                                             std::vector<double> rates) {
  check_mixture(weights, rates, "hyper-exponential patience");
  std::vector<PatienceBranch> b;
  b.reserve(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j)
    b.push_back({weights[j], rates[j]});
  return PatienceSpec(std::move(b));
}

double PatienceSpec::exponential_rate() const {
  if (!is_exponential()) throw InvalidModel("patience is not exponential");
  return branches_.front().rate;
}

double PatienceSpec::mean() const {
  double m = 0.0;
  for (const auto& b : branches_) m += b.weight / b.rate;
  return m;
}

double PatienceSpec::sample(std::mt19937_64& rng) const {
  double rate = branches_.front().rate;
  if (branches_.size() > 1) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    rate = branches_.back().rate;
    for (std::size_t j = 0; j + 1 < branches_.size(); ++j) {
      if (u < branches_[j].weight) {
        rate = branches_[j].rate;
        break;
      }
      u -= branches_[j].weight;
    }
  }
  return std::exponential_distribution<double>(rate)(rng);
}

// ---------------------------------------------------------------------------
// Classes and systems

double equilibrium_factor(const ClassParams& cls, double s) {
  if (!(s > 0.0))
    throw std::domain_error("equilibrium_factor: s must be positive");
  const double mean = cls.service.mean();
  if (s * mean < 1e-8) return cls.arrival_rate * mean;
  return cls.arrival_rate * cls.service.excess_lst(s);
}

double equilibrium_factor_derivative(const ClassParams& cls, double s) {
  if (!(s > 0.0))
    throw std::domain_error("equilibrium_factor_derivative: s must be positive");
  return cls.arrival_rate * cls.service.excess_lst_derivative(s);
}

namespace {

void validate_classes(const std::array<ClassParams, 2>& classes,
                      const SeriesControl& series) {
  for (const auto& c : classes) {
    require(std::isfinite(c.arrival_rate) && c.arrival_rate >= 0.0,
            "arrival rates must be nonnegative");
  }
  require(series.tolerance > 0.0, "series tolerance must be positive");
  require(series.max_diagonal >= 1, "max_diagonal must be >= 1");
  require(series.fixed_diagonals >= 0, "fixed_diagonals must be >= 0");
  require(series.working_digits == 0 ||
              (series.working_digits >= 16 && series.working_digits <= 200),
          "working_digits must be 0 or in [16, 200]");
}

}  // namespace

void Mg1Config::validate() const { validate_classes(classes, series); }

void MmkConfig::validate() const {
  validate_classes(classes, series);
  require(servers >= 1, "server count must be >= 1");
  for (const auto& c : classes) {
    require(c.service.is_exponential(),
            "M/M/k+M requires exponential service times");
    require(c.patience.is_exponential(),
            "M/M/k+M requires exponential patience times");
  }
}

Mg1Config MmkConfig::as_mg1() const { return Mg1Config{classes, series}; }

MmkConfig make_mmk(int servers, std::array<double, 2> lambda,
                   std::array<double, 2> mu, std::array<double, 2> theta,
                   SeriesControl series) {
  MmkConfig cfg;
  cfg.servers = servers;
  for (int c = 0; c < 2; ++c) {
    cfg.classes[c].arrival_rate = lambda[c];
    cfg.classes[c].service = ServiceModel::exponential(mu[c]);
    cfg.classes[c].patience = PatienceSpec::exponential(theta[c]);
  }
  cfg.series = series;
  cfg.validate();
  return cfg;
}

}  // namespace twoclass
