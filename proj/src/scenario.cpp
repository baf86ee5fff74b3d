#include "twoclass/scenario.hpp"

#include <fstream>
#include <sstream>

#include "twoclass/json_schema.hpp"

namespace twoclass {

namespace {

using nlohmann::json;

TimeUnit parse_unit(const std::string& s) {
  if (s == "seconds") return TimeUnit::kSeconds;
  if (s == "minutes") return TimeUnit::kMinutes;
  return TimeUnit::kHours;
}

double rate_of(const json& node) {
  return node.contains("rate") ? node["rate"].get<double>()
                               : 1.0 / node["mean"].get<double>();
}

ServiceModel parse_service(const json& node) {
  const std::string type = node["type"];
  if (type == "exponential") return ServiceModel::exponential(rate_of(node));
  if (type == "deterministic")
    return ServiceModel::deterministic(node["duration"].get<double>());
  if (type == "erlang")
    return ServiceModel::erlang(node["phases"].get<int>(), node["rate"].get<double>());
  return ServiceModel::hyper_exponential(node["weights"].get<std::vector<double>>(),
                                         node["rates"].get<std::vector<double>>());
}

PatienceSpec parse_patience(const json& node) {
  if (node["type"] == "exponential") return PatienceSpec::exponential(rate_of(node));
  return PatienceSpec::hyper_exponential(node["weights"].get<std::vector<double>>(),
                                         node["rates"].get<std::vector<double>>());
}

std::string path_name(SolutionPath p) {
  switch (p) {
    case SolutionPath::kEmpty: return "empty";
    case SolutionPath::kSingleServer: return "single_server";
    case SolutionPath::kGeneral: return "general";
    case SolutionPath::kEqualMu: return "equal_mu";
  }
  return "unknown";
}

AnalyticResult from_mmk(const MmkSolution& sol, const MmkConfig& config) {
  AnalyticResult out;
  out.report = measures_mmk(sol, config);
  out.solution_path = path_name(sol.path);
  out.truncation_diagonal_used = sol.truncation_diagonal_used;
  out.tail_bound = sol.tail_bound;
  out.working_digits = sol.working_digits;
  return out;
}

AnalyticResult from_mg1(const Mg1Config& config) {
  const Mg1Solution sol = solve_mg1(config);
  AnalyticResult out;
  out.report = measures_mg1(sol, config);
  out.solution_path = "mg1";
  out.truncation_diagonal_used = sol.truncation_diagonal_used;
  out.tail_bound = sol.tail_bound;
  return out;
}

}  // namespace

double seconds_per(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::kSeconds: return 1.0;
    case TimeUnit::kMinutes: return 60.0;
    case TimeUnit::kHours: return 3600.0;
  }
  return 1.0;
}

std::string unit_name(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::kSeconds: return "seconds";
    case TimeUnit::kMinutes: return "minutes";
    case TimeUnit::kHours: return "hours";
  }
  return "seconds";
}

double Scenario::arrival_scale() const {
  return seconds_per(time_unit) / seconds_per(arrival_unit);
}

double Scenario::arrival_rate(int c) const {
  return classes[c].arrival_rate / arrival_scale();
}

Scenario Scenario::with_arrival_rates(double rate1, double rate2) const {
  Scenario out = *this;
  out.classes[0].arrival_rate = rate1 * arrival_scale();
  out.classes[1].arrival_rate = rate2 * arrival_scale();
  return out;
}

MmkConfig Scenario::mmk() const {
  MmkConfig c;
  c.servers = servers;
  c.classes = classes;
  c.series = series;
  return c;
}

Mg1Config Scenario::mg1() const {
  Mg1Config c;
  c.classes = classes;
  c.series = series;
  return c;
}

SimConfig Scenario::sim_config() const {
  SimConfig c;
  c.servers = servers;
  c.classes = classes;
  c.horizon = sim.horizon;
  c.warmup = sim.warmup;
  c.replications = sim.replications;
  c.seed = sim.seed;
  return c;
}

void Scenario::validate() const {
  if (model == ModelKind::kMmk) {
    mmk().validate();
  } else {
    if (servers != 1) throw InvalidModel("the mg1 model has exactly one server");
    mg1().validate();
  }
  sim_config().validate();
}

Scenario parse_scenario(const json& doc, const std::string& default_name) {
  const auto errors = scenario_schema().validate(doc);
  if (!errors.empty()) {
    std::string msg = "scenario does not match the schema:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ScenarioError(msg);
  }
  Scenario s;
  s.name = doc.value("name", default_name);
  s.model = doc["model"] == "mg1" ? ModelKind::kMg1 : ModelKind::kMmk;
  s.servers = doc.value("servers", 1);
  if (doc.contains("units")) {
    const json& u = doc["units"];
    s.time_unit = parse_unit(u.value("time", std::string("seconds")));
    s.arrival_unit = u.contains("arrivals") ? parse_unit(u["arrivals"]) : s.time_unit;
  }
  for (int c = 0; c < 2; ++c) {
    const json& node = doc["classes"][c];
    s.classes[c].arrival_rate = node["arrival_rate"].get<double>() * s.arrival_scale();
    s.classes[c].service = parse_service(node["service"]);
    s.classes[c].patience = parse_patience(node["patience"]);
  }
  if (doc.contains("solver")) {
    const json& v = doc["solver"];
    s.series.tolerance = v.value("tolerance", s.series.tolerance);
    s.series.max_diagonal = v.value("max_diagonal", s.series.max_diagonal);
    s.series.working_digits = v.value("working_digits", s.series.working_digits);
  }
  if (doc.contains("sim")) {
    const json& v = doc["sim"];
    s.sim.horizon = v.value("horizon", s.sim.horizon);
    s.sim.warmup = v.value("warmup", s.sim.warmup);
    s.sim.replications = v.value("replications", s.sim.replications);
    s.sim.seed = v.value("seed", s.sim.seed);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path + ": invalid JSON: " + e.what());
  }
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (auto dot = stem.rfind('.'); dot != std::string::npos && dot > 0)
    stem = stem.substr(0, dot);
  return parse_scenario(doc, stem);
}

AnalyticResult solve_scenario(const Scenario& scenario) {
  if (scenario.model == ModelKind::kMg1) return from_mg1(scenario.mg1());
  const MmkConfig config = scenario.mmk();
  return from_mmk(solve_mmk(config), config);
}

double pooled_mean_service(const Scenario& scenario) {
  const double l1 = scenario.classes[0].arrival_rate;
  const double l2 = scenario.classes[1].arrival_rate;
  const double t1 = scenario.classes[0].service.mean();
  const double t2 = scenario.classes[1].service.mean();
  if (l1 + l2 <= 0.0) return 0.5 * (t1 + t2);
  return (l1 * t1 + l2 * t2) / (l1 + l2);
}

AnalyticResult solve_pooled(const Scenario& scenario) {
  for (const auto& cls : scenario.classes) {
    if (!cls.service.is_exponential())
      throw InvalidModel("pooling requires exponential service in both classes");
  }
  Scenario pooled = scenario;
  const double rate = 1.0 / pooled_mean_service(scenario);
  for (auto& cls : pooled.classes) cls.service = ServiceModel::exponential(rate);
  if (pooled.model == ModelKind::kMg1) return from_mg1(pooled.mg1());
  const MmkConfig config = pooled.mmk();
  return from_mmk(solve_mmk_equal_mu(config), config);
}

}  // namespace twoclass
