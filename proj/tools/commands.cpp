#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>

#include "format.hpp"
#include "json.hpp"
#include "twoclass/oracles.hpp"
#include "twoclass/parallel.hpp"
#include "twoclass/scenario.hpp"
#include "twoclass/series.hpp"
#include "twoclass/sim.hpp"

namespace twoclass::cli {

namespace {

using ojson = nlohmann::ordered_json;

int guarded(std::ostream& err, const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InvalidModel& e) {
    err << "error: invalid model: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ConvergenceError& e) {
    err << "error: solver did not converge: " << e.what() << '\n';
    return kExitSolver;
  } catch (const SingularSystem& e) {
    err << "error: solver failed: " << e.what() << '\n';
    return kExitSolver;
  } catch (const TruncationError& e) {
    err << "error: oracle truncation failed: " << e.what() << '\n';
    return kExitSolver;
  }
}

bool is_solver_failure(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConvergenceError&) {
    return true;
  } catch (const SingularSystem&) {
    return true;
  } catch (...) {
    return false;
  }
}

std::string message_of(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& x) {
    return x.what();
  } catch (...) {
    return "unknown error";
  }
}

ojson report_json(const PerformanceReport& r) {
  ojson j = ojson::object();
  for (const auto& [name, value] : report_fields(r)) j[name] = json_number(value);
  return j;
}

ojson units_json(const Scenario& s) {
  return {{"time", unit_name(s.time_unit)}, {"arrivals", unit_name(s.arrival_unit)}};
}

ojson diagnostics_json(const AnalyticResult& a) {
  return {{"solution_path", a.solution_path},
          {"truncation_diagonal_used", a.truncation_diagonal_used},
          {"tail_bound", json_number(a.tail_bound)},
          {"working_digits", a.working_digits}};
}

void write_json(std::ostream& out, const ojson& doc) { out << doc.dump(2) << '\n'; }

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << '\n';
}

// ---------------------------------------------------------------------------
// compare: Table-1 shaped view of a report

const std::vector<std::string>& table_fields() {
  static const std::vector<std::string> f{"awt_1", "awt_2", "rs_pct_1", "rs_pct_2",
                                          "aq_1",  "aq_2",  "util_pct", "ast"};
  return f;
}

std::vector<double> table_row(const PerformanceReport& r) {
  return {r.classes[0].awt,
          r.classes[1].awt,
          100.0 * r.classes[0].p_serve,
          100.0 * r.classes[1].p_serve,
          r.classes[0].lq,
          r.classes[1].lq,
          100.0 * r.utilization,
          r.avg_service_time_served};
}

std::vector<double> relative_errors(const std::vector<double>& sim,
                                    const std::vector<double>& analytic) {
  std::vector<double> out(sim.size());
  for (std::size_t i = 0; i < sim.size(); ++i) {
    out[i] = sim[i] != 0.0 ? std::abs(sim[i] - analytic[i]) / std::abs(sim[i])
                           : std::nan("");
  }
  return out;
}

ojson table_json(const std::vector<double>& row) {
  ojson j = ojson::object();
  for (std::size_t i = 0; i < row.size(); ++i) j[table_fields()[i]] = json_number(row[i]);
  return j;
}

void apply_sim_overrides(Scenario& s, std::optional<std::uint64_t> seed,
                         std::optional<long> horizon, std::optional<int> reps) {
  if (seed) s.sim.seed = *seed;
  if (horizon) s.sim.horizon = *horizon;
  if (reps) s.sim.replications = *reps;
  s.sim_config().validate();
}

// ---------------------------------------------------------------------------
// sweep

struct SweepPoint {
  std::string system;
  double lambda = 0.0;
  double rate1 = 0.0, rate2 = 0.0;
  Scenario scenario;
  std::optional<AnalyticResult> result;
  std::string error;
  bool solver_failure = false;
};

const std::vector<std::string>& panel_fields() {
  static const std::vector<std::string> f{"pct_served_all", "overall_awt",
                                          "throughput", "avg_service_time_served"};
  return f;
}

std::vector<std::string> sweep_columns() {
  std::vector<std::string> cols{"system", "lambda", "lambda_1", "lambda_2"};
  for (const auto& f : panel_fields()) cols.push_back(f);
  for (const auto& f : report_field_names()) {
    if (std::find(panel_fields().begin(), panel_fields().end(), f) == panel_fields().end())
      cols.push_back(f);
  }
  for (const char* d : {"truncation_diagonal_used", "tail_bound", "working_digits", "error"})
    cols.push_back(d);
  return cols;
}

std::vector<double> sweep_grid(const SweepOptions& o) {
  std::vector<double> grid;
  for (int i = 0; i < o.steps; ++i) {
    grid.push_back(o.steps == 1 ? o.from
                                : o.from + (o.to - o.from) * i / (o.steps - 1));
  }
  return grid;
}

void write_gnuplot(const std::string& path, const std::string& data,
                   const std::vector<std::string>& systems) {
  std::ofstream g(path);
  if (!g) throw ScenarioError("cannot write gnuplot script: " + path);
  const auto cols = sweep_columns();
  auto index = [&](const std::string& name) {
    return std::find(cols.begin(), cols.end(), name) - cols.begin() + 1;
  };
  std::string names;
  for (const auto& s : systems) names += (names.empty() ? "" : " ") + s;
  g << "# gnuplot script: four summary panels of a sweep\n"
    << "set datafile separator \",\"\n"
    << "set terminal pngcairo size 1200,900\n"
    << "set output \"" << data << ".png\"\n"
    << "systems = \"" << names << "\"\n"
    << "set multiplot layout 2,2\n"
    << "set xlabel \"total arrival rate\"\n"
    << "set key left top\n";
  const std::pair<const char*, const char*> panels[] = {
      {"pct_served_all", "fraction of customers served"},
      {"overall_awt", "mean waiting time"},
      {"throughput", "throughput"},
      {"avg_service_time_served", "mean service time of served"}};
  for (const auto& [field, label] : panels) {
    g << "set ylabel \"" << label << "\"\n"
      << "plot for [s in systems] \"" << data << "\" using "
      << "(strcol(1) eq s ? $" << index("lambda") << " : 1/0):"
      << "(strcol(1) eq s ? $" << index(field) << " : 1/0) "
      << "with linespoints title s\n";
  }
  g << "unset multiplot\n";
}

}  // namespace

int cmd_solve(const std::string& path, const SolveOptions& options,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = load_scenario(path);
    const AnalyticResult a = solve_scenario(s);
    if (options.format == Format::kJson) {
      ojson doc;
      doc["scenario"] = s.name;
      doc["model"] = s.model == ModelKind::kMmk ? "mmk" : "mg1";
      doc["servers"] = s.servers;
      doc["units"] = units_json(s);
      doc["measures"] = report_json(a.report);
      doc["diagnostics"] = diagnostics_json(a);
      write_json(out, doc);
    } else {
      std::vector<std::string> head, row;
      for (const auto& [name, value] : report_fields(a.report)) {
        head.push_back(name);
        row.push_back(csv_number(value));
      }
      for (const char* d : {"solution_path", "truncation_diagonal_used", "tail_bound",
                            "working_digits"})
        head.push_back(d);
      row.push_back(a.solution_path);
      row.push_back(std::to_string(a.truncation_diagonal_used));
      row.push_back(csv_number(a.tail_bound));
      row.push_back(std::to_string(a.working_digits));
      write_csv_row(out, head);
      write_csv_row(out, row);
    }
    return kExitOk;
  });
}

int cmd_sweep(const std::vector<std::string>& paths, const SweepOptions& options,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (paths.empty()) throw ScenarioError("sweep needs at least one scenario");
    if (options.vary != "total_arrival_rate" && options.vary != "arrival_rate_1" &&
        options.vary != "arrival_rate_2")
      throw ScenarioError("unknown sweep variable: " + options.vary);
    if (options.steps < 1) throw ScenarioError("--steps must be at least 1");
    if (!(options.from >= 0.0) || !(options.to >= 0.0))
      throw ScenarioError("sweep range must be nonnegative");
    if (options.split && !(*options.split >= 0.0 && *options.split <= 1.0))
      throw ScenarioError("--split must lie in [0, 1]");

    std::vector<Scenario> systems;
    for (const auto& p : paths) systems.push_back(load_scenario(p));
    const auto grid = sweep_grid(options);

    std::vector<SweepPoint> points;
    std::vector<std::string> names;
    for (const Scenario& s : systems) {
      names.push_back(s.name);
      const double r1 = s.arrival_rate(0), r2 = s.arrival_rate(1);
      const double split = options.split.value_or(r1 + r2 > 0.0 ? r1 / (r1 + r2) : 0.5);
      for (double v : grid) {
        SweepPoint pt;
        pt.system = s.name;
        if (options.vary == "total_arrival_rate") {
          pt.rate1 = split * v;
          pt.rate2 = v - pt.rate1;
        } else if (options.vary == "arrival_rate_1") {
          pt.rate1 = v;
          pt.rate2 = r2;
        } else {
          pt.rate1 = r1;
          pt.rate2 = v;
        }
        pt.lambda = pt.rate1 + pt.rate2;
        pt.scenario = s.with_arrival_rates(pt.rate1, pt.rate2);
        points.push_back(std::move(pt));
      }
    }

    parallel_for(static_cast<int>(points.size()), [&](int i) {
      SweepPoint& pt = points[i];
      try {
        pt.result = solve_scenario(pt.scenario);
      } catch (...) {
        const auto e = std::current_exception();
        pt.error = message_of(e);
        pt.solver_failure = is_solver_failure(e);
      }
    });

    bool any_failure = false;
    const auto cols = sweep_columns();
    if (options.format == Format::kCsv) write_csv_row(out, cols);
    ojson rows = ojson::array();
    for (const SweepPoint& pt : points) {
      any_failure = any_failure || !pt.result;
      std::map<std::string, double> values;
      if (pt.result) {
        for (const auto& [name, v] : report_fields(pt.result->report)) values[name] = v;
      }
      if (options.format == Format::kCsv) {
        std::vector<std::string> row{csv_text(pt.system), csv_number(pt.lambda),
                                     csv_number(pt.rate1), csv_number(pt.rate2)};
        for (std::size_t c = 4; c + 4 < cols.size(); ++c)
          row.push_back(pt.result ? csv_number(values[cols[c]]) : "");
        if (pt.result) {
          row.push_back(std::to_string(pt.result->truncation_diagonal_used));
          row.push_back(csv_number(pt.result->tail_bound));
          row.push_back(std::to_string(pt.result->working_digits));
          row.push_back("");
        } else {
          row.insert(row.end(), {"", "", "", csv_text("ERROR: " + pt.error)});
        }
        write_csv_row(out, row);
      } else {
        ojson r;
        r["system"] = pt.system;
        r["lambda"] = json_number(pt.lambda);
        r["lambda_1"] = json_number(pt.rate1);
        r["lambda_2"] = json_number(pt.rate2);
        if (pt.result) {
          r["measures"] = report_json(pt.result->report);
          r["diagnostics"] = diagnostics_json(*pt.result);
          r["error"] = nullptr;
        } else {
          r["measures"] = nullptr;
          r["diagnostics"] = nullptr;
          r["error"] = pt.error;
        }
        rows.push_back(std::move(r));
      }
    }
    if (options.format == Format::kJson) {
      ojson doc;
      doc["vary"] = options.vary;
      doc["units"] = units_json(systems.front());
      doc["rows"] = std::move(rows);
      write_json(out, doc);
    }
    if (!options.gnuplot_path.empty()) {
      if (options.data_path.empty())
        throw ScenarioError("--gnuplot needs the CSV written to a file with --out");
      write_gnuplot(options.gnuplot_path, options.data_path, names);
    }
    for (const SweepPoint& pt : points) {
      if (!pt.result)
        err << "warning: " << pt.system << " at lambda=" << pt.lambda << ": " << pt.error << '\n';
    }
    return any_failure ? kExitSolver : kExitOk;
  });
}

int cmd_simulate(const std::string& path, const SimulateOptions& options,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scenario s = load_scenario(path);
    apply_sim_overrides(s, options.seed, options.horizon, options.replications);
    SimConfig config = s.sim_config();
    config.track_virtual_wait = options.virtual_wait;
    const SimEstimate est = simulate(config);
    bool conserved = true;
    for (const auto& c : est.counts) conserved = conserved && c.conserved();

    const auto mean = report_fields(est.mean);
    const auto half = report_fields(est.half_width);
    if (options.format == Format::kJson) {
      ojson doc;
      doc["scenario"] = s.name;
      doc["units"] = units_json(s);
      doc["sim"] = {{"horizon", s.sim.horizon},
                    {"warmup", json_number(s.sim.warmup)},
                    {"replications", s.sim.replications},
                    {"seed", s.sim.seed}};
      doc["mean"] = report_json(est.mean);
      doc["half_width"] = report_json(est.half_width);
      doc["conserved"] = conserved;
      if (options.virtual_wait) {
        doc["virtual_wait"] = {{"checked", est.virtual_checked},
                               {"outcome_mismatches", est.virtual_outcome_mismatches},
                               {"max_error", json_number(est.virtual_wait_max_error)}};
      }
      write_json(out, doc);
    } else {
      write_csv_row(out, {"field", "mean", "half_width"});
      for (std::size_t i = 0; i < mean.size(); ++i)
        write_csv_row(out, {mean[i].first, csv_number(mean[i].second),
                            csv_number(half[i].second)});
    }
    return kExitOk;
  });
}

int cmd_compare(const std::string& path, const CompareOptions& options,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Scenario s = load_scenario(path);
    apply_sim_overrides(s, options.seed, options.horizon, options.replications);

    std::optional<AnalyticResult> analytic, pooled;
    std::optional<SimEstimate> sim;
    std::string pooled_error;
    parallel_for(3, [&](int cell) {
      if (cell == 0) {
        analytic = solve_scenario(s);
      } else if (cell == 1) {
        try {
          pooled = solve_pooled(s);
        } catch (const InvalidModel& e) {
          pooled_error = e.what();
        }
      } else {
        sim = simulate(s.sim_config());
      }
    });

    const auto sim_row = table_row(sim->mean);
    const auto sim_half = table_row(sim->half_width);
    const auto a_row = table_row(analytic->report);
    const auto a_err = relative_errors(sim_row, a_row);

    if (options.format == Format::kJson) {
      ojson doc;
      doc["scenario"] = s.name;
      doc["units"] = units_json(s);
      doc["pooled_mean_service"] = json_number(pooled_mean_service(s));
      ojson rows;
      rows["analytic"] = table_json(a_row);
      rows["pooled"] = pooled ? table_json(table_row(pooled->report)) : ojson(nullptr);
      rows["simulation"] = table_json(sim_row);
      rows["simulation_half_width"] = table_json(sim_half);
      doc["rows"] = std::move(rows);
      ojson rel;
      rel["analytic"] = table_json(a_err);
      rel["pooled"] = pooled ? table_json(relative_errors(sim_row, table_row(pooled->report)))
                             : ojson(nullptr);
      doc["relative_error"] = std::move(rel);
      if (!pooled) doc["pooled_unavailable"] = pooled_error;
      write_json(out, doc);
    } else {
      std::vector<std::string> head{"row"};
      head.insert(head.end(), table_fields().begin(), table_fields().end());
      write_csv_row(out, head);
      auto emit = [&](const std::string& name, const std::vector<double>& row) {
        std::vector<std::string> cells{name};
        for (double v : row) cells.push_back(csv_number(v));
        write_csv_row(out, cells);
      };
      emit("analytic", a_row);
      if (pooled) emit("pooled", table_row(pooled->report));
      emit("simulation", sim_row);
      emit("simulation_half_width", sim_half);
      emit("relative_error_analytic", a_err);
      if (pooled) emit("relative_error_pooled", relative_errors(sim_row, table_row(pooled->report)));
    }
    if (!pooled) err << "note: pooled row unavailable: " << pooled_error << '\n';
    return kExitOk;
  });
}

}  // namespace twoclass::cli
