#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "format.hpp"
#include "json.hpp"
#include "twoclass/json_schema.hpp"
#include "twoclass/measures.hpp"
#include "twoclass/scenario.hpp"

namespace twoclass::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("twoclass_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string write(const std::string& name, const json& doc) { return write(name, doc.dump()); }

  static json cls(double lambda, double mu, double theta) {
    return {{"arrival_rate", lambda},
            {"service", {{"type", "exponential"}, {"rate", mu}}},
            {"patience", {{"type", "exponential"}, {"rate", theta}}}};
  }
  static json study_system(double t1, double t2) {
    return {{"model", "mmk"}, {"servers", 5}, {"classes", {cls(10, 1, t1), cls(10, 2, t2)}}};
  }
  static json call_center(double per_hour) {
    json c1 = {{"arrival_rate", per_hour / 2},
               {"service", {{"type", "exponential"}, {"mean", 223.97}}},
               {"patience", {{"type", "exponential"}, {"mean", 394.08}}}};
    json c2 = {{"arrival_rate", per_hour / 2},
               {"service", {{"type", "exponential"}, {"mean", 448.82}}},
               {"patience", {{"type", "exponential"}, {"mean", 946.53}}}};
    return {{"model", "mmk"},
            {"servers", 5},
            {"classes", {c1, c2}},
            {"sim", {{"horizon", 20000}, {"replications", 2}}},
            {"units", {{"time", "seconds"}, {"arrivals", "hours"}}}};
  }

  int solve(const std::string& path, Format f = Format::kJson) {
    out_.str("");
    err_.str("");
    return cmd_solve(path, {f}, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, SolveReportsMeasuresAndDiagnostics) {
  ASSERT_EQ(solve(write("base.json", study_system(1.5, 1.5))), kExitOk);
  const json doc = json::parse(out_.str());
  const auto r = evaluate(make_mmk(5, {10, 10}, {1, 2}, {1.5, 1.5}));
  EXPECT_EQ(doc["measures"]["pct_served_all"].get<double>(), round_sig(r.pct_served_all, 10));
  EXPECT_EQ(doc["measures"]["wait_served_1"].get<double>(), round_sig(r.classes[0].wait_served, 10));
  EXPECT_GT(doc["diagnostics"]["truncation_diagonal_used"].get<int>(), 0);
  EXPECT_GE(doc["diagnostics"]["tail_bound"].get<double>(), 0.0);
}

TEST_F(CliTest, JsonOutputRoundTripsExactly) {
  ASSERT_EQ(solve(write("neg.json", study_system(2, 1))), kExitOk);
  const nlohmann::ordered_json doc = nlohmann::ordered_json::parse(out_.str());
  EXPECT_EQ(doc.dump(2) + "\n", out_.str());
  const auto r = report_fields(evaluate(make_mmk(5, {10, 10}, {1, 2}, {2, 1})));
  for (const auto& [name, v] : r) {
    const double parsed = doc["measures"][name].get<double>();
    EXPECT_EQ(parsed, round_sig(v, 10)) << name;
    EXPECT_EQ(round_sig(parsed, 10), parsed) << name;
  }
}

TEST_F(CliTest, CsvHasSixSignificantDigits) {
  ASSERT_EQ(solve(write("base.json", study_system(1.5, 1.5)), Format::kCsv), kExitOk);
  std::istringstream in(out_.str());
  std::string head, row;
  std::getline(in, head);
  std::getline(in, row);
  EXPECT_EQ(head.rfind("p_serve_1,awt_1,", 0), 0u);
  const std::string first = row.substr(0, row.find(','));
  EXPECT_EQ(first, format_sig(evaluate(make_mmk(5, {10, 10}, {1, 2}, {1.5, 1.5})).classes[0].p_serve, 6));
}

TEST_F(CliTest, EmptySystemIsAllZero) {
  json doc = study_system(1.5, 1.5);
  doc["classes"][0]["arrival_rate"] = 0;
  doc["classes"][1]["arrival_rate"] = 0;
  ASSERT_EQ(solve(write("empty.json", doc)), kExitOk);
  for (const auto& [k, v] : json::parse(out_.str())["measures"].items()) EXPECT_EQ(v.get<double>(), 0.0) << k;
}

TEST_F(CliTest, ToleranceChangeIsInvisibleAtSixDigits) {
  json a = study_system(2, 1), b = study_system(2, 1);
  a["solver"] = {{"tolerance", 1e-12}};
  b["solver"] = {{"tolerance", 1e-10}};
  ASSERT_EQ(solve(write("a.json", a), Format::kCsv), kExitOk);
  const std::string first = out_.str();
  ASSERT_EQ(solve(write("b.json", b), Format::kCsv), kExitOk);
  auto measures = [](const std::string& csv) {
    const auto nl = csv.find('\n');
    const std::string row = csv.substr(nl + 1);
    return row.substr(0, row.find("general"));
  };
  EXPECT_EQ(measures(first), measures(out_.str()));
}

TEST_F(CliTest, MalformedInputExitsOne) {
  EXPECT_EQ(solve(write("bad.json", std::string("{\"model\": \"mmk\", "))), kExitInput);
  EXPECT_EQ(solve((dir_ / "missing.json").string()), kExitInput);

  json three = study_system(1, 1);
  three["classes"].push_back(cls(1, 1, 1));
  EXPECT_EQ(solve(write("three.json", three)), kExitInput);
  EXPECT_NE(err_.str().find("/classes"), std::string::npos);

  json extra = study_system(1, 1);
  extra["colour"] = "blue";
  EXPECT_EQ(solve(write("extra.json", extra)), kExitInput);

  json both = study_system(1, 1);
  both["classes"][0]["service"]["mean"] = 1.0;
  EXPECT_EQ(solve(write("both.json", both)), kExitInput);

  json negative = study_system(1, 1);
  negative["classes"][0]["arrival_rate"] = -1;
  EXPECT_EQ(solve(write("neg.json", negative)), kExitInput);

  json det = study_system(1, 1);
  det["classes"][0]["service"] = {{"type", "deterministic"}, {"duration", 1.0}};
  EXPECT_EQ(solve(write("det.json", det)), kExitInput);
  EXPECT_NE(err_.str().find("exponential"), std::string::npos);

  json servers = study_system(1, 1);
  servers["model"] = "mg1";
  EXPECT_EQ(solve(write("servers.json", servers)), kExitInput);
}

TEST_F(CliTest, NonConvergenceExitsTwo) {
  json doc = study_system(1.5, 1.5);
  doc["solver"] = {{"max_diagonal", 2}};
  EXPECT_EQ(solve(write("short.json", doc)), kExitSolver);
  EXPECT_NE(err_.str().find("converge"), std::string::npos);
}

TEST_F(CliTest, SingleServerGeneralService) {
  json doc = {{"model", "mg1"},
              {"classes",
               {{{"arrival_rate", 0.4},
                 {"service", {{"type", "deterministic"}, {"duration", 1.0}}},
                 {"patience", {{"type", "hyperexponential"}, {"weights", {0.5, 0.5}}, {"rates", {0.5, 2.0}}}}},
                {{"arrival_rate", 0.4},
                 {"service", {{"type", "erlang"}, {"phases", 2}, {"rate", 4.0}}},
                 {"patience", {{"type", "exponential"}, {"mean", 0.5}}}}}}};
  ASSERT_EQ(solve(write("g.json", doc)), kExitOk);
  EXPECT_EQ(json::parse(out_.str())["diagnostics"]["solution_path"], "mg1");
}

TEST_F(CliTest, UnitsScaleTimesExactly) {
  // The same call center entered in hours and in seconds.
  json hours = {{"model", "mmk"},
                {"servers", 5},
                {"classes",
                 {cls(30, 3600 / 223.97, 3600 / 394.08), cls(30, 3600 / 448.82, 3600 / 946.53)}},
                {"units", {{"time", "hours"}}}};
  json seconds = hours;
  for (int c = 0; c < 2; ++c) {
    for (const char* key : {"arrival_rate"})
      seconds["classes"][c][key] = hours["classes"][c][key].get<double>() / 3600;
    seconds["classes"][c]["service"]["rate"] = hours["classes"][c]["service"]["rate"].get<double>() / 3600;
    seconds["classes"][c]["patience"]["rate"] = hours["classes"][c]["patience"]["rate"].get<double>() / 3600;
  }
  seconds["units"] = {{"time", "seconds"}};
  ASSERT_EQ(solve(write("h.json", hours)), kExitOk);
  const json h = json::parse(out_.str())["measures"];
  ASSERT_EQ(solve(write("s.json", seconds)), kExitOk);
  const json s = json::parse(out_.str())["measures"];
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::abs(b); };
  for (const char* f : {"p_serve_1", "p_serve_2", "utilization", "pct_served_all", "lq_1"})
    EXPECT_TRUE(close(s[f].get<double>(), h[f].get<double>())) << f;
  for (const char* f : {"awt_1", "wait_served_2", "overall_awt", "avg_service_time_served"})
    EXPECT_TRUE(close(s[f].get<double>(), 3600 * h[f].get<double>())) << f;
  EXPECT_TRUE(close(s["throughput"].get<double>(), h["throughput"].get<double>() / 3600));
}

TEST_F(CliTest, MixedArrivalUnitsMatchConvertedScenario) {
  ASSERT_EQ(solve(write("mixed.json", call_center(36))), kExitOk);
  const json m = json::parse(out_.str())["measures"];
  const auto r = evaluate(make_mmk(5, {0.005, 0.005}, {1 / 223.97, 1 / 448.82},
                                   {1 / 394.08, 1 / 946.53}));
  EXPECT_NEAR(m["awt_1"].get<double>(), r.classes[0].awt, 1e-7 * r.classes[0].awt);
}

TEST_F(CliTest, ComparePooledMeanAndTableRow) {
  const std::string p36 = write("t36.json", call_center(36));
  CompareOptions opt;
  ASSERT_EQ(cmd_compare(p36, opt, out_, err_), kExitOk);
  json doc = json::parse(out_.str());
  EXPECT_NEAR(doc["pooled_mean_service"].get<double>(), 336.40, 0.005);

  out_.str("");
  ASSERT_EQ(cmd_compare(write("t60.json", call_center(60)), opt, out_, err_), kExitOk);
  doc = json::parse(out_.str());
  EXPECT_NEAR(doc["rows"]["analytic"]["rs_pct_1"].get<double>(), 71.06, 0.01);
  EXPECT_NEAR(doc["rows"]["analytic"]["rs_pct_2"].get<double>(), 85.03, 0.01);
  for (const auto& [k, v] : doc["relative_error"]["analytic"].items()) EXPECT_GE(v.get<double>(), 0.0);
}

TEST_F(CliTest, CompareWithIdenticalClassesPoolsExactly) {
  json doc = call_center(45);
  doc["classes"][1] = doc["classes"][0];
  ASSERT_EQ(cmd_compare(write("same.json", doc), {}, out_, err_), kExitOk);
  const json rows = json::parse(out_.str())["rows"];
  for (const auto& [k, v] : rows["analytic"].items())
    EXPECT_NEAR(v.get<double>(), rows["pooled"][k].get<double>(), 1e-9 * (1 + std::abs(v.get<double>()))) << k;
}

TEST_F(CliTest, CompareSeedOverrideIsReproducible) {
  const std::string p = write("t.json", call_center(45));
  CompareOptions opt;
  opt.seed = 99;
  ASSERT_EQ(cmd_compare(p, opt, out_, err_), kExitOk);
  const std::string a = out_.str();
  out_.str("");
  ASSERT_EQ(cmd_compare(p, opt, out_, err_), kExitOk);
  EXPECT_EQ(a, out_.str());
  opt.seed = 100;
  out_.str("");
  ASSERT_EQ(cmd_compare(p, opt, out_, err_), kExitOk);
  EXPECT_NE(a, out_.str());
}

TEST_F(CliTest, SimulateReportsIntervalsAndConservation) {
  json doc = study_system(1.5, 1.5);
  doc["sim"] = {{"horizon", 20000}, {"replications", 3}, {"seed", 5}};
  SimulateOptions opt;
  opt.virtual_wait = true;
  ASSERT_EQ(cmd_simulate(write("b.json", doc), opt, out_, err_), kExitOk);
  const json r = json::parse(out_.str());
  EXPECT_TRUE(r["conserved"].get<bool>());
  EXPECT_EQ(r["sim"]["seed"].get<int>(), 5);
  EXPECT_EQ(r["virtual_wait"]["outcome_mismatches"].get<int>(), 0);
  EXPECT_GT(r["half_width"]["pct_served_all"].get<double>(), 0.0);
}

std::vector<std::map<std::string, std::string>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> head;
  std::stringstream hs(line);
  for (std::string c; std::getline(hs, c, ',');) head.push_back(c);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    std::map<std::string, std::string> row;
    std::stringstream ls(line);
    std::string cell;
    for (std::size_t i = 0; i < head.size(); ++i) {
      if (!std::getline(ls, cell, ',')) cell.clear();
      row[head[i]] = cell;
    }
    rows.push_back(row);
  }
  return rows;
}

TEST_F(CliTest, SweepShapes) {
  json base = study_system(1.5, 1.5), pos = study_system(1, 2), neg = study_system(2, 1);
  base["name"] = "base";
  pos["name"] = "positive";
  neg["name"] = "negative";
  SweepOptions opt;
  opt.split = 0.5;
  ASSERT_EQ(cmd_sweep({write("b.json", base), write("p.json", pos), write("n.json", neg)}, opt, out_, err_),
            kExitOk);
  const auto rows = parse_csv(out_.str());
  ASSERT_EQ(rows.size(), 45u);
  std::map<std::string, std::vector<std::map<std::string, std::string>>> by;
  for (const auto& r : rows) by[r.at("system")].push_back(r);
  auto num = [](const std::map<std::string, std::string>& r, const char* f) { return std::stod(r.at(f)); };

  for (const auto& r : by["base"]) EXPECT_EQ(r.at("avg_service_time_served"), "0.75");
  double peak = 0.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < by["positive"].size(); ++i) {
    if (num(by["positive"][i], "throughput") > peak) {
      peak = num(by["positive"][i], "throughput");
      at = i;
    }
  }
  EXPECT_GT(at, 0u);
  EXPECT_LT(at, by["positive"].size() - 1);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_GT(num(by["negative"][i], "pct_served_all"), num(by["base"][i], "pct_served_all"));
    EXPECT_EQ(by["base"][i].at("error"), "");
  }
}

TEST_F(CliTest, SweepMarksFailedPoints) {
  json doc = study_system(1.5, 1.5);
  doc["solver"] = {{"max_diagonal", 30}};
  SweepOptions opt;
  opt.steps = 8;
  opt.from = 1;
  opt.to = 40;
  EXPECT_EQ(cmd_sweep({write("b.json", doc)}, opt, out_, err_), kExitSolver);
  const auto rows = parse_csv(out_.str());
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows.front().at("error"), "");
  EXPECT_EQ(rows.back().at("error").rfind("ERROR", 0), 0u);
  EXPECT_EQ(rows.back().at("throughput"), "");
}

TEST_F(CliTest, SweepOrderIsIndependentOfThreadCount) {
  const std::string p = write("n.json", study_system(2, 1));
  SweepOptions opt;
  opt.steps = 12;
  setenv("TWOCLASS_THREADS", "1", 1);
  ASSERT_EQ(cmd_sweep({p}, opt, out_, err_), kExitOk);
  const std::string serial = out_.str();
  setenv("TWOCLASS_THREADS", "6", 1);
  out_.str("");
  ASSERT_EQ(cmd_sweep({p}, opt, out_, err_), kExitOk);
  unsetenv("TWOCLASS_THREADS");
  EXPECT_EQ(serial, out_.str());
}

TEST_F(CliTest, SweepGnuplotScript) {
  SweepOptions opt;
  opt.steps = 3;
  opt.gnuplot_path = (dir_ / "fig.gp").string();
  EXPECT_EQ(cmd_sweep({write("b.json", study_system(1.5, 1.5))}, opt, out_, err_), kExitInput);
  opt.data_path = (dir_ / "sweep.csv").string();
  ASSERT_EQ(cmd_sweep({write("b.json", study_system(1.5, 1.5))}, opt, out_, err_), kExitOk);
  std::ifstream in(opt.gnuplot_path);
  const std::string script((std::istreambuf_iterator<char>(in)), {});
  std::size_t plots = 0;
  for (auto pos = script.find("plot for"); pos != std::string::npos; pos = script.find("plot for", pos + 1))
    ++plots;
  EXPECT_EQ(plots, 4u);
  EXPECT_NE(script.find(opt.data_path), std::string::npos);
}

TEST_F(CliTest, SweepRejectsBadArguments) {
  const std::string p = write("b.json", study_system(1.5, 1.5));
  SweepOptions opt;
  opt.vary = "servers";
  EXPECT_EQ(cmd_sweep({p}, opt, out_, err_), kExitInput);
  opt = {};
  opt.from = -1;
  EXPECT_EQ(cmd_sweep({p}, opt, out_, err_), kExitInput);
}

TEST(Schema, ShippedScenariosValidate) {
  const fs::path root = TWOCLASS_SOURCE_DIR;
  std::ifstream schema_file(root / "docs" / "scenario.schema.json");
  const JsonSchema shipped(json::parse(schema_file));
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(root / "scenarios")) {
    std::ifstream in(entry.path());
    const json doc = json::parse(in);
    EXPECT_TRUE(shipped.validate(doc).empty()) << entry.path();
    EXPECT_TRUE(scenario_schema().validate(doc).empty()) << entry.path();
    EXPECT_NO_THROW(load_scenario(entry.path().string())) << entry.path();
    ++seen;
  }
  EXPECT_GT(seen, 3);
}

TEST(Schema, RejectsUnsupportedKeywords) {
  EXPECT_THROW(JsonSchema(json{{"type", "object"}, {"patternProperties", json::object()}}),
               std::invalid_argument);
  EXPECT_THROW(JsonSchema(json{{"$ref", "#/$defs/missing"}}), std::invalid_argument);
}

TEST(Schema, ReportsPathsOfViolations) {
  const JsonSchema s(json{{"type", "object"},
                          {"properties", {{"n", {{"type", "integer"}, {"minimum", 1}}}}},
                          {"required", {"n"}}});
  EXPECT_TRUE(s.validate(json{{"n", 3}}).empty());
  EXPECT_TRUE(s.validate(json{{"n", 3.0}}).empty());
  const auto e = s.validate(json{{"n", 0}});
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].rfind("/n:", 0), 0u);
  EXPECT_FALSE(s.validate(json{{"n", 2.5}}).empty());
  EXPECT_FALSE(s.validate(json::object()).empty());
}

}  // namespace
}  // namespace twoclass::cli
