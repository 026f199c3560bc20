#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "tgen/experiment.hpp"
#include "tgen/sut.hpp"

using namespace tgen;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const char* name) {
  return std::string(TGEN_SCENARIO_DIR) + "/" + name;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag) {
    path = fs::temp_directory_path() / (std::string("tgen-test-") + tag + "-" +
                                        std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ExperimentPlan small_plan(const fs::path& out) {
  ExperimentPlan plan;
  plan.scenario_path = scenario_path("flat-api.json");
  plan.algorithms = {Algorithm::LtMosa, Algorithm::Mosa, Algorithm::Mio};
  plan.repetitions = 2;
  plan.budget_evaluations = 600;
  plan.seed_base = 40;
  plan.out_dir = out;
  plan.jobs = 2;
  return plan;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("single-run plan produces a complete degenerate bundle") {
  TempDir tmp("single");
  ExperimentPlan plan;
  plan.scenario_path = scenario_path("flat-api.json");
  plan.algorithms = {Algorithm::Mio};
  plan.repetitions = 1;
  plan.budget_evaluations = 500;
  plan.seed_base = 9;
  plan.out_dir = tmp.path;
  REQUIRE(run_experiment(plan) == ExperimentStatus::Ok);

  CHECK(fs::exists(tmp.path / "mio" / "9" / "events.jsonl"));
  CHECK(fs::exists(tmp.path / "mio" / "9" / "suite.json"));
  CHECK_FALSE(fs::exists(tmp.path / "PARTIAL"));

  json summary = json::parse(slurp(tmp.path / "summary.json"));
  CHECK(summary.at("scenario") == "flat-api");
  CHECK(summary.at("total_targets") == 20);
  const json& cov = summary.at("algorithms").at("mio").at("coverage");
  CHECK(cov.at("values").size() == 1);
  CHECK(cov.at("iqr") == 0.0);  // one sample: degenerate spread
  // No lt-mosa in the plan: nothing to compare.
  CHECK(json::parse(slurp(tmp.path / "comparisons.json")).empty());

  std::string rendered = render_report(tmp.path);
  CHECK(rendered.find("flat-api") != std::string::npos);
  CHECK(rendered.find("mio") != std::string::npos);
}

TEST_CASE("full grid writes one run directory per (algorithm, repetition)") {
  TempDir tmp("grid");
  ExperimentPlan plan = small_plan(tmp.path);
  REQUIRE(run_experiment(plan) == ExperimentStatus::Ok);

  int event_logs = 0;
  for (const char* alg : {"lt-mosa", "mosa", "mio"})
    for (int r = 0; r < 2; ++r) {
      fs::path dir = tmp.path / alg / std::to_string(40 + r);
      CHECK(fs::exists(dir / "events.jsonl"));
      CHECK(fs::exists(dir / "suite.json"));
      if (fs::exists(dir / "events.jsonl")) ++event_logs;
    }
  CHECK(event_logs == 6);

  json comparisons = json::parse(slurp(tmp.path / "comparisons.json"));
  REQUIRE(comparisons.size() == 2);
  for (const char* key : {"lt-mosa_vs_mio", "lt-mosa_vs_mosa"}) {
    REQUIRE(comparisons.contains(key));
    for (const char* metric : {"coverage", "faults", "auc"}) {
      const json& c = comparisons.at(key).at(metric);
      CHECK(c.at("p_value").get<double>() >= 0.0);
      CHECK(c.at("p_value").get<double>() <= 1.0);
      CHECK(c.at("a12").get<double>() >= 0.0);
      CHECK(c.at("a12").get<double>() <= 1.0);
      CHECK((c.at("method") == "exact" || c.at("method") == "approximate"));
    }
  }
}

TEST_CASE("rerunning an identical plan reproduces summary and comparisons byte for byte") {
  TempDir t1("rerun-a"), t2("rerun-b");
  REQUIRE(run_experiment(small_plan(t1.path)) == ExperimentStatus::Ok);
  REQUIRE(run_experiment(small_plan(t2.path)) == ExperimentStatus::Ok);
  CHECK(slurp(t1.path / "summary.json") == slurp(t2.path / "summary.json"));
  CHECK(slurp(t1.path / "comparisons.json") == slurp(t2.path / "comparisons.json"));
}

TEST_CASE("summary medians equal recomputation from the raw event logs") {
  TempDir tmp("recompute");
  ExperimentPlan plan = small_plan(tmp.path);
  REQUIRE(run_experiment(plan) == ExperimentStatus::Ok);
  json summary = json::parse(slurp(tmp.path / "summary.json"));
  for (const char* alg : {"lt-mosa", "mosa", "mio"}) {
    std::vector<double> cov;
    for (int r = 0; r < 2; ++r) {
      RunSeries s = series_from_events(tmp.path / alg / std::to_string(40 + r) / "events.jsonl",
                                       600.0);
      cov.push_back(static_cast<double>(s.final_covered));
    }
    CHECK(summary.at("algorithms").at(alg).at("coverage").at("median").get<double>() ==
          median(cov));
  }
}

TEST_CASE("suite files are consistent with their runs") {
  TempDir tmp("suite");
  ExperimentPlan plan = small_plan(tmp.path);
  plan.algorithms = {Algorithm::LtMosa};
  REQUIRE(run_experiment(plan) == ExperimentStatus::Ok);
  SimulatedSut sut = SimulatedSut::from_file(plan.scenario_path);
  json suite = json::parse(slurp(tmp.path / "lt-mosa" / "40" / "suite.json"));
  CHECK(suite.at("total_targets") == 20);
  std::set<int> covered;
  for (const json& entry : suite.at("tests")) {
    TestCase test = test_from_json(entry.at("test"));
    sut.reset();
    ExecutionResult res = sut.execute(test);
    for (int t : entry.at("covered_targets")) {
      covered.insert(t);
      CHECK(res.objectives[static_cast<size_t>(t)] == 0.0);
    }
  }
  CHECK(covered.size() == suite.at("covered_count").get<size_t>());
}

TEST_CASE("series_from_events prepends the origin and clamps to the budget") {
  TempDir tmp("series");
  fs::create_directories(tmp.path);
  fs::path f = tmp.path / "events.jsonl";
  std::ofstream(f) << R"({"generation":0,"evaluations":50,"covered_count":3,"model_trained":false,"timestamp":0.1})"
                   << "\n"
                   << R"({"generation":1,"evaluations":120,"covered_count":7,"model_trained":false,"timestamp":0.2})"
                   << "\n";
  RunSeries s = series_from_events(f, 100.0);
  REQUIRE(s.points.size() == 3);
  CHECK(s.points[0] == std::pair<double, int>{0.0, 0});
  CHECK(s.points[1] == std::pair<double, int>{50.0, 3});
  CHECK(s.points[2] == std::pair<double, int>{100.0, 7});  // 120 clamped to budget
  CHECK(s.final_covered == 7);
  CHECK_THROWS(series_from_events(tmp.path / "missing.jsonl", 100.0));
}

TEST_CASE("report on an incomplete bundle lists the missing runs") {
  TempDir tmp("incomplete");
  ExperimentPlan plan = small_plan(tmp.path);
  REQUIRE(run_experiment(plan) == ExperimentStatus::Ok);
  fs::remove(tmp.path / "mosa" / "41" / "events.jsonl");
  try {
    render_report(tmp.path);
    FAIL("expected an incomplete-bundle error");
  } catch (const std::exception& e) {
    std::string msg = e.what();
    CHECK(msg.find("mosa") != std::string::npos);
    CHECK(msg.find("41") != std::string::npos);
  }
  CHECK_THROWS(render_report(tmp.path / "does-not-exist"));
}

TEST_CASE("a bad scenario fails before any run output") {
  TempDir tmp("bad");
  ExperimentPlan plan = small_plan(tmp.path);
  plan.scenario_path = "/nonexistent/scenario.json";
  CHECK_THROWS_AS(run_experiment(plan), ParseError);
  CHECK_FALSE(fs::exists(tmp.path / "summary.json"));
}

TEST_CASE("plan validation") {
  TempDir tmp("validate");
  ExperimentPlan plan = small_plan(tmp.path);
  plan.repetitions = 0;
  CHECK_THROWS_AS(run_experiment(plan), std::invalid_argument);
  plan = small_plan(tmp.path);
  plan.algorithms.clear();
  CHECK_THROWS_AS(run_experiment(plan), std::invalid_argument);
}

}  // TEST_SUITE
