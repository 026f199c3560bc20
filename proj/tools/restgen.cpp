#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tgen/experiment.hpp"

using namespace tgen;

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary test-case generation for REST APIs (MIO / MOSA / LT-MOSA)"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an (algorithm x seed) experiment grid on a scenario");
  std::string scenario;
  std::string algorithms = "lt-mosa,mosa,mio";
  int reps = 20;
  long budget_evals = 20000;
  double budget_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir;
  int jobs = 1;
  bool dump_linkage = false;
  run->add_option("--scenario", scenario, "Simulated-SUT scenario file (JSON)")->required();
  run->add_option("--algorithms", algorithms, "Comma-separated subset of lt-mosa,mosa,mio");
  run->add_option("--reps", reps, "Repetitions per algorithm");
  run->add_option("--budget-evals", budget_evals, "Evaluation budget per run");
  run->add_option("--budget-seconds", budget_seconds, "Wall-clock budget per run (overrides evals)");
  run->add_option("--seed", seed, "Base seed; run r uses seed + r");
  run->add_option("--out", out_dir, "Output bundle directory")->required();
  run->add_option("--jobs", jobs, "Parallel runs");
  run->add_flag("--dump-linkage-tree", dump_linkage, "Dump trained linkage trees per run");

  // report
  auto* report = app.add_subcommand("report", "Render tables for a finished bundle");
  std::string bundle;
  report->add_option("dir", bundle, "Bundle directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ExperimentPlan plan;
      plan.scenario_path = scenario;
      std::stringstream ss(algorithms);
      std::string token;
      while (std::getline(ss, token, ',')) {
        auto alg = algorithm_from_string(token);
        if (!alg) {
          std::fprintf(stderr, "error: unknown algorithm '%s'\n", token.c_str());
          return 2;
        }
        plan.algorithms.push_back(*alg);
      }
      plan.repetitions = reps;
      if (budget_seconds > 0.0) {
        plan.budget_evaluations.reset();
        plan.budget_seconds = budget_seconds;
      } else {
        plan.budget_evaluations = budget_evals;
      }
      plan.seed_base = seed;
      plan.out_dir = out_dir;
      plan.jobs = jobs;
      plan.dump_linkage_trees = dump_linkage;
      if (run_experiment(plan) == ExperimentStatus::Partial) {
        std::fprintf(stderr, "error: some runs failed; see %s/PARTIAL\n", out_dir.c_str());
        return 3;
      }
      std::cout << render_report(out_dir);
      return 0;
    }
    std::cout << render_report(bundle);
    return 0;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
