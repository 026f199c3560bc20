#include "tgen/experiment.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace tgen {

namespace fs = std::filesystem;

namespace {

struct RunOutcome {
  Algorithm algorithm;
  std::uint64_t seed = 0;
  double final_coverage = 0.0;
  double faults = 0.0;
  double auc = 0.0;
  bool failed = false;
  std::string error;
};

void write_run_files(const fs::path& dir, const SearchResult& result, SimulatedSut& sut) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "events.jsonl");
    for (const auto& e : result.events) {
      out << json{{"generation", e.generation},
                  {"evaluations", e.evaluations},
                  {"covered_count", e.covered_count},
                  {"model_trained", e.model_trained},
                  {"timestamp", e.timestamp}}
                 .dump()
          << "\n";
    }
  }
  if (!result.linkage_dumps.empty()) {
    std::ofstream out(dir / "linkage.jsonl");
    for (const auto& d : result.linkage_dumps) out << d.dump() << "\n";
  }

  // Suite: one entry per distinct archived test, with the targets it covers
  // and the fault signatures it triggers on re-execution.
  std::vector<std::pair<json, std::vector<int>>> entries;
  for (size_t t = 0; t < result.archive.size(); ++t) {
    const auto& slot = result.archive.slot(t);
    if (!slot) continue;
    json tj = test_to_json(*slot, sut.catalog());
    bool merged = false;
    for (auto& [ej, targets] : entries)
      if (ej == tj) {
        targets.push_back(static_cast<int>(t));
        merged = true;
        break;
      }
    if (!merged) entries.push_back({std::move(tj), {static_cast<int>(t)}});
  }
  json tests = json::array();
  for (auto& [tj, targets] : entries) {
    sut.reset();
    ExecutionResult res = sut.execute(test_from_json(tj));
    json faults = json::array();
    for (const auto& f : res.faults)
      faults.push_back(json{{"method", to_string(f.method)},
                            {"endpoint", f.endpoint_template},
                            {"last_statement", f.last_statement_id}});
    tests.push_back(json{{"test", tj}, {"covered_targets", targets}, {"faults", faults}});
  }
  json run_faults = json::array();
  for (const auto& f : result.faults)
    run_faults.push_back(json{{"method", to_string(f.method)},
                              {"endpoint", f.endpoint_template},
                              {"last_statement", f.last_statement_id}});
  json suite{{"tests", tests},
             {"covered_count", result.archive.covered_count()},
             {"total_targets", result.archive.size()},
             {"unique_faults", run_faults},
             {"evaluations", result.evaluations}};
  std::ofstream(dir / "suite.json") << suite.dump(2) << "\n";
}

json stat_block(std::vector<double> values) {
  json j;
  j["values"] = values;
  j["median"] = median(values);
  j["iqr"] = iqr(values);
  return j;
}

json comparison_block(const std::vector<double>& treat, const std::vector<double>& control) {
  double p = wilcoxon_rank_sum(treat, control);
  double a12 = vargha_delaney_a12(treat, control);
  return json{{"p_value", p},
              {"a12", a12},
              {"magnitude", a12_magnitude(a12)},
              {"method", wilcoxon_is_exact(treat, control) ? "exact" : "approximate"}};
}

}  // namespace

RunSeries series_from_events(const fs::path& events_file, double budget) {
  std::ifstream in(events_file);
  if (!in) throw std::runtime_error("cannot open " + events_file.string());
  RunSeries series;
  series.points.push_back({0.0, 0});
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json e = json::parse(line);
    double x = std::min(static_cast<double>(e.at("evaluations").get<long>()), budget);
    series.points.push_back({x, e.at("covered_count").get<int>()});
    series.final_covered = e.at("covered_count").get<int>();
  }
  return series;
}

ExperimentStatus run_experiment(const ExperimentPlan& plan) {
  if (plan.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (plan.algorithms.empty()) throw std::invalid_argument("no algorithms selected");

  // Parse once up front so a bad scenario fails before any run output.
  SimulatedSut probe = SimulatedSut::from_file(plan.scenario_path);
  const int total_targets = static_cast<int>(probe.targets().size());

  fs::create_directories(plan.out_dir);

  std::vector<RunOutcome> outcomes;
  for (Algorithm alg : plan.algorithms)
    for (int r = 0; r < plan.repetitions; ++r)
      outcomes.push_back({alg, plan.seed_base + static_cast<std::uint64_t>(r)});

  const double budget_x = plan.budget_evaluations
                              ? static_cast<double>(*plan.budget_evaluations)
                              : *plan.budget_seconds;

  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= outcomes.size()) return;
      RunOutcome& run = outcomes[i];
      try {
        SimulatedSut sut = SimulatedSut::from_file(plan.scenario_path);
        SearchConfig config;
        config.algorithm = run.algorithm;
        config.budget_evaluations = plan.budget_evaluations;
        config.budget_seconds = plan.budget_seconds;
        config.seed = run.seed;
        config.dump_linkage_trees = plan.dump_linkage_trees;
        config.max_test_length = plan.max_test_length;
        SearchResult result = run_search(config, sut);

        fs::path dir = plan.out_dir / to_string(run.algorithm) / std::to_string(run.seed);
        {
          std::lock_guard<std::mutex> lock(io_mutex);
          write_run_files(dir, result, sut);
        }
        run.final_coverage = static_cast<double>(result.archive.covered_count());
        run.faults = static_cast<double>(result.faults.size());
        RunSeries series = series_from_events(dir / "events.jsonl", budget_x);
        run.auc = normalized_auc(series, budget_x, total_targets);
      } catch (const std::exception& e) {
        run.failed = true;
        run.error = e.what();
      }
    }
  };

  int jobs = std::max(1, plan.jobs);
  std::vector<std::thread> threads;
  for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::vector<const RunOutcome*> failures;
  for (const auto& run : outcomes)
    if (run.failed) failures.push_back(&run);
  if (!failures.empty()) {
    std::ofstream marker(plan.out_dir / "PARTIAL");
    for (const auto* f : failures)
      marker << to_string(f->algorithm) << "/" << f->seed << ": " << f->error << "\n";
    return ExperimentStatus::Partial;
  }

  auto values_of = [&](Algorithm alg, auto member) {
    std::vector<double> vs;
    for (const auto& run : outcomes)
      if (run.algorithm == alg) vs.push_back(run.*member);
    return vs;
  };

  json summary;
  summary["scenario"] = probe.name();
  summary["total_targets"] = total_targets;
  if (plan.budget_evaluations) summary["budget_evaluations"] = *plan.budget_evaluations;
  if (plan.budget_seconds) summary["budget_seconds"] = *plan.budget_seconds;
  summary["repetitions"] = plan.repetitions;
  summary["seed_base"] = plan.seed_base;
  for (Algorithm alg : plan.algorithms) {
    json a;
    a["coverage"] = stat_block(values_of(alg, &RunOutcome::final_coverage));
    a["faults"] = stat_block(values_of(alg, &RunOutcome::faults));
    a["auc"] = stat_block(values_of(alg, &RunOutcome::auc));
    summary["algorithms"][to_string(alg)] = a;
  }
  std::ofstream(plan.out_dir / "summary.json") << summary.dump(2) << "\n";

  json comparisons = json::object();
  auto has = [&](Algorithm a) {
    return std::find(plan.algorithms.begin(), plan.algorithms.end(), a) != plan.algorithms.end();
  };
  if (has(Algorithm::LtMosa)) {
    for (Algorithm baseline : {Algorithm::Mio, Algorithm::Mosa}) {
      if (!has(baseline)) continue;
      json c;
      c["coverage"] = comparison_block(values_of(Algorithm::LtMosa, &RunOutcome::final_coverage),
                                       values_of(baseline, &RunOutcome::final_coverage));
      c["faults"] = comparison_block(values_of(Algorithm::LtMosa, &RunOutcome::faults),
                                     values_of(baseline, &RunOutcome::faults));
      c["auc"] = comparison_block(values_of(Algorithm::LtMosa, &RunOutcome::auc),
                                  values_of(baseline, &RunOutcome::auc));
      comparisons["lt-mosa_vs_" + to_string(baseline)] = c;
    }
  }
  std::ofstream(plan.out_dir / "comparisons.json") << comparisons.dump(2) << "\n";
  return ExperimentStatus::Ok;
}

std::string render_report(const fs::path& bundle_dir) {
  std::ifstream sf(bundle_dir / "summary.json");
  if (!sf) throw std::runtime_error("incomplete bundle: missing summary.json in " + bundle_dir.string());
  json summary = json::parse(sf);

  // Completeness: every (algorithm, seed) run directory must have its files.
  std::vector<std::string> missing;
  const int reps = summary.at("repetitions").get<int>();
  const std::uint64_t seed_base = summary.at("seed_base").get<std::uint64_t>();
  for (auto it = summary.at("algorithms").begin(); it != summary.at("algorithms").end(); ++it) {
    for (int r = 0; r < reps; ++r) {
      fs::path dir = bundle_dir / it.key() / std::to_string(seed_base + static_cast<std::uint64_t>(r));
      if (!fs::exists(dir / "events.jsonl")) missing.push_back((dir / "events.jsonl").string());
      if (!fs::exists(dir / "suite.json")) missing.push_back((dir / "suite.json").string());
    }
  }
  if (!missing.empty()) {
    std::string msg = "incomplete bundle; missing runs:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw std::runtime_error(msg);
  }

  std::ostringstream out;
  out << "Scenario: " << summary.at("scenario").get<std::string>()
      << "  (targets: " << summary.at("total_targets").get<int>() << ")\n\n";

  char line[256];
  out << "Per-algorithm results (median / IQR over " << reps << " runs)\n";
  std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s %10s %10s %10s\n", "algorithm",
                "cov med", "cov IQR", "faults", "flt IQR", "AUC", "AUC IQR");
  out << line;
  for (auto it = summary.at("algorithms").begin(); it != summary.at("algorithms").end(); ++it) {
    const json& a = it.value();
    std::snprintf(line, sizeof(line), "%-10s %10.2f %10.2f %10.2f %10.2f %10.4f %10.4f\n",
                  it.key().c_str(), a.at("coverage").at("median").get<double>(),
                  a.at("coverage").at("iqr").get<double>(), a.at("faults").at("median").get<double>(),
                  a.at("faults").at("iqr").get<double>(), a.at("auc").at("median").get<double>(),
                  a.at("auc").at("iqr").get<double>());
    out << line;
  }

  std::ifstream cf(bundle_dir / "comparisons.json");
  if (cf) {
    json comparisons = json::parse(cf);
    if (!comparisons.empty()) {
      out << "\nPairwise comparisons (* marks p < 0.05)\n";
      std::snprintf(line, sizeof(line), "%-22s %-10s %10s %8s %-12s\n", "pair", "metric", "p-value",
                    "A12", "magnitude");
      out << line;
      for (auto it = comparisons.begin(); it != comparisons.end(); ++it) {
        for (const char* metric : {"coverage", "faults", "auc"}) {
          const json& c = it.value().at(metric);
          double p = c.at("p_value").get<double>();
          std::snprintf(line, sizeof(line), "%-22s %-10s %9.4f%s %8.2f %-12s\n", it.key().c_str(),
                        metric, p, p < 0.05 ? "*" : " ", c.at("a12").get<double>(),
                        c.at("magnitude").get<std::string>().c_str());
          out << line;
        }
      }
    }
  }
  return out.str();
}

}  // namespace tgen
