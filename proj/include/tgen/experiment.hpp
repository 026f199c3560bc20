#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tgen/search.hpp"
#include "tgen/stats.hpp"

namespace tgen {

struct ExperimentPlan {
  std::string scenario_path;
  std::vector<Algorithm> algorithms;
  int repetitions = 20;
  std::optional<long> budget_evaluations = 20000;
  std::optional<double> budget_seconds;
  std::uint64_t seed_base = 0;
  std::filesystem::path out_dir;
  int jobs = 1;
  bool dump_linkage_trees = false;
  int max_test_length = kDefaultMaxTestLength;
};

enum class ExperimentStatus { Ok, Partial };

// Writes <out>/<algorithm>/<seed>/events.jsonl + suite.json per run, then
// <out>/summary.json and <out>/comparisons.json. A failed run leaves a
// PARTIAL marker and aborts the bundle.
ExperimentStatus run_experiment(const ExperimentPlan& plan);

// Renders the bundle as aligned text tables; throws on an incomplete bundle
// with the missing runs listed in the message.
std::string render_report(const std::filesystem::path& bundle_dir);

// Series of (evaluations, covered) read back from an events.jsonl file, with
// the (0,0) origin prepended and x clamped to `budget`.
RunSeries series_from_events(const std::filesystem::path& events_file, double budget);

}  // namespace tgen
