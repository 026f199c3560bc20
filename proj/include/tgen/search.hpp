#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tgen/api_model.hpp"
#include "tgen/linkage.hpp"
#include "tgen/sut.hpp"

namespace tgen {

enum class Algorithm { Mio, Mosa, LtMosa };

std::string to_string(Algorithm a);
std::optional<Algorithm> algorithm_from_string(const std::string& s);

struct Individual {
  TestCase test;
  std::vector<double> objectives;
  int rank = 0;
};

class Archive {
 public:
  explicit Archive(size_t n_targets) : slots_(n_targets) {}
  // Stores the test for every target it covers, if the slot is empty or the
  // test is strictly shorter. Returns true when any new target got covered.
  bool offer(const TestCase& test, const std::vector<double>& objectives);
  size_t covered_count() const;
  std::vector<int> covered_targets() const;
  const std::optional<TestCase>& slot(size_t i) const { return slots_.at(i); }
  size_t size() const { return slots_.size(); }

 private:
  std::vector<std::optional<TestCase>> slots_;
};

struct SearchConfig {
  Algorithm algorithm = Algorithm::LtMosa;
  int population_size = 50;
  double crossover_probability = 0.75;
  int tournament_size = 10;
  int linkage_frequency = 10;
  int mio_capacity = 10;
  double mio_f = 0.5;
  double mio_pr = 0.5;
  int max_test_length = kDefaultMaxTestLength;
  std::optional<long> budget_evaluations;
  std::optional<double> budget_seconds;
  std::uint64_t seed = 0;
  bool dump_linkage_trees = false;
};

struct EventRecord {
  long generation = 0;
  long evaluations = 0;
  int covered_count = 0;
  bool model_trained = false;
  double timestamp = 0.0;  // seconds since run start
};

struct SearchResult {
  Archive archive{0};
  std::vector<EventRecord> events;
  std::set<FaultSignature> faults;
  std::vector<json> linkage_dumps;
  long evaluations = 0;
};

// ---- operators (exposed for testing) ---------------------------------------

// Front 0 holds, per uncovered target, a minimum-distance individual (ties:
// shorter test, then lower index); the rest is non-dominated sorting over the
// uncovered objectives. Returns fronts of population indices.
std::vector<std::vector<int>> preference_sorting(const std::vector<Individual>& population,
                                                 const std::vector<int>& uncovered);

// Winner has the lowest rank; ties break on shorter test, then draw order.
int tournament_selection(const std::vector<Individual>& population, int tournament_size, Rng& rng);

std::pair<TestCase, TestCase> single_point_crossover(const TestCase& a, const TestCase& b,
                                                     int max_len, Rng& rng);

TestCase linkage_recombination(const TestCase& parent, const TestCase& donor,
                               const FamilyOfSubsets& fos, const ActionCatalog& catalog,
                               int max_len, Rng& rng);

// Number of elementary mutations at a given point of the budget: 1 at the
// start of the search, 10 at the end, linear in between.
long mutation_count(double budget_fraction);

// Adaptive operator: mutation_count(budget_fraction) elementary mutations.
TestCase mutate(const TestCase& test, double budget_fraction, const ActionCatalog& catalog,
                const LiteralPools& pools, int max_len, Rng& rng);

// MOSA's fixed-rate operator: each statement mutated with probability 1/L.
TestCase mutate_fixed_rate(const TestCase& test, const ActionCatalog& catalog,
                           const LiteralPools& pools, int max_len, Rng& rng);

// One of MIO's per-target populations: bounded, single-objective, with the
// sampling counter that steers exploitation toward neglected targets.
struct MioEntry {
  TestCase test;
  double distance = 1.0;
};

// a strictly fitter than b on the population's target (tie: shorter test).
bool mio_better(const MioEntry& a, const MioEntry& b);

class MioPopulation {
 public:
  // Inserts the entry, evicting the worst member on overflow (the newcomer
  // itself when it is the worst). Resets the counter when the population's
  // best strictly improved.
  void offer(MioEntry entry, int capacity);
  const std::vector<MioEntry>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  int counter = 0;

 private:
  std::vector<MioEntry> members_;
};

SearchResult run_search(const SearchConfig& config, Sut& sut);

}  // namespace tgen
