#include "tgen/search.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <stdexcept>

namespace tgen {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Mio: return "mio";
    case Algorithm::Mosa: return "mosa";
    case Algorithm::LtMosa: return "lt-mosa";
  }
  return "lt-mosa";
}

std::optional<Algorithm> algorithm_from_string(const std::string& s) {
  if (s == "mio") return Algorithm::Mio;
  if (s == "mosa") return Algorithm::Mosa;
  if (s == "lt-mosa") return Algorithm::LtMosa;
  return std::nullopt;
}

bool Archive::offer(const TestCase& test, const std::vector<double>& objectives) {
  bool new_coverage = false;
  for (size_t i = 0; i < slots_.size(); ++i) {
    if (objectives[i] != 0.0) continue;
    if (!slots_[i]) {
      slots_[i] = test;
      new_coverage = true;
    } else if (test.length() < slots_[i]->length()) {
      slots_[i] = test;
    }
  }
  return new_coverage;
}

size_t Archive::covered_count() const {
  size_t n = 0;
  for (const auto& s : slots_)
    if (s) ++n;
  return n;
}

std::vector<int> Archive::covered_targets() const {
  std::vector<int> out;
  for (size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i]) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<std::vector<int>> preference_sorting(const std::vector<Individual>& population,
                                                 const std::vector<int>& uncovered) {
  const int n = static_cast<int>(population.size());
  std::vector<std::vector<int>> fronts;
  if (uncovered.empty()) {
    std::vector<int> all(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
    fronts.push_back(std::move(all));
    return fronts;
  }

  std::vector<bool> in_front0(static_cast<size_t>(n), false);
  for (int t : uncovered) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
      const auto& a = population[static_cast<size_t>(i)];
      const auto& b = population[static_cast<size_t>(best)];
      double da = a.objectives[static_cast<size_t>(t)];
      double db = b.objectives[static_cast<size_t>(t)];
      if (da < db || (da == db && a.test.length() < b.test.length())) best = i;
    }
    in_front0[static_cast<size_t>(best)] = true;
  }
  std::vector<int> front0;
  for (int i = 0; i < n; ++i)
    if (in_front0[static_cast<size_t>(i)]) front0.push_back(i);
  fronts.push_back(front0);

  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (!in_front0[static_cast<size_t>(i)]) rest.push_back(i);

  auto dominates = [&](int a, int b) {
    bool strict = false;
    for (int t : uncovered) {
      double da = population[static_cast<size_t>(a)].objectives[static_cast<size_t>(t)];
      double db = population[static_cast<size_t>(b)].objectives[static_cast<size_t>(t)];
      if (da > db) return false;
      if (da < db) strict = true;
    }
    return strict;
  };

  // Fast non-dominated sort over the remainder.
  std::map<int, std::vector<int>> dominated_by;
  std::map<int, int> domination_count;
  std::vector<int> current;
  for (int a : rest) {
    domination_count[a] = 0;
    for (int b : rest) {
      if (a == b) continue;
      if (dominates(a, b)) dominated_by[a].push_back(b);
      else if (dominates(b, a)) ++domination_count[a];
    }
    if (domination_count[a] == 0) current.push_back(a);
  }
  while (!current.empty()) {
    fronts.push_back(current);
    std::vector<int> next;
    for (int a : current)
      for (int b : dominated_by[a])
        if (--domination_count[b] == 0) next.push_back(b);
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

int tournament_selection(const std::vector<Individual>& population, int tournament_size, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(population.size()) - 1);
  int best = pick(rng);
  for (int k = 1; k < tournament_size; ++k) {
    int c = pick(rng);
    const auto& cand = population[static_cast<size_t>(c)];
    const auto& cur = population[static_cast<size_t>(best)];
    if (cand.rank < cur.rank ||
        (cand.rank == cur.rank && cand.test.length() < cur.test.length()))
      best = c;
  }
  return best;
}

static void truncate(TestCase& t, int max_len) {
  if (t.length() > max_len) t.statements.resize(static_cast<size_t>(max_len));
}

std::pair<TestCase, TestCase> single_point_crossover(const TestCase& a, const TestCase& b,
                                                     int max_len, Rng& rng) {
  std::uniform_int_distribution<int> cut_a(1, a.length());
  std::uniform_int_distribution<int> cut_b(1, b.length());
  int ca = cut_a(rng), cb = cut_b(rng);
  TestCase o1, o2;
  o1.statements.assign(a.statements.begin(), a.statements.begin() + ca);
  o1.statements.insert(o1.statements.end(), b.statements.begin() + cb, b.statements.end());
  o2.statements.assign(b.statements.begin(), b.statements.begin() + cb);
  o2.statements.insert(o2.statements.end(), a.statements.begin() + ca, a.statements.end());
  truncate(o1, max_len);
  truncate(o2, max_len);
  return {std::move(o1), std::move(o2)};
}

TestCase linkage_recombination(const TestCase& parent, const TestCase& donor,
                               const FamilyOfSubsets& fos, const ActionCatalog& catalog,
                               int max_len, Rng& rng) {
  EncodedTest enc = encode(donor, catalog);
  std::vector<int> candidates = donor_subsets(enc, fos);
  if (candidates.empty()) return single_point_crossover(parent, donor, max_len, rng).first;

  std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
  const std::vector<int>& subset = fos.subsets[static_cast<size_t>(candidates[pick(rng)])];

  // Donor statements whose action belongs to the subset, in donor order.
  std::vector<ActionInstance> block;
  for (const auto& st : donor.statements)
    if (std::binary_search(subset.begin(), subset.end(), st.action_index)) block.push_back(st);

  TestCase offspring = parent;
  std::uniform_int_distribution<int> point(0, offspring.length());
  int at = point(rng);
  offspring.statements.insert(offspring.statements.begin() + at, block.begin(), block.end());
  truncate(offspring, max_len);
  return offspring;
}

namespace {

enum class StructuralKind { Add, Delete, Replace };

void structural_mutation(TestCase& test, const ActionCatalog& catalog, const LiteralPools& pools,
                         int max_len, Rng& rng) {
  std::uniform_int_distribution<int> kind_dist(0, 2);
  auto kind = static_cast<StructuralKind>(kind_dist(rng));
  if (kind == StructuralKind::Delete && test.length() == 1) {
    std::uniform_int_distribution<int> reroll(0, 1);
    kind = reroll(rng) == 0 ? StructuralKind::Add : StructuralKind::Replace;
  }
  if (kind == StructuralKind::Add && test.length() >= max_len) kind = StructuralKind::Replace;

  std::uniform_int_distribution<int> action_dist(0, catalog.size() - 1);
  switch (kind) {
    case StructuralKind::Add: {
      std::uniform_int_distribution<int> pos_dist(0, test.length());
      int pos = pos_dist(rng);
      test.statements.insert(test.statements.begin() + pos,
                             random_action_instance(catalog.at(action_dist(rng)), pos, pools, rng));
      break;
    }
    case StructuralKind::Delete: {
      std::uniform_int_distribution<int> pos_dist(0, test.length() - 1);
      test.statements.erase(test.statements.begin() + pos_dist(rng));
      break;
    }
    case StructuralKind::Replace: {
      std::uniform_int_distribution<int> pos_dist(0, test.length() - 1);
      int pos = pos_dist(rng);
      test.statements[static_cast<size_t>(pos)] =
          random_action_instance(catalog.at(action_dist(rng)), pos, pools, rng);
      break;
    }
  }
}

void data_mutation(TestCase& test, int pos, const ActionCatalog& catalog, const LiteralPools& pools,
                   Rng& rng) {
  auto& inst = test.statements[static_cast<size_t>(pos)];
  if (inst.inputs.empty()) return;  // parameterless action: nothing to vary
  std::uniform_int_distribution<size_t> gene_dist(0, inst.inputs.size() - 1);
  auto& gene = inst.inputs[gene_dist(rng)];
  const ActionSpec& spec = catalog.at(inst.action_index);
  for (const auto& ps : spec.param_schemas) {
    if (ps.name == gene.param_name) {
      gene = sample_input(ps, pos, pools, rng);
      return;
    }
  }
}

}  // namespace

long mutation_count(double budget_fraction) { return std::lround(1.0 + 9.0 * budget_fraction); }

TestCase mutate(const TestCase& test, double budget_fraction, const ActionCatalog& catalog,
                const LiteralPools& pools, int max_len, Rng& rng) {
  TestCase out = test;
  long m = mutation_count(budget_fraction);
  std::bernoulli_distribution structural(0.5);
  for (long k = 0; k < m; ++k) {
    if (structural(rng)) {
      structural_mutation(out, catalog, pools, max_len, rng);
    } else {
      std::uniform_int_distribution<int> pos_dist(0, out.length() - 1);
      data_mutation(out, pos_dist(rng), catalog, pools, rng);
    }
  }
  return out;
}

TestCase mutate_fixed_rate(const TestCase& test, const ActionCatalog& catalog,
                           const LiteralPools& pools, int max_len, Rng& rng) {
  TestCase out = test;
  const int original_len = test.length();
  std::bernoulli_distribution mutate_stmt(1.0 / static_cast<double>(original_len));
  std::bernoulli_distribution structural(0.5);
  // Walk back-to-front so structural edits do not shift pending positions.
  for (int pos = original_len - 1; pos >= 0; --pos) {
    if (!mutate_stmt(rng)) continue;
    if (structural(rng)) {
      std::uniform_int_distribution<int> kind_dist(0, 2);
      auto kind = static_cast<StructuralKind>(kind_dist(rng));
      if (kind == StructuralKind::Delete && out.length() == 1) kind = StructuralKind::Replace;
      if (kind == StructuralKind::Add && out.length() >= max_len) kind = StructuralKind::Replace;
      std::uniform_int_distribution<int> action_dist(0, catalog.size() - 1);
      switch (kind) {
        case StructuralKind::Add:
          out.statements.insert(out.statements.begin() + pos,
                                random_action_instance(catalog.at(action_dist(rng)), pos, pools, rng));
          break;
        case StructuralKind::Delete:
          out.statements.erase(out.statements.begin() + pos);
          break;
        case StructuralKind::Replace:
          out.statements[static_cast<size_t>(pos)] =
              random_action_instance(catalog.at(action_dist(rng)), pos, pools, rng);
          break;
      }
    } else {
      data_mutation(out, std::min(pos, out.length() - 1), catalog, pools, rng);
    }
  }
  return out;
}

bool mio_better(const MioEntry& a, const MioEntry& b) {
  return a.distance < b.distance ||
         (a.distance == b.distance && a.test.length() < b.test.length());
}

void MioPopulation::offer(MioEntry entry, int capacity) {
  bool improved =
      members_.empty() ||
      mio_better(entry, *std::min_element(members_.begin(), members_.end(), mio_better));
  members_.push_back(std::move(entry));
  if (static_cast<int>(members_.size()) > capacity) {
    auto worst = std::max_element(members_.begin(), members_.end(), mio_better);
    bool evicted_new = worst == members_.end() - 1;
    members_.erase(worst);
    if (evicted_new) improved = false;
  }
  if (improved) counter = 0;
}

// ---- run loops --------------------------------------------------------------

namespace {

struct RunContext {
  Sut& sut;
  const SearchConfig& config;
  Archive archive;
  std::set<FaultSignature> faults;
  long evaluations = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  RunContext(Sut& s, const SearchConfig& c) : sut(s), config(c), archive(s.targets().size()) {
    if (c.budget_evaluations && *c.budget_evaluations <= 0)
      throw std::invalid_argument("search budget must be positive");
    if (c.budget_seconds && *c.budget_seconds <= 0)
      throw std::invalid_argument("search budget must be positive");
    if (!c.budget_evaluations && !c.budget_seconds)
      throw std::invalid_argument("search budget missing");
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  double consumed_fraction() const {
    if (config.budget_evaluations)
      return static_cast<double>(evaluations) / static_cast<double>(*config.budget_evaluations);
    return elapsed() / *config.budget_seconds;
  }

  bool exhausted() const { return consumed_fraction() >= 1.0; }

  Individual evaluate(TestCase test) {
    sut.reset();
    ExecutionResult res = sut.execute(test);
    ++evaluations;
    faults.insert(res.faults.begin(), res.faults.end());
    archive.offer(test, res.objectives);
    return Individual{std::move(test), std::move(res.objectives), 0};
  }

  std::vector<int> uncovered() const {
    std::vector<int> out;
    for (size_t i = 0; i < archive.size(); ++i)
      if (!archive.slot(i)) out.push_back(static_cast<int>(i));
    return out;
  }
};

void assign_ranks(std::vector<Individual>& population, const std::vector<std::vector<int>>& fronts) {
  for (size_t f = 0; f < fronts.size(); ++f)
    for (int i : fronts[f]) population[static_cast<size_t>(i)].rank = static_cast<int>(f);
}

// Fill the next population front by front; the last front is truncated by
// insertion order.
std::vector<Individual> environmental_selection(const std::vector<Individual>& pool,
                                                const std::vector<std::vector<int>>& fronts, int m) {
  std::vector<Individual> next;
  next.reserve(static_cast<size_t>(m));
  for (size_t f = 0; f < fronts.size() && static_cast<int>(next.size()) < m; ++f) {
    for (int i : fronts[f]) {
      if (static_cast<int>(next.size()) >= m) break;
      Individual ind = pool[static_cast<size_t>(i)];
      ind.rank = static_cast<int>(f);
      next.push_back(std::move(ind));
    }
  }
  return next;
}

SearchResult run_mosa_family(const SearchConfig& config, Sut& sut) {
  const bool linkage = config.algorithm == Algorithm::LtMosa;
  RunContext ctx(sut, config);
  Rng rng(config.seed);
  const ActionCatalog& catalog = sut.catalog();
  const LiteralPools& pools = sut.pools();
  const int m = config.population_size;

  SearchResult result{Archive(sut.targets().size()), {}, {}, {}, 0};

  std::vector<Individual> population;
  population.reserve(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i)
    population.push_back(ctx.evaluate(random_test(catalog, rng, config.max_test_length, pools)));

  std::vector<int> uncovered = ctx.uncovered();
  assign_ranks(population, preference_sorting(population, uncovered));
  // Initialization record (generation -1): coverage of the random population.
  result.events.push_back({-1, ctx.evaluations, static_cast<int>(ctx.archive.covered_count()),
                           false, ctx.elapsed()});

  std::optional<FamilyOfSubsets> model;
  std::bernoulli_distribution apply_crossover(config.crossover_probability);

  long generation = 0;
  while (!ctx.exhausted() && !uncovered.empty()) {
    bool trained = false;
    if (linkage && generation % config.linkage_frequency == 0) {
      std::vector<EncodedTest> front0;
      for (const auto& ind : population)
        if (ind.rank == 0) front0.push_back(encode(ind.test, catalog));
      auto tree = train_linkage_tree(front0, catalog.size());
      model = tree ? std::optional<FamilyOfSubsets>(extract_fos(*tree)) : std::nullopt;
      trained = true;
      if (config.dump_linkage_trees && tree)
        result.linkage_dumps.push_back(json{{"generation", generation}, {"tree", tree_to_json(*tree)}});
    }

    std::vector<Individual> offspring;
    offspring.reserve(static_cast<size_t>(m));
    while (static_cast<int>(offspring.size()) < m) {
      const TestCase& parent = population[static_cast<size_t>(
          tournament_selection(population, config.tournament_size, rng))].test;
      if (apply_crossover(rng)) {
        const TestCase& donor = population[static_cast<size_t>(
            tournament_selection(population, config.tournament_size, rng))].test;
        if (linkage) {
          TestCase child = model ? linkage_recombination(parent, donor, *model, catalog,
                                                         config.max_test_length, rng)
                                 : single_point_crossover(parent, donor, config.max_test_length, rng).first;
          child = mutate(child, ctx.consumed_fraction(), catalog, pools, config.max_test_length, rng);
          offspring.push_back(ctx.evaluate(std::move(child)));
        } else {
          auto [c1, c2] = single_point_crossover(parent, donor, config.max_test_length, rng);
          offspring.push_back(ctx.evaluate(
              mutate_fixed_rate(c1, catalog, pools, config.max_test_length, rng)));
          if (static_cast<int>(offspring.size()) < m)
            offspring.push_back(ctx.evaluate(
                mutate_fixed_rate(c2, catalog, pools, config.max_test_length, rng)));
        }
      } else {
        TestCase child = linkage
                             ? mutate(parent, ctx.consumed_fraction(), catalog, pools,
                                      config.max_test_length, rng)
                             : mutate_fixed_rate(parent, catalog, pools, config.max_test_length, rng);
        offspring.push_back(ctx.evaluate(std::move(child)));
      }
    }

    uncovered = ctx.uncovered();
    std::vector<Individual> pool = population;
    pool.insert(pool.end(), offspring.begin(), offspring.end());
    auto fronts = preference_sorting(pool, uncovered);
    population = environmental_selection(pool, fronts, m);

    result.events.push_back({generation, ctx.evaluations,
                             static_cast<int>(ctx.archive.covered_count()), trained, ctx.elapsed()});
    ++generation;
  }

  result.archive = std::move(ctx.archive);
  result.faults = std::move(ctx.faults);
  result.evaluations = ctx.evaluations;
  return result;
}

SearchResult run_mio(const SearchConfig& config, Sut& sut) {
  RunContext ctx(sut, config);
  Rng rng(config.seed);
  const ActionCatalog& catalog = sut.catalog();
  const LiteralPools& pools = sut.pools();

  SearchResult result{Archive(sut.targets().size()), {}, {}, {}, 0};

  std::map<int, MioPopulation> populations;  // uncovered targets only
  for (size_t t = 0; t < sut.targets().size(); ++t) populations[static_cast<int>(t)] = {};

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  long generation = 0;
  const long log_every = 50;

  while (!ctx.exhausted() && !populations.empty()) {
    // Phase in [0,1]: fraction of the pre-focus budget consumed; 1 once the
    // focused search begins.
    double phase = std::min(1.0, ctx.consumed_fraction() / config.mio_f);
    double pr = config.mio_pr * (1.0 - phase);

    bool any_nonempty = false;
    for (const auto& [t, pop] : populations)
      if (!pop.empty()) {
        any_nonempty = true;
        break;
      }

    TestCase test;
    if (!any_nonempty || unit(rng) < pr) {
      test = random_test(catalog, rng, config.max_test_length, pools);
    } else {
      int chosen = -1;
      for (const auto& [t, pop] : populations) {
        if (pop.empty()) continue;
        if (chosen < 0 || pop.counter < populations[chosen].counter) chosen = t;
      }
      auto& pop = populations[chosen];
      std::uniform_int_distribution<size_t> pick(0, pop.members().size() - 1);
      ++pop.counter;
      test = mutate(pop.members()[pick(rng)].test, phase, catalog, pools, config.max_test_length, rng);
    }

    Individual ind = ctx.evaluate(std::move(test));

    for (auto it = populations.begin(); it != populations.end();) {
      int t = it->first;
      double d = ind.objectives[static_cast<size_t>(t)];
      if (d == 0.0) {  // covered: archive holds it, the population retires
        it = populations.erase(it);
        continue;
      }
      it->second.offer(MioEntry{ind.test, d}, config.mio_capacity);
      ++it;
    }

    if (ctx.evaluations % log_every == 0) {
      result.events.push_back({generation, ctx.evaluations,
                               static_cast<int>(ctx.archive.covered_count()), false, ctx.elapsed()});
      ++generation;
    }
  }
  result.events.push_back({generation, ctx.evaluations,
                           static_cast<int>(ctx.archive.covered_count()), false, ctx.elapsed()});

  result.archive = std::move(ctx.archive);
  result.faults = std::move(ctx.faults);
  result.evaluations = ctx.evaluations;
  return result;
}

}  // namespace

SearchResult run_search(const SearchConfig& config, Sut& sut) {
  switch (config.algorithm) {
    case Algorithm::Mio: return run_mio(config, sut);
    case Algorithm::Mosa:
    case Algorithm::LtMosa: return run_mosa_family(config, sut);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace tgen
