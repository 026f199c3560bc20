#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "tgen/linkage.hpp"

using namespace tgen;

namespace {

ActionCatalog catalog_of_size(int n) {
  ActionCatalog c;
  for (int i = 0; i < n; ++i)
    c.actions.push_back(ActionSpec{i, HttpMethod::Get, "/a" + std::to_string(i), {}});
  return c;
}

TestCase test_with_actions(const std::vector<int>& actions) {
  TestCase t;
  for (int a : actions) t.statements.push_back(ActionInstance{a, {}});
  return t;
}

// Brute-force mutual information from the explicit 2x2 joint table, written
// independently of the production code path.
double mi_oracle(const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& y) {
  const double n = static_cast<double>(x.size());
  double joint[2][2] = {{0, 0}, {0, 0}};
  double px[2] = {0, 0}, py[2] = {0, 0};
  for (size_t k = 0; k < x.size(); ++k) {
    joint[x[k]][y[k]] += 1.0;
    px[x[k]] += 1.0;
    py[y[k]] += 1.0;
  }
  double mi = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double pj = joint[a][b] / n;
      if (pj > 0.0) mi += pj * std::log2(pj / ((px[a] / n) * (py[b] / n)));
    }
  return mi;
}

// Naive O(N^3) agglomerative average-linkage oracle with the documented
// tie-break: lowest smallest member, then lowest other smallest member.
struct OracleNode {
  std::vector<int> members;
  double height;
  int left, right;
};

std::vector<OracleNode> upgma_oracle(const std::vector<std::vector<double>>& dist) {
  const int n = static_cast<int>(dist.size());
  std::vector<OracleNode> nodes;
  std::vector<int> live;
  for (int i = 0; i < n; ++i) {
    nodes.push_back({{i}, 0.0, -1, -1});
    live.push_back(i);
  }
  while (live.size() > 1) {
    int pick_a = -1, pick_b = -1;
    double best = 0.0;
    std::pair<int, int> best_key{0, 0};
    for (size_t i = 0; i < live.size(); ++i)
      for (size_t j = i + 1; j < live.size(); ++j) {
        const auto& ma = nodes[static_cast<size_t>(live[i])].members;
        const auto& mb = nodes[static_cast<size_t>(live[j])].members;
        // Canonical summation order: the cluster whose smallest member is
        // lower iterates in the outer loop.
        const auto& outer = ma.front() < mb.front() ? ma : mb;
        const auto& inner = ma.front() < mb.front() ? mb : ma;
        double sum = 0.0;
        for (int p : outer)
          for (int q : inner) sum += dist[static_cast<size_t>(p)][static_cast<size_t>(q)];
        double d = sum / (static_cast<double>(ma.size()) * static_cast<double>(mb.size()));
        std::pair<int, int> key{std::min(ma.front(), mb.front()),
                                std::max(ma.front(), mb.front())};
        if (pick_a < 0 || d < best || (d == best && key < best_key)) {
          pick_a = static_cast<int>(i);
          pick_b = static_cast<int>(j);
          best = d;
          best_key = key;
        }
      }
    OracleNode merged;
    merged.height = best;
    merged.left = live[static_cast<size_t>(pick_a)];
    merged.right = live[static_cast<size_t>(pick_b)];
    merged.members = nodes[static_cast<size_t>(merged.left)].members;
    for (int m : nodes[static_cast<size_t>(merged.right)].members) merged.members.push_back(m);
    std::sort(merged.members.begin(), merged.members.end());
    nodes.push_back(merged);
    live.erase(live.begin() + pick_b);
    live[static_cast<size_t>(pick_a)] = static_cast<int>(nodes.size()) - 1;
  }
  return nodes;
}

std::vector<std::vector<double>> random_distance_matrix(int n, Rng& rng, bool with_ties) {
  std::vector<std::vector<double>> d(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 0.0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 3);  // forces frequent exact ties
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double v = with_ties ? static_cast<double>(coarse(rng)) / 4.0 : unit(rng);
      d[static_cast<size_t>(i)][static_cast<size_t>(j)] = v;
      d[static_cast<size_t>(j)][static_cast<size_t>(i)] = v;
    }
  return d;
}

std::vector<EncodedTest> random_front(int n_actions, int m, Rng& rng) {
  std::bernoulli_distribution bit(0.5);
  std::vector<EncodedTest> front;
  for (int r = 0; r < m; ++r) {
    EncodedTest e;
    for (int c = 0; c < n_actions; ++c) e.bits.push_back(bit(rng) ? 1 : 0);
    front.push_back(std::move(e));
  }
  return front;
}

void check_tree_invariants(const LinkageTree& tree) {
  const int n = tree.leaf_count;
  REQUIRE(static_cast<int>(tree.nodes.size()) == 2 * n - 1);
  // Leaves are the singletons 0..N-1.
  for (int i = 0; i < n; ++i) {
    CHECK(tree.nodes[static_cast<size_t>(i)].is_leaf());
    CHECK(tree.nodes[static_cast<size_t>(i)].members == std::vector<int>{i});
  }
  std::vector<int> all(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
  CHECK(tree.nodes[static_cast<size_t>(tree.root)].members == all);
  for (size_t i = static_cast<size_t>(n); i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    REQUIRE_FALSE(node.is_leaf());
    const auto& l = tree.nodes[static_cast<size_t>(node.left)].members;
    const auto& r = tree.nodes[static_cast<size_t>(node.right)].members;
    // Children are disjoint and their union is the node's member set.
    std::vector<int> merged;
    std::set_union(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(merged));
    CHECK(merged == node.members);
    CHECK(l.size() + r.size() == node.members.size());
    // Merge heights never decrease toward the root.
    // Monotone up to summation rounding (last-ulp differences across levels).
    CHECK(node.height >= tree.nodes[static_cast<size_t>(node.left)].height - 1e-12);
    CHECK(node.height >= tree.nodes[static_cast<size_t>(node.right)].height - 1e-12);
  }
}

}  // namespace

TEST_SUITE("linkage") {

TEST_CASE("encode produces the action-membership bitmap") {
  ActionCatalog catalog = catalog_of_size(4);
  CHECK(encode(test_with_actions({0, 1, 2, 3}), catalog).bits ==
        std::vector<std::uint8_t>{1, 1, 1, 1});
  CHECK(encode(test_with_actions({2}), catalog).bits == std::vector<std::uint8_t>{0, 0, 1, 0});
  // Multiplicity collapses to membership.
  CHECK(encode(test_with_actions({1, 1, 1}), catalog).bits ==
        std::vector<std::uint8_t>{0, 1, 0, 0});
}

TEST_CASE("entropy of a binary column") {
  CHECK(entropy({0, 0, 0, 0}) == 0.0);
  CHECK(entropy({1, 1, 1, 1}) == 0.0);
  CHECK(entropy({0, 1, 0, 1}) == 1.0);
  CHECK(entropy({1, 0, 0, 0}) == doctest::Approx(0.8112781245).epsilon(1e-9));
}

TEST_CASE("mutual information matches hand-computed cases") {
  // MI(X, X) = H(X) for a fair bit.
  CHECK(mutual_information({0, 1, 0, 1}, {0, 1, 0, 1}) == doctest::Approx(1.0));
  // Exactly independent columns (all four combinations equally frequent).
  CHECK(mutual_information({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(0.0));
  // Joint counts {(0,0):2, (0,1):1, (1,0):1, (1,1):2} against the oracle.
  std::vector<std::uint8_t> x{0, 0, 0, 1, 1, 1}, y{0, 0, 1, 0, 1, 1};
  CHECK(mutual_information(x, y) == doctest::Approx(mi_oracle(x, y)).epsilon(1e-12));
}

TEST_CASE("mutual information agrees with the joint-table oracle on random data") {
  Rng rng(2024);
  std::uniform_int_distribution<int> n_dist(2, 6), m_dist(2, 32);
  for (int c = 0; c < 300; ++c) {
    int m = m_dist(rng);
    std::bernoulli_distribution bit(0.5);
    std::vector<std::uint8_t> x, y;
    for (int k = 0; k < m; ++k) {
      x.push_back(bit(rng) ? 1 : 0);
      y.push_back(bit(rng) ? 1 : 0);
    }
    double got = mutual_information(x, y);
    CHECK(got == doctest::Approx(mi_oracle(x, y)).epsilon(1e-9));
    // Exact symmetry and the entropy bound.
    CHECK(got == mutual_information(y, x));
    CHECK(got >= 0.0);
    CHECK(got <= std::min(entropy(x), entropy(y)) + 1e-9);
  }
}

TEST_CASE("upgma on N=2 is a root over two leaves") {
  LinkageTree tree = upgma({{0.0, 0.7}, {0.7, 0.0}});
  check_tree_invariants(tree);
  CHECK(tree.leaf_count == 2);
  CHECK(tree.root == 2);
  CHECK(tree.nodes[2].height == doctest::Approx(0.7));
}

TEST_CASE("perfect co-occurrence of {0,1} and {2,3} shapes the tree") {
  // Tests either use both of actions 0,1 or both of 2,3, independently.
  ActionCatalog catalog = catalog_of_size(4);
  std::vector<EncodedTest> front;
  for (int r = 0; r < 4; ++r) {
    bool a = r & 1, b = r & 2;
    front.push_back(EncodedTest{{a, a, b, b}});
  }
  // Degenerate all-equal rows would break H; this front has all four patterns.
  auto tree = train_linkage_tree(front, 4);
  REQUIRE(tree.has_value());
  check_tree_invariants(*tree);
  // First two merges are exactly {0,1} and {2,3}.
  CHECK(tree->nodes[4].members == std::vector<int>{0, 1});
  CHECK(tree->nodes[5].members == std::vector<int>{2, 3});
  CHECK(tree->nodes[static_cast<size_t>(tree->root)].members == std::vector<int>{0, 1, 2, 3});
  FamilyOfSubsets fos = extract_fos(*tree);
  REQUIRE(fos.subsets.size() == 2);
  CHECK(fos.subsets[0] == std::vector<int>{0, 1});
  CHECK(fos.subsets[1] == std::vector<int>{2, 3});
}

TEST_CASE("upgma matches the naive agglomerative oracle") {
  Rng rng(777);
  std::uniform_int_distribution<int> n_dist(2, 8);
  for (int c = 0; c < 200; ++c) {
    int n = n_dist(rng);
    auto dist = random_distance_matrix(n, rng, c % 2 == 0);
    LinkageTree tree = upgma(dist);
    check_tree_invariants(tree);
    auto oracle = upgma_oracle(dist);
    REQUIRE(tree.nodes.size() == oracle.size());
    for (size_t i = 0; i < oracle.size(); ++i) {
      CHECK(tree.nodes[i].members == oracle[i].members);
      CHECK(tree.nodes[i].height == oracle[i].height);  // bit-exact
      CHECK(tree.nodes[i].left == oracle[i].left);
      CHECK(tree.nodes[i].right == oracle[i].right);
    }
  }
}

TEST_CASE("model is unavailable for tiny fronts or catalogs") {
  CHECK_FALSE(train_linkage_tree({}, 4).has_value());
  CHECK_FALSE(train_linkage_tree({EncodedTest{{1, 0}}}, 2).has_value());
  CHECK_FALSE(train_linkage_tree({EncodedTest{{1}}, EncodedTest{{0}}}, 1).has_value());
  CHECK(train_linkage_tree({EncodedTest{{1, 0}}, EncodedTest{{0, 1}}}, 2).has_value());
}

TEST_CASE("degenerate fronts still produce a deterministic tree") {
  // All encodings identical: every MI is 0, distances fall back to uniform 1.
  std::vector<EncodedTest> front(5, EncodedTest{{1, 0, 1}});
  auto t1 = train_linkage_tree(front, 3);
  auto t2 = train_linkage_tree(front, 3);
  REQUIRE(t1.has_value());
  check_tree_invariants(*t1);
  CHECK(tree_to_json(*t1) == tree_to_json(*t2));
}

TEST_CASE("fos excludes the root and singleton leaves") {
  CHECK(extract_fos(upgma({{0, 1}, {1, 0}})).subsets.empty());  // N=2
  FamilyOfSubsets three = extract_fos(upgma({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
  CHECK(three.subsets.size() == 1);  // N=3: one non-root internal node
  Rng rng(31);
  for (int c = 0; c < 50; ++c) {
    int n = std::uniform_int_distribution<int>(2, 8)(rng);
    LinkageTree tree = upgma(random_distance_matrix(n, rng, false));
    FamilyOfSubsets fos = extract_fos(tree);
    CHECK(static_cast<int>(fos.subsets.size()) == std::max(0, n - 2));
    for (const auto& s : fos.subsets) {
      CHECK(s.size() >= 2);
      CHECK(s.size() <= static_cast<size_t>(n - 1));
    }
    // Laminarity: subsets are pairwise nested or disjoint.
    for (size_t i = 0; i < fos.subsets.size(); ++i)
      for (size_t j = i + 1; j < fos.subsets.size(); ++j) {
        std::vector<int> inter;
        std::set_intersection(fos.subsets[i].begin(), fos.subsets[i].end(),
                              fos.subsets[j].begin(), fos.subsets[j].end(),
                              std::back_inserter(inter));
        bool disjoint = inter.empty();
        bool nested = inter.size() == fos.subsets[i].size() || inter.size() == fos.subsets[j].size();
        CHECK((disjoint || nested));
      }
  }
}

TEST_CASE("train_linkage_tree output always satisfies the tree invariants") {
  Rng rng(90210);
  std::uniform_int_distribution<int> n_dist(2, 7), m_dist(2, 20);
  for (int c = 0; c < 200; ++c) {
    int n = n_dist(rng);
    auto front = random_front(n, m_dist(rng), rng);
    auto tree = train_linkage_tree(front, n);
    REQUIRE(tree.has_value());
    check_tree_invariants(*tree);
  }
}

TEST_CASE("donor_subsets picks exactly the fully-contained subsets") {
  FamilyOfSubsets fos;
  fos.subsets = {{0, 1}, {2, 3}};
  CHECK(donor_subsets(EncodedTest{{1, 1, 0, 0}}, fos) == std::vector<int>{0});
  CHECK(donor_subsets(EncodedTest{{0, 0, 0, 0}}, fos).empty());
  CHECK(donor_subsets(EncodedTest{{1, 1, 1, 1}}, fos) == std::vector<int>{0, 1});
  CHECK(donor_subsets(EncodedTest{{1, 0, 1, 1}}, fos) == std::vector<int>{1});
}

TEST_CASE("tree JSON dump carries members, heights, and children") {
  LinkageTree tree = upgma({{0.0, 0.2, 0.9}, {0.2, 0.0, 0.9}, {0.9, 0.9, 0.0}});
  json j = tree_to_json(tree);
  CHECK(j.at("members") == json({0, 1, 2}));
  REQUIRE(j.contains("children"));
  CHECK(j.at("children").size() == 2);
  CHECK(j.at("children")[0].at("members") == json({0, 1}));
  CHECK(j.at("children")[0].at("height") == doctest::Approx(0.2));
}

}  // TEST_SUITE
