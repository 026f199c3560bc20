#include "tgen/linkage.hpp"

#include <algorithm>
#include <cmath>

namespace tgen {

EncodedTest encode(const TestCase& test, const ActionCatalog& catalog) {
  EncodedTest enc;
  enc.bits.assign(static_cast<size_t>(catalog.size()), 0);
  for (const auto& st : test.statements) enc.bits.at(static_cast<size_t>(st.action_index)) = 1;
  return enc;
}

namespace {

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace

double entropy(const std::vector<std::uint8_t>& column) {
  const double n = static_cast<double>(column.size());
  size_t ones = 0;
  for (auto b : column) ones += b;
  const double p1 = static_cast<double>(ones) / n;
  return plogp(1.0 - p1) + plogp(p1);
}

double mutual_information(const std::vector<std::uint8_t>& col_i,
                          const std::vector<std::uint8_t>& col_j) {
  const size_t n = col_i.size();
  double counts[2][2] = {{0, 0}, {0, 0}};
  for (size_t k = 0; k < n; ++k) counts[col_i[k]][col_j[k]] += 1.0;
  // Joint entropy over the probability multiset in sorted order, so that the
  // float operations are identical regardless of argument order.
  double probs[4] = {counts[0][0] / n, counts[0][1] / n, counts[1][0] / n, counts[1][1] / n};
  std::sort(probs, probs + 4);
  double h_joint = 0.0;
  for (double p : probs) h_joint += plogp(p);
  double mi = entropy(col_i) + entropy(col_j) - h_joint;
  return std::max(mi, 0.0);
}

std::vector<std::vector<double>> mi_distance_matrix(const std::vector<EncodedTest>& front,
                                                    int n_actions) {
  const size_t n = static_cast<size_t>(n_actions);
  // Column-major view of the front.
  std::vector<std::vector<std::uint8_t>> cols(n, std::vector<std::uint8_t>(front.size()));
  for (size_t r = 0; r < front.size(); ++r)
    for (size_t c = 0; c < n; ++c) cols[c][r] = front[r].bits.at(c);

  std::vector<std::vector<double>> mi(n, std::vector<double>(n, 0.0));
  double mi_max = 0.0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double v = mutual_information(cols[i], cols[j]);
      mi[i][j] = mi[j][i] = v;
      mi_max = std::max(mi_max, v);
    }

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      dist[i][j] = mi_max > 0.0 ? 1.0 - mi[i][j] / mi_max : 1.0;
    }
  return dist;
}

namespace {

// Mean pairwise distance between two clusters, summed in canonical order:
// outer loop over the cluster with the lower smallest member.
double average_linkage(const std::vector<int>& a, const std::vector<int>& b,
                       const std::vector<std::vector<double>>& dist) {
  const std::vector<int>& x = a.front() < b.front() ? a : b;
  const std::vector<int>& y = a.front() < b.front() ? b : a;
  double sum = 0.0;
  for (int i : x)
    for (int j : y) sum += dist[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return sum / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

}  // namespace

LinkageTree upgma(const std::vector<std::vector<double>>& dist) {
  const int n = static_cast<int>(dist.size());
  LinkageTree tree;
  tree.leaf_count = n;
  std::vector<int> active;  // node indices of live clusters
  for (int i = 0; i < n; ++i) {
    tree.nodes.push_back({{i}, 0.0, -1, -1});
    active.push_back(i);
  }
  while (active.size() > 1) {
    double best_d = 0.0;
    std::pair<int, int> best_key{-1, -1};
    size_t best_a = 0, best_b = 0;
    bool found = false;
    for (size_t ia = 0; ia < active.size(); ++ia) {
      for (size_t ib = ia + 1; ib < active.size(); ++ib) {
        const auto& ma = tree.nodes[static_cast<size_t>(active[ia])].members;
        const auto& mb = tree.nodes[static_cast<size_t>(active[ib])].members;
        double d = average_linkage(ma, mb, dist);
        std::pair<int, int> key{std::min(ma.front(), mb.front()), std::max(ma.front(), mb.front())};
        if (!found || d < best_d || (d == best_d && key < best_key)) {
          found = true;
          best_d = d;
          best_key = key;
          best_a = ia;
          best_b = ib;
        }
      }
    }
    int na = active[best_a], nb = active[best_b];
    LinkageNode merged;
    merged.height = best_d;
    merged.left = na;
    merged.right = nb;
    std::merge(tree.nodes[static_cast<size_t>(na)].members.begin(),
               tree.nodes[static_cast<size_t>(na)].members.end(),
               tree.nodes[static_cast<size_t>(nb)].members.begin(),
               tree.nodes[static_cast<size_t>(nb)].members.end(),
               std::back_inserter(merged.members));
    tree.nodes.push_back(std::move(merged));
    active.erase(active.begin() + static_cast<long>(best_b));
    active[best_a] = static_cast<int>(tree.nodes.size()) - 1;
  }
  tree.root = active.empty() ? -1 : active.front();
  return tree;
}

std::optional<LinkageTree> train_linkage_tree(const std::vector<EncodedTest>& front, int n_actions) {
  if (front.size() < 2 || n_actions < 2) return std::nullopt;
  return upgma(mi_distance_matrix(front, n_actions));
}

FamilyOfSubsets extract_fos(const LinkageTree& tree) {
  FamilyOfSubsets fos;
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    if (node.is_leaf() || static_cast<int>(i) == tree.root) continue;
    fos.subsets.push_back(node.members);
  }
  return fos;
}

std::vector<int> donor_subsets(const EncodedTest& donor, const FamilyOfSubsets& fos) {
  std::vector<int> out;
  for (size_t s = 0; s < fos.subsets.size(); ++s) {
    bool all = true;
    for (int i : fos.subsets[s])
      if (!donor.bits.at(static_cast<size_t>(i))) {
        all = false;
        break;
      }
    if (all) out.push_back(static_cast<int>(s));
  }
  return out;
}

static json node_to_json(const LinkageTree& tree, int idx) {
  const auto& node = tree.nodes.at(static_cast<size_t>(idx));
  json j{{"members", node.members}, {"height", node.height}};
  if (!node.is_leaf())
    j["children"] = json::array({node_to_json(tree, node.left), node_to_json(tree, node.right)});
  return j;
}

json tree_to_json(const LinkageTree& tree) { return node_to_json(tree, tree.root); }

}  // namespace tgen
