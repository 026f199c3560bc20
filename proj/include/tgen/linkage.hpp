#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tgen/api_model.hpp"

namespace tgen {

struct EncodedTest {
  std::vector<std::uint8_t> bits;  // bits[i] = 1 iff action i occurs in the test
};

EncodedTest encode(const TestCase& test, const ActionCatalog& catalog);

// Shannon entropy in bits of a binary column; 0 log 0 := 0.
double entropy(const std::vector<std::uint8_t>& column);

// MI(X,Y) = H(X) + H(Y) - H(X,Y), clamped at 0 against float residue.
// Exactly symmetric in its arguments.
double mutual_information(const std::vector<std::uint8_t>& col_i,
                          const std::vector<std::uint8_t>& col_j);

struct LinkageNode {
  std::vector<int> members;  // sorted action indices
  double height = 0.0;       // average-linkage distance at the merge; 0 for leaves
  int left = -1;
  int right = -1;
  bool is_leaf() const { return left < 0; }
};

struct LinkageTree {
  std::vector<LinkageNode> nodes;  // leaves first (0..N-1), then merges in order
  int root = -1;
  int leaf_count = 0;
};

struct FamilyOfSubsets {
  std::vector<std::vector<int>> subsets;  // internal nodes except the root
};

// MI-derived distance matrix over actions: D = 1 - MI/MI_max, or all 1 when
// every pairwise MI is zero.
std::vector<std::vector<double>> mi_distance_matrix(const std::vector<EncodedTest>& front,
                                                    int n_actions);

// UPGMA over an explicit distance matrix. Ties between minimum-distance
// cluster pairs break on (lowest smallest member, then lowest other smallest
// member); cluster-pair distance is the arithmetic mean of pairwise member
// distances summed in canonical index order.
LinkageTree upgma(const std::vector<std::vector<double>>& dist);

// Model-unavailable (nullopt) when the front has fewer than 2 members or the
// catalog has fewer than 2 actions.
std::optional<LinkageTree> train_linkage_tree(const std::vector<EncodedTest>& front, int n_actions);

FamilyOfSubsets extract_fos(const LinkageTree& tree);

// Indices into fos.subsets whose every member bit is set in the donor.
std::vector<int> donor_subsets(const EncodedTest& donor, const FamilyOfSubsets& fos);

json tree_to_json(const LinkageTree& tree);

}  // namespace tgen
