#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "treednf/boolean.hpp"

namespace treednf {

/// Flat node storage. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  int label = 0;
  int on_false = -1;
  int on_true = -1;

  bool is_leaf() const { return feature < 0; }
};

/// Node list with the root at index 0; used to compose trees bottom-up.
struct Subtree {
  std::vector<TreeNode> nodes;
};

Subtree leaf(int label);
Subtree split(int feature, Subtree on_false, Subtree on_true);

/// Binary decision tree over binarized features with 0/1 leaves.
///
/// Construction validates the structure: every internal node has two
/// children, nodes form a tree rooted at index 0, split features are below
/// the declared dimension and no feature is split twice on one path.
class DecisionTree {
 public:
  DecisionTree(int dimension, Subtree structure,
               std::vector<std::string> feature_names = {});

  int dimension() const { return dimension_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  const TreeNode& node(int index) const { return nodes_[index]; }
  std::size_t leaf_count() const;
  /// Sorted distinct split features.
  const std::vector<int>& used_features() const { return used_features_; }
  bool is_constant() const { return root().is_leaf(); }

 private:
  int dimension_;
  std::vector<TreeNode> nodes_;
  std::vector<std::string> feature_names_;
  std::vector<int> used_features_;
};

/// Complete binary dataset. `groups`, when present, maps each binary column
/// to the index of the original feature it was derived from.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<std::uint8_t> labels;
  std::optional<std::vector<int>> groups;
  std::vector<std::string> group_names;

  std::size_t size() const { return rows.size(); }
  std::size_t dimension() const { return feature_names.size(); }
  /// Throws SchemaError when the parallel structures disagree.
  void validate() const;
};

/// Dataset whose cells may be NA.
struct MaskedDataset {
  std::vector<std::string> feature_names;
  std::vector<MaskedSample> rows;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return rows.size(); }
  std::size_t dimension() const { return feature_names.size(); }
};

// Serialization. A tree document is
//   {"dimension": d, "feature_names": [...], "root": node}
// where node is {"leaf": 0|1} or {"feature": j, "false": node, "true": node}.
DecisionTree parse_tree(const nlohmann::json& document);
DecisionTree parse_tree(const std::string& text);
nlohmann::json tree_to_json(const DecisionTree& tree);

/// CSV with a header row, 0/1 cells and a "label" column.
MaskedDataset parse_masked_csv(const std::string& text);
/// As above but every cell must be known.
Dataset parse_dataset_csv(const std::string& text);
std::string dataset_to_csv(const Dataset& data);
std::string masked_to_csv(const MaskedDataset& data);

/// Group map document: {"<binary index>": "<original feature name>", ...}.
/// Fills data.groups / data.group_names (original features numbered by first
/// appearance in column order). Throws SchemaError unless total over columns.
void attach_group_map(Dataset& data, const nlohmann::json& document);
nlohmann::json group_map_to_json(const Dataset& data);

int predict_traverse(const DecisionTree& tree, std::span<const std::uint8_t> x);

struct LeafTerms {
  std::vector<Term> positive;
  std::vector<Term> negative;
};

/// One path term per leaf, split by leaf label, in depth-first order with
/// the false branch first.
LeafTerms leaves_as_terms(const DecisionTree& tree);

/// Unnormalized impurity-decrease importance per feature, using Gini
/// impurity 2p(1-p) and node weights relative to the whole dataset.
std::vector<double> gini_importance(const DecisionTree& tree, const Dataset& data);

}  // namespace treednf
