#include "treednf/tree.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "csv.hpp"
#include "treednf/errors.hpp"

namespace treednf {

namespace {

using nlohmann::json;

void append_shifted(std::vector<TreeNode>& out, const std::vector<TreeNode>& in) {
  const int offset = static_cast<int>(out.size());
  for (TreeNode n : in) {
    if (!n.is_leaf()) {
      n.on_false += offset;
      n.on_true += offset;
    }
    out.push_back(n);
  }
}

std::vector<std::string> default_names(int dimension) {
  std::vector<std::string> names;
  for (int i = 0; i < dimension; ++i) names.push_back("f" + std::to_string(i));
  return names;
}

Subtree parse_node(const json& node, int depth) {
  if (depth > 64) throw SchemaError("tree document nested deeper than 64 levels");
  if (!node.is_object()) throw SchemaError("tree node must be an object");
  if (node.contains("leaf")) {
    const json& label = node.at("leaf");
    if (!label.is_number_integer() || (label.get<int>() != 0 && label.get<int>() != 1)) {
      throw SchemaError("leaf label must be 0 or 1");
    }
    return leaf(label.get<int>());
  }
  if (!node.contains("feature") || !node.contains("false") || !node.contains("true")) {
    throw SchemaError("internal node needs \"feature\", \"false\" and \"true\"");
  }
  if (!node.at("feature").is_number_integer() || node.at("feature").get<int>() < 0) {
    throw SchemaError("split feature must be a non-negative integer");
  }
  return split(node.at("feature").get<int>(), parse_node(node.at("false"), depth + 1),
               parse_node(node.at("true"), depth + 1));
}

json node_to_json(const DecisionTree& tree, int index) {
  const TreeNode& n = tree.node(index);
  if (n.is_leaf()) return json{{"leaf", n.label}};
  return json{{"feature", n.feature},
              {"false", node_to_json(tree, n.on_false)},
              {"true", node_to_json(tree, n.on_true)}};
}

double gini(double positives, double total) {
  if (total <= 0) return 0.0;
  const double p = positives / total;
  return 2.0 * p * (1.0 - p);
}

}  // namespace

Subtree leaf(int label) {
  return Subtree{{TreeNode{-1, label, -1, -1}}};
}

Subtree split(int feature, Subtree on_false, Subtree on_true) {
  Subtree out;
  out.nodes.reserve(1 + on_false.nodes.size() + on_true.nodes.size());
  out.nodes.push_back(TreeNode{feature, 0, 1, 1 + static_cast<int>(on_false.nodes.size())});
  append_shifted(out.nodes, on_false.nodes);
  append_shifted(out.nodes, on_true.nodes);
  return out;
}

DecisionTree::DecisionTree(int dimension, Subtree structure,
                           std::vector<std::string> feature_names)
    : dimension_(dimension),
      nodes_(std::move(structure.nodes)),
      feature_names_(std::move(feature_names)) {
  if (dimension_ < 0) throw SchemaError("negative tree dimension");
  if (nodes_.empty()) throw SchemaError("tree has no nodes");
  if (feature_names_.empty()) feature_names_ = default_names(dimension_);
  if (static_cast<int>(feature_names_.size()) != dimension_) {
    throw SchemaError("feature_names length " + std::to_string(feature_names_.size()) +
                      " does not match dimension " + std::to_string(dimension_));
  }

  // Iterative walk carrying the set of features split on along the path.
  std::vector<int> visits(nodes_.size(), 0);
  std::vector<std::uint8_t> used(static_cast<std::size_t>(dimension_), 0);
  struct Frame {
    int node;
    std::vector<int> path;
  };
  std::vector<Frame> stack{{0, {}}};
  const int count = static_cast<int>(nodes_.size());
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.node < 0 || f.node >= count) throw SchemaError("child index out of range");
    if (++visits[f.node] > 1) throw SchemaError("node reachable twice; not a tree");
    const TreeNode& n = nodes_[f.node];
    if (n.is_leaf()) {
      if (n.label != 0 && n.label != 1) throw SchemaError("leaf label must be 0 or 1");
      continue;
    }
    if (n.feature >= dimension_) {
      throw UnknownFeatureIndex("split on f" + std::to_string(n.feature) +
                                " but dimension is " + std::to_string(dimension_));
    }
    if (std::find(f.path.begin(), f.path.end(), n.feature) != f.path.end()) {
      throw RepeatedSplitOnPath("f" + std::to_string(n.feature) +
                                " is split twice on one root-to-leaf path");
    }
    used[n.feature] = 1;
    f.path.push_back(n.feature);
    stack.push_back({n.on_true, f.path});
    stack.push_back({n.on_false, std::move(f.path)});
  }
  if (std::count(visits.begin(), visits.end(), 0) != 0) {
    throw SchemaError("tree has unreachable nodes");
  }
  for (int j = 0; j < dimension_; ++j) {
    if (used[j]) used_features_.push_back(j);
  }
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

void Dataset::validate() const {
  if (labels.size() != rows.size()) throw SchemaError("label count differs from row count");
  for (const auto& row : rows) {
    if (row.size() != feature_names.size()) {
      throw DimensionMismatch("row of width " + std::to_string(row.size()) +
                              " in dataset of dimension " +
                              std::to_string(feature_names.size()));
    }
  }
  if (groups) {
    if (groups->size() != feature_names.size()) {
      throw SchemaError("group map is not total over the binary features");
    }
    for (int g : *groups) {
      if (g < 0 || static_cast<std::size_t>(g) >= group_names.size()) {
        throw SchemaError("group index out of range");
      }
    }
  }
}

// ---------------------------------------------------------------- I/O

DecisionTree parse_tree(const json& document) {
  if (!document.is_object()) throw SchemaError("tree document must be an object");
  if (!document.contains("root")) throw SchemaError("tree document lacks \"root\"");
  Subtree structure = parse_node(document.at("root"), 0);
  int dimension = 0;
  if (document.contains("dimension")) {
    if (!document.at("dimension").is_number_integer()) {
      throw SchemaError("\"dimension\" must be an integer");
    }
    dimension = document.at("dimension").get<int>();
  } else {
    for (const TreeNode& n : structure.nodes) dimension = std::max(dimension, n.feature + 1);
  }
  std::vector<std::string> names;
  if (document.contains("feature_names")) {
    try {
      names = document.at("feature_names").get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw SchemaError("\"feature_names\" must be a list of strings");
    }
  }
  return DecisionTree(dimension, std::move(structure), std::move(names));
}

DecisionTree parse_tree(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("tree document is not valid JSON: ") + e.what());
  }
  return parse_tree(doc);
}

json tree_to_json(const DecisionTree& tree) {
  return json{{"dimension", tree.dimension()},
              {"feature_names", tree.feature_names()},
              {"root", node_to_json(tree, 0)}};
}

MaskedDataset parse_masked_csv(const std::string& text) {
  const std::vector<std::string> lines = detail::csv_lines(text);
  if (lines.empty()) throw SchemaError("CSV has no header row");
  const std::vector<std::string> header = detail::split_csv_line(lines.front());
  auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw SchemaError("CSV has no \"label\" column");
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

  MaskedDataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) data.feature_names.push_back(header[c]);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = detail::split_csv_line(lines[i]);
    if (cells.size() != header.size()) {
      throw SchemaError("CSV line " + std::to_string(i + 1) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    }
    std::vector<Tri> values;
    values.reserve(header.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      if (c == label_col) {
        if (cell != "0" && cell != "1") {
          throw SchemaError("label on line " + std::to_string(i + 1) + " is not 0/1");
        }
        data.labels.push_back(cell == "1" ? 1 : 0);
      } else if (cell == "0") {
        values.push_back(Tri::zero);
      } else if (cell == "1") {
        values.push_back(Tri::one);
      } else if (cell == "NA") {
        values.push_back(Tri::na);
      } else {
        throw SchemaError("cell \"" + cell + "\" on line " + std::to_string(i + 1) +
                          " is not 0, 1 or NA");
      }
    }
    data.rows.emplace_back(std::move(values));
  }
  return data;
}

Dataset parse_dataset_csv(const std::string& text) {
  MaskedDataset masked = parse_masked_csv(text);
  Dataset data;
  data.feature_names = std::move(masked.feature_names);
  data.labels = std::move(masked.labels);
  for (std::size_t i = 0; i < masked.rows.size(); ++i) {
    std::vector<std::uint8_t> row;
    for (Tri v : masked.rows[i].values()) {
      if (v == Tri::na) {
        throw SchemaError("row " + std::to_string(i) + " has NA cells; complete data expected");
      }
      row.push_back(v == Tri::one ? 1 : 0);
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

std::string dataset_to_csv(const Dataset& data) {
  std::ostringstream out;
  for (const auto& name : data.feature_names) out << name << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    for (std::uint8_t v : data.rows[i]) out << int{v} << ',';
    out << int{data.labels[i]} << '\n';
  }
  return out.str();
}

std::string masked_to_csv(const MaskedDataset& data) {
  std::ostringstream out;
  for (const auto& name : data.feature_names) out << name << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    for (Tri v : data.rows[i].values()) {
      out << (v == Tri::na ? "NA" : v == Tri::one ? "1" : "0") << ',';
    }
    out << int{data.labels[i]} << '\n';
  }
  return out.str();
}

void attach_group_map(Dataset& data, const json& document) {
  if (!document.is_object()) throw SchemaError("group map must be a JSON object");
  std::vector<std::optional<std::string>> by_column(data.dimension());
  for (const auto& [key, value] : document.items()) {
    std::size_t column = 0;
    try {
      std::size_t used = 0;
      column = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw SchemaError("group map key \"" + key + "\" is not a column index");
    }
    if (column >= data.dimension()) {
      throw UnknownFeatureIndex("group map names column " + key + " beyond dimension");
    }
    if (!value.is_string()) throw SchemaError("group map values must be strings");
    by_column[column] = value.get<std::string>();
  }
  std::vector<int> groups;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < by_column.size(); ++c) {
    if (!by_column[c]) {
      throw SchemaError("group map lacks binary column " + std::to_string(c));
    }
    auto it = std::find(names.begin(), names.end(), *by_column[c]);
    if (it == names.end()) {
      names.push_back(*by_column[c]);
      groups.push_back(static_cast<int>(names.size() - 1));
    } else {
      groups.push_back(static_cast<int>(it - names.begin()));
    }
  }
  data.groups = std::move(groups);
  data.group_names = std::move(names);
}

json group_map_to_json(const Dataset& data) {
  json doc = json::object();
  if (!data.groups) return doc;
  for (std::size_t c = 0; c < data.groups->size(); ++c) {
    doc[std::to_string(c)] = data.group_names[(*data.groups)[c]];
  }
  return doc;
}

// ---------------------------------------------------------------- semantics

int predict_traverse(const DecisionTree& tree, std::span<const std::uint8_t> x) {
  if (x.size() != static_cast<std::size_t>(tree.dimension())) {
    throw DimensionMismatch("sample of dimension " + std::to_string(x.size()) +
                            " for tree of dimension " + std::to_string(tree.dimension()));
  }
  const TreeNode* n = &tree.root();
  while (!n->is_leaf()) n = &tree.node(x[n->feature] ? n->on_true : n->on_false);
  return n->label;
}

LeafTerms leaves_as_terms(const DecisionTree& tree) {
  LeafTerms out;
  struct Frame {
    int node;
    std::vector<Literal> path;
  };
  std::vector<Frame> stack{{0, {}}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const TreeNode& n = tree.node(f.node);
    if (n.is_leaf()) {
      (n.label ? out.positive : out.negative).emplace_back(std::move(f.path));
      continue;
    }
    std::vector<Literal> t = f.path;
    t.push_back(pos(n.feature));
    f.path.push_back(neg(n.feature));
    stack.push_back({n.on_true, std::move(t)});
    stack.push_back({n.on_false, std::move(f.path)});
  }
  return out;
}

std::vector<double> gini_importance(const DecisionTree& tree, const Dataset& data) {
  if (data.size() == 0) throw EmptyDataset("cannot compute importance on an empty dataset");
  if (data.dimension() != static_cast<std::size_t>(tree.dimension())) {
    throw DimensionMismatch("dataset dimension " + std::to_string(data.dimension()) +
                            " differs from tree dimension " +
                            std::to_string(tree.dimension()));
  }
  std::vector<double> importance(data.dimension(), 0.0);
  const double n = static_cast<double>(data.size());

  struct Frame {
    int node;
    std::vector<std::size_t> members;
  };
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<Frame> stack{{0, std::move(all)}};
  auto positives = [&](const std::vector<std::size_t>& idx) {
    double p = 0;
    for (std::size_t i : idx) p += data.labels[i];
    return p;
  };
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const TreeNode& node = tree.node(f.node);
    if (node.is_leaf()) continue;
    std::vector<std::size_t> lo, hi;
    for (std::size_t i : f.members) (data.rows[i][node.feature] ? hi : lo).push_back(i);
    // Nodes reached by no sample contribute nothing.
    if (!f.members.empty()) {
      const double total = static_cast<double>(f.members.size());
      const double parent = gini(positives(f.members), total);
      const double children =
          (lo.size() / total) * gini(positives(lo), static_cast<double>(lo.size())) +
          (hi.size() / total) * gini(positives(hi), static_cast<double>(hi.size()));
      importance[node.feature] += (total / n) * std::max(0.0, parent - children);
    }
    stack.push_back({node.on_true, std::move(hi)});
    stack.push_back({node.on_false, std::move(lo)});
  }
  return importance;
}

}  // namespace treednf
