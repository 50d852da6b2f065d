#include "treednf/rashomon.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "treednf/canonical.hpp"
#include "treednf/errors.hpp"
#include "treednf/random.hpp"

namespace treednf {

namespace {

WeightedValues merge_points(std::vector<std::pair<double, double>> points) {
  std::sort(points.begin(), points.end());
  WeightedValues out;
  for (const auto& [value, weight] : points) {
    if (!out.empty() && out.back().first == value) {
      out.back().second += weight;
    } else {
      out.emplace_back(value, weight);
    }
  }
  return out;
}

double total_weight(const WeightedValues& d) {
  double sum = 0.0;
  for (const auto& point : d) {
    if (!std::isfinite(point.first) || !std::isfinite(point.second) || point.second < 0.0) {
      throw SchemaError("distribution values and weights must be finite, weights non-negative");
    }
    sum += point.second;
  }
  return sum;
}

double agreement(const DecisionTree& tree, const std::vector<std::vector<std::uint8_t>>& rows,
                 const std::vector<std::uint8_t>& labels) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    same += predict_traverse(tree, rows[i]) == labels[i];
  }
  return static_cast<double>(same) / static_cast<double>(rows.size());
}

}  // namespace

void TreeSet::validate() const {
  if (trees.size() != objectives.size()) {
    throw SchemaError("tree set has " + std::to_string(trees.size()) + " trees but " +
                      std::to_string(objectives.size()) + " objectives");
  }
  for (double o : objectives) {
    if (!std::isfinite(o)) throw SchemaError("objectives must be finite");
  }
}

TreeSet parse_tree_set(const nlohmann::json& document) {
  TreeSet ts;
  const nlohmann::json* list = &document;
  if (document.is_object()) {
    if (!document.contains("trees")) throw SchemaError("tree set object needs a \"trees\" array");
    list = &document.at("trees");
    if (document.contains("source") && document.at("source").is_string()) {
      ts.source = document.at("source").get<std::string>();
    }
  }
  if (!list->is_array()) throw SchemaError("tree set must be an array of tree documents");
  for (const nlohmann::json& doc : *list) {
    ts.trees.push_back(parse_tree(doc));
    double objective = 0.0;
    if (doc.is_object() && doc.contains("objective")) {
      if (!doc.at("objective").is_number()) throw SchemaError("objective must be a number");
      objective = doc.at("objective").get<double>();
    }
    ts.objectives.push_back(objective);
  }
  ts.validate();
  return ts;
}

bool has_trivial_split(const DecisionTree& tree) {
  for (const TreeNode& n : tree.nodes()) {
    if (n.is_leaf()) continue;
    const TreeNode& lo = tree.node(n.on_false);
    const TreeNode& hi = tree.node(n.on_true);
    if (lo.is_leaf() && hi.is_leaf() && lo.label == hi.label) return true;
  }
  return false;
}

TreeSet remove_trivial(const TreeSet& ts) {
  ts.validate();
  TreeSet out;
  out.source = ts.source;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (has_trivial_split(ts.trees[i])) continue;
    out.trees.push_back(ts.trees[i]);
    out.objectives.push_back(ts.objectives[i]);
  }
  return out;
}

DedupResult dedup(const TreeSet& ts, std::size_t max_vars) {
  ts.validate();
  DedupResult result;
  result.total = ts.size();
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::string key;
    try {
      key = canonical_key(to_dnf(ts.trees[i], max_vars));
    } catch (const VariableCapExceeded&) {
      result.over_cap.push_back(i);
      continue;
    }
    auto [it, fresh] = index_of.emplace(key, result.classes.size());
    if (fresh) result.classes.push_back({key, {}, i});
    EquivalenceClass& cls = result.classes[it->second];
    cls.members.push_back(i);
    if (ts.objectives[i] < ts.objectives[cls.representative]) cls.representative = i;
  }
  return result;
}

nlohmann::json dedup_to_json(const DedupResult& result, std::size_t nontrivial) {
  nlohmann::json classes = nlohmann::json::array();
  for (const EquivalenceClass& c : result.classes) {
    classes.push_back({{"key", c.key}, {"members", c.members}, {"representative", c.representative}});
  }
  return {{"total", result.total},
          {"nontrivial", nontrivial},
          {"unique", result.classes.size()},
          {"classes", classes},
          {"over_cap", result.over_cap}};
}

ImportanceDistribution importance_distribution(const TreeSet& ts, const Dataset& data,
                                               bool deduplicate, std::size_t max_vars) {
  ts.validate();
  if (ts.size() == 0) throw EmptyDistribution("tree set is empty");
  std::vector<std::size_t> chosen;
  if (deduplicate) {
    const DedupResult d = dedup(ts, max_vars);
    if (!d.over_cap.empty()) {
      const DecisionTree& t = ts.trees[d.over_cap.front()];
      throw VariableCapExceeded(t.used_features().size(), max_vars);
    }
    for (const EquivalenceClass& c : d.classes) chosen.push_back(c.representative);
  } else {
    for (std::size_t i = 0; i < ts.size(); ++i) chosen.push_back(i);
  }

  const double weight = 1.0 / static_cast<double>(chosen.size());
  std::vector<std::vector<std::pair<double, double>>> points(data.dimension());
  for (std::size_t i : chosen) {
    const std::vector<double> imp = gini_importance(ts.trees[i], data);
    for (std::size_t j = 0; j < imp.size(); ++j) points[j].emplace_back(imp[j], weight);
  }
  ImportanceDistribution out;
  out.feature_names = data.feature_names;
  for (auto& p : points) out.features.push_back(merge_points(std::move(p)));
  return out;
}

double wasserstein_1(const WeightedValues& a, const WeightedValues& b) {
  if (a.empty() || b.empty()) throw EmptyDistribution("cannot compare an empty distribution");
  const double wa = total_weight(a), wb = total_weight(b);
  if (wa <= 0.0 || wb <= 0.0) throw EmptyDistribution("distribution has zero total weight");
  const WeightedValues sa = merge_points(a), sb = merge_points(b);

  // Sweep the merged breakpoints, integrating |F_a - F_b| between them.
  std::vector<double> xs;
  for (const auto& p : sa) xs.push_back(p.first);
  for (const auto& p : sb) xs.push_back(p.first);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double fa = 0.0, fb = 0.0, distance = 0.0;
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    while (ia < sa.size() && sa[ia].first <= xs[k]) fa += sa[ia++].second / wa;
    while (ib < sb.size() && sb[ib].first <= xs[k]) fb += sb[ib++].second / wb;
    distance += std::abs(fa - fb) * (xs[k + 1] - xs[k]);
  }
  return distance;
}

std::vector<double> permutation_importance(const DecisionTree& tree, const Dataset& data,
                                           std::uint64_t seed, std::size_t repeats) {
  data.validate();
  if (data.size() == 0) throw EmptyDataset("permutation importance needs at least one sample");
  if (static_cast<std::size_t>(tree.dimension()) != data.dimension()) {
    throw DimensionMismatch("tree and dataset dimensions differ");
  }
  if (repeats == 0) throw SchemaError("repeats must be positive");
  const double base = agreement(tree, data.rows, data.labels);
  std::vector<double> drop(data.dimension(), 0.0);
  std::mt19937_64 engine(seed);
  for (std::size_t r = 0; r < repeats; ++r) {
    for (std::size_t j = 0; j < data.dimension(); ++j) {
      std::vector<std::uint8_t> column;
      for (const auto& row : data.rows) column.push_back(row[j]);
      for (std::size_t i = column.size(); i > 1; --i) {
        std::swap(column[i - 1], column[uniform_index(engine, i)]);
      }
      std::vector<std::vector<std::uint8_t>> shuffled = data.rows;
      for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i][j] = column[i];
      drop[j] += base - agreement(tree, shuffled, data.labels);
    }
  }
  for (double& d : drop) d /= static_cast<double>(repeats);
  return drop;
}

}  // namespace treednf
