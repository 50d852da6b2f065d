#pragma once

// Tree-set utilities: trivial-extension filtering, deduplication by
// predictive equivalence and importance distributions across a set.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "treednf/boolean.hpp"
#include "treednf/tree.hpp"

namespace treednf {

struct TreeSet {
  std::vector<DecisionTree> trees;
  std::vector<double> objectives;
  std::string source;

  std::size_t size() const { return trees.size(); }
  /// Throws SchemaError unless the lists are parallel and objectives finite.
  void validate() const;
};

/// Accepts a JSON array of tree documents, each optionally carrying an
/// "objective" member (default 0), or an object {"source", "trees"} holding
/// such an array.
TreeSet parse_tree_set(const nlohmann::json& document);

/// True when some internal node has two leaf children with equal labels.
bool has_trivial_split(const DecisionTree& tree);

TreeSet remove_trivial(const TreeSet& ts);

struct EquivalenceClass {
  std::string key;
  std::vector<std::size_t> members;  // ascending input indices
  std::size_t representative = 0;    // lowest objective, then lowest index
};

struct DedupResult {
  std::size_t total = 0;
  /// Classes in order of their first member.
  std::vector<EquivalenceClass> classes;
  /// Trees whose variable count exceeded the cap; left out of every class.
  std::vector<std::size_t> over_cap;
};

DedupResult dedup(const TreeSet& ts, std::size_t max_vars = kDefaultMaxVars);

nlohmann::json dedup_to_json(const DedupResult& result, std::size_t nontrivial);

/// Sorted distinct values with their probability mass.
using WeightedValues = std::vector<std::pair<double, double>>;

struct ImportanceDistribution {
  std::vector<std::string> feature_names;
  std::vector<WeightedValues> features;
};

/// Gini importance of each tree, weighted uniformly over trees or, with
/// `deduplicate`, uniformly over equivalence classes using each class's
/// representative.
ImportanceDistribution importance_distribution(const TreeSet& ts, const Dataset& data,
                                               bool deduplicate,
                                               std::size_t max_vars = kDefaultMaxVars);

/// Integral of |F_a - F_b| for two weighted empirical distributions.
double wasserstein_1(const WeightedValues& a, const WeightedValues& b);

/// Mean drop in label agreement after shuffling each column, over
/// `repeats` independent permutations drawn from one engine seeded by
/// `seed` (repeats outer, features inner).
std::vector<double> permutation_importance(const DecisionTree& tree, const Dataset& data,
                                           std::uint64_t seed, std::size_t repeats = 1);

}  // namespace treednf
