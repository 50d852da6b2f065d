#pragma once

// Minimum-cost feature acquisition for a fixed tree: an episodic environment
// that stops once a Blake canonical form term is satisfied, tabular
// Q-learning over it and three fixed baselines.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "treednf/boolean.hpp"
#include "treednf/canonical.hpp"
#include "treednf/tree.hpp"

namespace treednf {

/// Purchase prices per original feature. Binary features sharing an
/// original feature are bought together.
struct CostModel {
  std::vector<std::string> group_names;
  /// NaN for groups without a price.
  std::vector<double> group_cost;
  /// Original feature index of each binary feature.
  std::vector<int> bin_group;

  /// Throws SchemaError unless every feature the tree uses maps to a group
  /// with a strictly positive finite price.
  void validate(const DecisionTree& tree) const;
  double cost_of_feature(int feature) const { return group_cost[bin_group[feature]]; }
};

/// Reads {name: cost}. Names refer to the dataset's original features when it
/// carries a group map and to binary columns otherwise.
CostModel cost_model_from_json(const nlohmann::json& costs, const Dataset& data);
nlohmann::json cost_model_to_json(const CostModel& cm);

/// Integer prices drawn uniformly from 1..10, one per original feature.
CostModel random_costs(const Dataset& data, std::uint64_t seed);

/// Whether the completion bonus sums prices over the tree's original
/// features or over every priced feature.
enum class BonusScope { tree_features, all_features };

/// Label fixed by the known values of `state`, if any BCF term is satisfied.
/// Throws BcfMissing when cf has no BCF.
std::optional<int> is_terminal(const MaskedSample& state, const CanonicalForm& cf);

/// Ternary rendering over the tree's features in ascending index order.
std::string state_key(const DecisionTree& tree, const MaskedSample& state);

struct StepResult {
  MaskedSample next;
  double reward = 0.0;
  /// Price paid for this action (0 when its original feature was owned).
  double cost = 0.0;
  bool done = false;
};

class AcquisitionEnv {
 public:
  /// Throws BcfMissing unless cf carries its Blake canonical forms.
  AcquisitionEnv(DecisionTree tree, CanonicalForm cf, CostModel cm,
                 BonusScope scope = BonusScope::tree_features);

  const DecisionTree& tree() const { return tree_; }
  const CostModel& costs() const { return cm_; }
  double terminal_bonus() const { return bonus_; }

  std::optional<int> is_terminal(const MaskedSample& state) const;
  /// Unknown features used by the tree, ascending.
  std::vector<int> legal_actions(const MaskedSample& state) const;
  /// 0 when a binary feature of the same original feature is already known.
  double action_cost(const MaskedSample& state, int action) const;
  /// Throws IllegalAction for known features and features outside the tree.
  StepResult step(const MaskedSample& state, int action, std::span<const std::uint8_t> sample) const;

 private:
  DecisionTree tree_;
  CanonicalForm cf_;
  CostModel cm_;
  double bonus_ = 0.0;
};

struct QHyperparams {
  double gamma = 0.9;
  double alpha = 0.1;
  double epsilon = 0.5;
  std::size_t episodes = 10000;

  void validate() const;
};

struct QPolicy {
  int dimension = 0;
  QHyperparams hyperparams;
  std::unordered_map<std::string, std::vector<double>> table;

  /// Highest-valued legal action, lowest index on ties. Unvisited states
  /// read as all zeros.
  int greedy_action(const std::string& key, std::span<const int> legal) const;
};

nlohmann::json policy_to_json(const QPolicy& policy);
QPolicy policy_from_json(const nlohmann::json& document);

/// Seeds the table along every root-to-leaf path: a node's split entry gets
/// p_false * r_false + p_true * r_true - price, with leaves worth the
/// terminal bonus and branch probabilities taken from the rows reaching the
/// node (one half each when none do). The price is 0 when the split's
/// original feature was already bought higher on the path.
QPolicy init_q(const AcquisitionEnv& env, const Dataset& data);

QPolicy train_q(const AcquisitionEnv& env, const Dataset& data, const QHyperparams& hp,
                std::uint64_t seed);

enum class PolicyKind { naive, path, greedy, optimized };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

/// Total price paid on one row. `policy` is required for `optimized`.
double policy_cost(PolicyKind kind, const AcquisitionEnv& env, const QPolicy* policy,
                   std::span<const std::uint8_t> row);

struct PolicyEvaluation {
  double mean_cost = 0.0;
  /// Population standard deviation across rows.
  double std_cost = 0.0;
  std::size_t rows = 0;
};

PolicyEvaluation evaluate_policy(PolicyKind kind, const AcquisitionEnv& env, const QPolicy* policy,
                                 const Dataset& data);

}  // namespace treednf
