#include "treednf/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "treednf/errors.hpp"
#include "treednf/random.hpp"

namespace treednf {

namespace {

bool group_owned(const CostModel& cm, const MaskedSample& state, int group) {
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (state.known(j) && cm.bin_group[j] == group) return true;
  }
  return false;
}

struct InitWalker {
  const AcquisitionEnv& env;
  const Dataset& data;
  QPolicy& policy;

  double visit(int node, MaskedSample& state, const std::vector<std::size_t>& rows) {
    const TreeNode& n = env.tree().node(node);
    if (n.is_leaf()) return env.terminal_bonus();
    std::vector<std::size_t> lo, hi;
    for (std::size_t i : rows) (data.rows[i][n.feature] ? hi : lo).push_back(i);
    double p_lo = 0.5, p_hi = 0.5;
    if (!rows.empty()) {
      p_lo = static_cast<double>(lo.size()) / static_cast<double>(rows.size());
      p_hi = 1.0 - p_lo;
    }
    const double price = env.action_cost(state, n.feature);
    const std::string key = state_key(env.tree(), state);

    state.set(n.feature, Tri::zero);
    const double r_lo = visit(n.on_false, state, lo);
    state.set(n.feature, Tri::one);
    const double r_hi = visit(n.on_true, state, hi);
    state.set(n.feature, Tri::na);

    const double value = p_lo * r_lo + p_hi * r_hi - price;
    std::vector<double>& entry = policy.table[key];
    entry.assign(static_cast<std::size_t>(policy.dimension), 0.0);
    entry[static_cast<std::size_t>(n.feature)] = value;
    return value;
  }
};

std::vector<double>& lookup(QPolicy& policy, const std::string& key) {
  auto [it, fresh] = policy.table.try_emplace(key);
  if (fresh) it->second.assign(static_cast<std::size_t>(policy.dimension), 0.0);
  return it->second;
}

}  // namespace

void CostModel::validate(const DecisionTree& tree) const {
  if (group_cost.size() != group_names.size()) {
    throw SchemaError("cost model has mismatched group lists");
  }
  if (bin_group.size() != static_cast<std::size_t>(tree.dimension())) {
    throw DimensionMismatch("cost model covers " + std::to_string(bin_group.size()) +
                            " binary features, tree has " + std::to_string(tree.dimension()));
  }
  for (int f : tree.used_features()) {
    const int g = bin_group[static_cast<std::size_t>(f)];
    if (g < 0 || static_cast<std::size_t>(g) >= group_cost.size()) {
      throw SchemaError("feature " + std::to_string(f) + " has no cost group");
    }
    const double c = group_cost[static_cast<std::size_t>(g)];
    if (!std::isfinite(c) || c <= 0.0) {
      throw SchemaError("feature \"" + group_names[static_cast<std::size_t>(g)] +
                        "\" needs a positive cost");
    }
  }
}

CostModel cost_model_from_json(const nlohmann::json& costs, const Dataset& data) {
  if (!costs.is_object()) throw SchemaError("costs must be a JSON object of name -> cost");
  CostModel cm;
  if (data.groups) {
    cm.group_names = data.group_names;
    cm.bin_group = *data.groups;
  } else {
    cm.group_names = data.feature_names;
    for (std::size_t j = 0; j < data.dimension(); ++j) cm.bin_group.push_back(static_cast<int>(j));
  }
  cm.group_cost.assign(cm.group_names.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, value] : costs.items()) {
    auto it = std::find(cm.group_names.begin(), cm.group_names.end(), name);
    if (it == cm.group_names.end()) throw SchemaError("cost given for unknown feature \"" + name + "\"");
    if (!value.is_number() || !std::isfinite(value.get<double>()) || value.get<double>() <= 0.0) {
      throw SchemaError("cost of \"" + name + "\" must be a positive number");
    }
    cm.group_cost[static_cast<std::size_t>(it - cm.group_names.begin())] = value.get<double>();
  }
  return cm;
}

nlohmann::json cost_model_to_json(const CostModel& cm) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t g = 0; g < cm.group_names.size(); ++g) {
    if (std::isfinite(cm.group_cost[g])) out[cm.group_names[g]] = cm.group_cost[g];
  }
  return out;
}

CostModel random_costs(const Dataset& data, std::uint64_t seed) {
  nlohmann::json costs = nlohmann::json::object();
  std::mt19937_64 engine(seed);
  const std::vector<std::string>& names = data.groups ? data.group_names : data.feature_names;
  for (const std::string& name : names) costs[name] = static_cast<int>(1 + uniform_index(engine, 10));
  return cost_model_from_json(costs, data);
}

std::optional<int> is_terminal(const MaskedSample& state, const CanonicalForm& cf) {
  if (!cf.has_bcf()) throw BcfMissing("Blake canonical form not attached");
  for (const Term& t : cf.bcf_pos->terms()) {
    if (evaluate_term(t, state) == TermStatus::satisfied) return 1;
  }
  for (const Term& t : cf.bcf_neg->terms()) {
    if (evaluate_term(t, state) == TermStatus::satisfied) return 0;
  }
  return std::nullopt;
}

std::string state_key(const DecisionTree& tree, const MaskedSample& state) {
  std::string key;
  for (int f : tree.used_features()) {
    const Tri v = state[static_cast<std::size_t>(f)];
    key.push_back(v == Tri::na ? '?' : v == Tri::one ? '1' : '0');
  }
  return key;
}

AcquisitionEnv::AcquisitionEnv(DecisionTree tree, CanonicalForm cf, CostModel cm, BonusScope scope)
    : tree_(std::move(tree)), cf_(std::move(cf)), cm_(std::move(cm)) {
  if (!cf_.has_bcf()) throw BcfMissing("Blake canonical form not attached");
  if (cf_.dimension != tree_.dimension()) throw DimensionMismatch("form and tree dimensions differ");
  cm_.validate(tree_);
  if (scope == BonusScope::all_features) {
    for (double c : cm_.group_cost) {
      if (std::isfinite(c)) bonus_ += c;
    }
  } else {
    std::vector<int> groups;
    for (int f : tree_.used_features()) groups.push_back(cm_.bin_group[static_cast<std::size_t>(f)]);
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
    for (int g : groups) bonus_ += cm_.group_cost[static_cast<std::size_t>(g)];
  }
}

std::optional<int> AcquisitionEnv::is_terminal(const MaskedSample& state) const {
  return treednf::is_terminal(state, cf_);
}

std::vector<int> AcquisitionEnv::legal_actions(const MaskedSample& state) const {
  std::vector<int> out;
  for (int f : tree_.used_features()) {
    if (!state.known(static_cast<std::size_t>(f))) out.push_back(f);
  }
  return out;
}

double AcquisitionEnv::action_cost(const MaskedSample& state, int action) const {
  const int g = cm_.bin_group[static_cast<std::size_t>(action)];
  return group_owned(cm_, state, g) ? 0.0 : cm_.group_cost[static_cast<std::size_t>(g)];
}

StepResult AcquisitionEnv::step(const MaskedSample& state, int action,
                                std::span<const std::uint8_t> sample) const {
  if (state.size() != static_cast<std::size_t>(tree_.dimension()) ||
      sample.size() != state.size()) {
    throw DimensionMismatch("state or sample width differs from the tree dimension");
  }
  const auto& used = tree_.used_features();
  if (!std::binary_search(used.begin(), used.end(), action)) {
    throw IllegalAction("feature " + std::to_string(action) + " is not used by the tree");
  }
  if (state.known(static_cast<std::size_t>(action))) {
    throw IllegalAction("feature " + std::to_string(action) + " is already known");
  }
  StepResult r{state, 0.0, action_cost(state, action), false};
  r.next.set(action, sample[static_cast<std::size_t>(action)] ? Tri::one : Tri::zero);
  r.reward = -r.cost;
  if (is_terminal(r.next)) {
    r.reward += bonus_;
    r.done = true;
  }
  return r;
}

void QHyperparams::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw SchemaError("gamma must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw SchemaError("alpha must lie in (0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw SchemaError("epsilon must lie in [0, 1]");
}

int QPolicy::greedy_action(const std::string& key, std::span<const int> legal) const {
  if (legal.empty()) throw InternalError("no legal action to choose from");
  auto it = table.find(key);
  if (it == table.end()) return *std::min_element(legal.begin(), legal.end());
  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<int> sorted(legal.begin(), legal.end());
  std::sort(sorted.begin(), sorted.end());
  for (int a : sorted) {
    const double v = it->second[static_cast<std::size_t>(a)];
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

nlohmann::json policy_to_json(const QPolicy& policy) {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [key, values] : policy.table) table[key] = values;
  return {{"dimension", policy.dimension},
          {"hyperparams",
           {{"gamma", policy.hyperparams.gamma},
            {"alpha", policy.hyperparams.alpha},
            {"epsilon", policy.hyperparams.epsilon},
            {"episodes", policy.hyperparams.episodes}}},
          {"table", table}};
}

QPolicy policy_from_json(const nlohmann::json& document) {
  try {
    QPolicy policy;
    policy.dimension = document.at("dimension").get<int>();
    if (policy.dimension < 0) throw SchemaError("policy dimension must be non-negative");
    if (document.contains("hyperparams")) {
      const nlohmann::json& hp = document.at("hyperparams");
      policy.hyperparams.gamma = hp.value("gamma", policy.hyperparams.gamma);
      policy.hyperparams.alpha = hp.value("alpha", policy.hyperparams.alpha);
      policy.hyperparams.epsilon = hp.value("epsilon", policy.hyperparams.epsilon);
      policy.hyperparams.episodes = hp.value("episodes", policy.hyperparams.episodes);
    }
    for (const auto& [key, values] : document.at("table").items()) {
      auto v = values.get<std::vector<double>>();
      if (v.size() != static_cast<std::size_t>(policy.dimension)) {
        throw SchemaError("action values for state \"" + key + "\" have the wrong length");
      }
      policy.table.emplace(key, std::move(v));
    }
    return policy;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed policy document: ") + e.what());
  }
}

QPolicy init_q(const AcquisitionEnv& env, const Dataset& data) {
  if (data.size() == 0) throw EmptyDataset("policy initialization needs training rows");
  if (data.dimension() != static_cast<std::size_t>(env.tree().dimension())) {
    throw DimensionMismatch("dataset and tree dimensions differ");
  }
  QPolicy policy;
  policy.dimension = env.tree().dimension();
  if (env.tree().is_constant()) return policy;
  std::vector<std::size_t> rows(data.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  MaskedSample state = MaskedSample::all_unknown(static_cast<std::size_t>(policy.dimension));
  InitWalker{env, data, policy}.visit(0, state, rows);
  return policy;
}

QPolicy train_q(const AcquisitionEnv& env, const Dataset& data, const QHyperparams& hp,
                std::uint64_t seed) {
  hp.validate();
  QPolicy policy = init_q(env, data);
  policy.hyperparams = hp;
  std::mt19937_64 engine(seed);
  const auto dimension = static_cast<std::size_t>(policy.dimension);
  for (std::size_t episode = 0; episode < hp.episodes; ++episode) {
    const std::vector<std::uint8_t>& row = data.rows[uniform_index(engine, data.size())];
    MaskedSample state = MaskedSample::all_unknown(dimension);
    if (env.is_terminal(state)) continue;
    for (std::size_t steps = 0; steps <= dimension; ++steps) {
      const std::vector<int> legal = env.legal_actions(state);
      if (legal.empty()) throw NonTerminatingPolicy("every tree feature known but no term satisfied");
      const std::string key = state_key(env.tree(), state);
      int action;
      if (uniform01(engine) < hp.epsilon) {
        action = legal[uniform_index(engine, legal.size())];
      } else {
        lookup(policy, key);
        action = policy.greedy_action(key, legal);
      }
      const StepResult r = env.step(state, action, row);
      double target = r.reward;
      if (!r.done) {
        const std::vector<double>& next = lookup(policy, state_key(env.tree(), r.next));
        double best = -std::numeric_limits<double>::infinity();
        for (int a : env.legal_actions(r.next)) best = std::max(best, next[static_cast<std::size_t>(a)]);
        target += hp.gamma * best;
      }
      double& q = lookup(policy, key)[static_cast<std::size_t>(action)];
      q += hp.alpha * (target - q);
      if (r.done) break;
      state = r.next;
    }
  }
  return policy;
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::naive: return "naive";
    case PolicyKind::path: return "path";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::optimized: return "optimized";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  for (PolicyKind k : {PolicyKind::naive, PolicyKind::path, PolicyKind::greedy, PolicyKind::optimized}) {
    if (to_string(k) == name) return k;
  }
  throw SchemaError("unknown policy kind \"" + std::string(name) + "\"");
}

double policy_cost(PolicyKind kind, const AcquisitionEnv& env, const QPolicy* policy,
                   std::span<const std::uint8_t> row) {
  if (kind == PolicyKind::optimized && policy == nullptr) {
    throw SchemaError("the optimized policy needs a trained Q table");
  }
  const DecisionTree& tree = env.tree();
  MaskedSample state = MaskedSample::all_unknown(static_cast<std::size_t>(tree.dimension()));
  double cost = 0.0;
  auto buy = [&](int f) {
    const StepResult r = env.step(state, f, row);
    cost += r.cost;
    state = r.next;
  };

  if (kind == PolicyKind::naive) {
    for (int f : tree.used_features()) buy(f);
    if (!env.is_terminal(state)) throw NonTerminatingPolicy("all tree features known, no term satisfied");
    return cost;
  }
  int node = 0;
  for (std::size_t steps = 0; !env.is_terminal(state); ++steps) {
    const std::vector<int> legal = env.legal_actions(state);
    if (legal.empty() || steps > tree.used_features().size()) {
      throw NonTerminatingPolicy("all tree features known, no term satisfied");
    }
    int action = legal.front();
    if (kind == PolicyKind::path) {
      while (!tree.node(node).is_leaf() && state.known(static_cast<std::size_t>(tree.node(node).feature))) {
        const TreeNode& n = tree.node(node);
        node = state[static_cast<std::size_t>(n.feature)] == Tri::one ? n.on_true : n.on_false;
      }
      if (tree.node(node).is_leaf()) throw NonTerminatingPolicy("reached a leaf without a satisfied term");
      action = tree.node(node).feature;
    } else if (kind == PolicyKind::greedy) {
      double cheapest = std::numeric_limits<double>::infinity();
      for (int a : legal) {
        const double c = env.action_cost(state, a);
        if (c < cheapest) {
          cheapest = c;
          action = a;
        }
      }
    } else {
      action = policy->greedy_action(state_key(tree, state), legal);
    }
    buy(action);
  }
  return cost;
}

PolicyEvaluation evaluate_policy(PolicyKind kind, const AcquisitionEnv& env, const QPolicy* policy,
                                 const Dataset& data) {
  if (data.size() == 0) throw EmptyDataset("policy evaluation needs at least one row");
  if (data.dimension() != static_cast<std::size_t>(env.tree().dimension())) {
    throw DimensionMismatch("dataset and tree dimensions differ");
  }
  std::vector<double> costs;
  for (const auto& row : data.rows) costs.push_back(policy_cost(kind, env, policy, row));
  PolicyEvaluation e;
  e.rows = costs.size();
  for (double c : costs) e.mean_cost += c;
  e.mean_cost /= static_cast<double>(costs.size());
  double ss = 0.0;
  for (double c : costs) ss += (c - e.mean_cost) * (c - e.mean_cost);
  e.std_cost = std::sqrt(ss / static_cast<double>(costs.size()));
  return e;
}

}  // namespace treednf
