#include "treednf/predict.hpp"

#include "treednf/errors.hpp"

namespace treednf {

namespace {

void check_dimension(std::size_t expected, const MaskedSample& m) {
  if (m.size() != expected) {
    throw DimensionMismatch("sample of dimension " + std::to_string(m.size()) +
                            " for model of dimension " + std::to_string(expected));
  }
}

}  // namespace

std::string_view to_string(Prediction p) {
  switch (p) {
    case Prediction::zero:
      return "0";
    case Prediction::one:
      return "1";
    case Prediction::na:
      break;
  }
  return "NA";
}

Prediction predict_dnf(const CanonicalForm& cf, const MaskedSample& m, std::size_t max_vars) {
  check_dimension(static_cast<std::size_t>(cf.dimension), m);
  for (const Term& t : cf.simple_pos.terms()) {
    if (evaluate_term(t, m) == TermStatus::satisfied) return Prediction::one;
  }
  for (const Term& t : cf.simple_neg.terms()) {
    if (evaluate_term(t, m) == TermStatus::satisfied) return Prediction::zero;
  }
  switch (substitute_simplify(cf.simple_pos, m, max_vars).kind) {
    case Simplified::Kind::constant_true:
      return Prediction::one;
    case Simplified::Kind::constant_false:
      return Prediction::zero;
    case Simplified::Kind::residual:
      break;
  }
  return Prediction::na;
}

Prediction predict_missing_fast(const DecisionTree& tree, const MaskedSample& m) {
  check_dimension(static_cast<std::size_t>(tree.dimension()), m);
  std::vector<int> stack{0};
  int label = -1;
  while (!stack.empty()) {
    const TreeNode& n = tree.node(stack.back());
    stack.pop_back();
    if (n.is_leaf()) {
      if (label >= 0 && label != n.label) return Prediction::na;
      label = n.label;
      continue;
    }
    switch (m[n.feature]) {
      case Tri::na:
        stack.push_back(n.on_true);
        stack.push_back(n.on_false);
        break;
      case Tri::one:
        stack.push_back(n.on_true);
        break;
      case Tri::zero:
        stack.push_back(n.on_false);
        break;
    }
  }
  return from_label(label);
}

Prediction predict_path(const DecisionTree& tree, const MaskedSample& m) {
  check_dimension(static_cast<std::size_t>(tree.dimension()), m);
  const TreeNode* n = &tree.root();
  while (!n->is_leaf()) {
    const Tri v = m[n->feature];
    if (v == Tri::na) return Prediction::na;
    n = &tree.node(v == Tri::one ? n->on_true : n->on_false);
  }
  return from_label(n->label);
}

Prediction predict_feature_complete(const DecisionTree& tree, const MaskedSample& m) {
  check_dimension(static_cast<std::size_t>(tree.dimension()), m);
  for (int j : tree.used_features()) {
    if (!m.known(j)) return Prediction::na;
  }
  const TreeNode* n = &tree.root();
  while (!n->is_leaf()) n = &tree.node(m[n->feature] == Tri::one ? n->on_true : n->on_false);
  return from_label(n->label);
}

}  // namespace treednf
