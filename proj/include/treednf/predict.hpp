#pragma once

#include <string_view>

#include "treednf/boolean.hpp"
#include "treednf/canonical.hpp"
#include "treednf/tree.hpp"

namespace treednf {

/// Prediction under missing features. `na` is an ordinary outcome.
enum class Prediction : std::uint8_t { zero = 0, one = 1, na = 2 };

std::string_view to_string(Prediction p);
inline Prediction from_label(int label) { return label ? Prediction::one : Prediction::zero; }

/// Satisfied positive term, then satisfied negative term, then substitution
/// and re-minimization of the positive expression. Non-NA exactly when every
/// completion of m receives the same label.
Prediction predict_dnf(const CanonicalForm& cf, const MaskedSample& m,
                       std::size_t max_vars = kDefaultMaxVars);

/// Linear-time equivalent of predict_dnf working on the tree directly: all
/// leaves reachable under some completion must agree.
Prediction predict_missing_fast(const DecisionTree& tree, const MaskedSample& m);

/// Root-to-leaf traversal that gives up at the first unknown split.
Prediction predict_path(const DecisionTree& tree, const MaskedSample& m);

/// NA whenever any feature the tree uses is unknown.
Prediction predict_feature_complete(const DecisionTree& tree, const MaskedSample& m);

}  // namespace treednf
