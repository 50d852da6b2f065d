#pragma once

#include <optional>
#include <span>
#include <string>

#include "treednf/boolean.hpp"
#include "treednf/tree.hpp"

namespace treednf {

/// Minimal DNFs for the positive and negative predictions of a tree, with
/// the optional Blake canonical forms of each.
struct CanonicalForm {
  Dnf simple_pos;
  Dnf simple_neg;
  std::optional<Dnf> bcf_pos;
  std::optional<Dnf> bcf_neg;
  int dimension = 0;

  bool has_bcf() const { return bcf_pos.has_value() && bcf_neg.has_value(); }
};

/// Minimizes the positive and negative leaf disjunctions. Checks that the two
/// results are complements (exhaustively up to 10 features, sampled above)
/// and throws InternalError otherwise.
CanonicalForm to_dnf(const DecisionTree& tree, std::size_t max_vars = kDefaultMaxVars);

CanonicalForm attach_bcf(CanonicalForm cf, std::size_t max_vars = kDefaultMaxVars);

/// Term-set equality of the minimal positive expressions.
bool equivalent(const CanonicalForm& a, const CanonicalForm& b);

/// Rendering of simple_pos; equal keys iff equivalent forms.
std::string canonical_key(const CanonicalForm& cf);

/// Label of a complete sample under the DNF representation.
int evaluate(const CanonicalForm& cf, std::span<const std::uint8_t> x);

/// First term of the expression for the predicted label that x satisfies.
Term explanation(const CanonicalForm& cf, std::span<const std::uint8_t> x);

}  // namespace treednf
