#include "treednf/canonical.hpp"

#include <cassert>
#include <random>

#include "treednf/errors.hpp"

namespace treednf {

namespace {

constexpr std::size_t kExhaustiveCheckLimit = 10;
constexpr int kSampledChecks = 4096;

void check_dimension(const CanonicalForm& cf, std::size_t size) {
  if (size != static_cast<std::size_t>(cf.dimension)) {
    throw DimensionMismatch("sample of dimension " + std::to_string(size) +
                            " for form of dimension " + std::to_string(cf.dimension));
  }
}

void assert_complementary(const CanonicalForm& cf, const std::vector<int>& features) {
  std::vector<std::uint8_t> x(static_cast<std::size_t>(cf.dimension), 0);
  auto check = [&] {
    if (cf.simple_pos.evaluate(x) == cf.simple_neg.evaluate(x)) {
      throw InternalError("minimal positive and negative expressions are not complements");
    }
  };
  const std::size_t k = features.size();
  if (k <= kExhaustiveCheckLimit) {
    for (std::uint32_t bits = 0; bits < (1U << k); ++bits) {
      for (std::size_t i = 0; i < k; ++i) x[features[i]] = (bits >> i) & 1U;
      check();
    }
    return;
  }
  std::mt19937_64 engine(0x7265655f646e66ULL);
  for (int s = 0; s < kSampledChecks; ++s) {
    const std::uint64_t word = engine();
    for (std::size_t i = 0; i < k; ++i) {
      x[features[i]] = i < 64 ? (word >> i) & 1U : engine() & 1U;
    }
    check();
  }
}

}  // namespace

CanonicalForm to_dnf(const DecisionTree& tree, std::size_t max_vars) {
  const std::vector<int>& features = tree.used_features();
  if (features.size() > max_vars) throw VariableCapExceeded(features.size(), max_vars);
  LeafTerms leaves = leaves_as_terms(tree);
  CanonicalForm cf;
  cf.dimension = tree.dimension();
  cf.simple_pos = quine_mccluskey_star(Dnf(std::move(leaves.positive)), max_vars);
  cf.simple_neg = quine_mccluskey_star(Dnf(std::move(leaves.negative)), max_vars);
  assert_complementary(cf, features);
  return cf;
}

CanonicalForm attach_bcf(CanonicalForm cf, std::size_t max_vars) {
  cf.bcf_pos = blake_canonical_form(cf.simple_pos, max_vars);
  cf.bcf_neg = blake_canonical_form(cf.simple_neg, max_vars);
  return cf;
}

bool equivalent(const CanonicalForm& a, const CanonicalForm& b) {
  if (a.dimension != b.dimension) {
    throw DimensionMismatch("comparing forms of dimension " + std::to_string(a.dimension) +
                            " and " + std::to_string(b.dimension));
  }
  const bool same = a.simple_pos.term_set() == b.simple_pos.term_set();
  assert(same == (a.simple_neg.term_set() == b.simple_neg.term_set()));
  return same;
}

std::string canonical_key(const CanonicalForm& cf) { return cf.simple_pos.to_string(); }

int evaluate(const CanonicalForm& cf, std::span<const std::uint8_t> x) {
  check_dimension(cf, x.size());
  return cf.simple_pos.evaluate(x) ? 1 : 0;
}

Term explanation(const CanonicalForm& cf, std::span<const std::uint8_t> x) {
  const Dnf& expr = evaluate(cf, x) ? cf.simple_pos : cf.simple_neg;
  for (const Term& t : expr.terms()) {
    if (t.evaluate(x)) return t;
  }
  throw InternalError("no term of the predicted side is satisfied");
}

}  // namespace treednf
