#pragma once

// Cube / DNF algebra over binary features, truth tables, the deterministic
// Quine-McCluskey minimizer and the consensus closure (Blake canonical form).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace treednf {

inline constexpr std::size_t kDefaultMaxVars = 20;

struct Literal {
  int feature = 0;
  bool positive = true;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

inline Literal pos(int feature) { return {feature, true}; }
inline Literal neg(int feature) { return {feature, false}; }

/// Ternary feature value of a partially observed sample.
enum class Tri : std::uint8_t { zero = 0, one = 1, na = 2 };

/// A sample where some features may be unknown (NA).
class MaskedSample {
 public:
  MaskedSample() = default;
  explicit MaskedSample(std::vector<Tri> values) : values_(std::move(values)) {}
  static MaskedSample all_unknown(std::size_t dimension);
  static MaskedSample from_complete(std::span<const std::uint8_t> row);

  std::size_t size() const { return values_.size(); }
  Tri operator[](std::size_t i) const { return values_[i]; }
  bool known(std::size_t i) const { return values_[i] != Tri::na; }
  void set(std::size_t i, Tri v) { values_[i] = v; }
  std::size_t unknown_count() const;
  const std::vector<Tri>& values() const { return values_; }

  friend bool operator==(const MaskedSample&, const MaskedSample&) = default;

 private:
  std::vector<Tri> values_;
};

enum class TermStatus { satisfied, falsified, unknown };

/// A conjunction of literals, at most one per feature, sorted by feature.
/// The empty term is logical True.
class Term {
 public:
  Term() = default;
  /// Throws SchemaError when a feature appears with both polarities or a
  /// feature index is negative. Duplicate identical literals collapse.
  explicit Term(std::vector<Literal> literals);
  Term(std::initializer_list<Literal> literals)
      : Term(std::vector<Literal>(literals)) {}

  /// Conjunction of two terms; nothing if the result is contradictory.
  static std::optional<Term> conjoin(const Term& a, const Term& b);

  const std::vector<Literal>& literals() const { return literals_; }
  bool empty() const { return literals_.empty(); }
  std::size_t size() const { return literals_.size(); }
  /// Polarity required for `feature`, or nothing if unconstrained.
  std::optional<bool> polarity_of(int feature) const;
  /// True if every literal of *this occurs in `other` (this term is implied
  /// by `other`, so `other` is absorbed by *this).
  bool subsumes(const Term& other) const;
  bool evaluate(std::span<const std::uint8_t> assignment) const;
  int max_feature() const;

  std::string to_string() const;

  friend bool operator==(const Term&, const Term&) = default;
  /// Size first, then lexicographic literal order.
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  std::vector<Literal> literals_;
};

/// Ordered disjunction of terms. No terms = False; one empty term = True.
class Dnf {
 public:
  Dnf() = default;
  explicit Dnf(std::vector<Term> terms) : terms_(std::move(terms)) {}
  Dnf(std::initializer_list<Term> terms) : terms_(terms) {}

  static Dnf constant(bool value);

  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  /// Sorted feature indices appearing anywhere in the expression.
  std::vector<int> variables() const;
  bool is_false() const { return terms_.empty(); }
  /// Syntactic truth: some term is empty.
  bool is_true() const;
  bool evaluate(std::span<const std::uint8_t> assignment) const;
  /// Terms as a sorted set, for order-insensitive comparison.
  std::vector<Term> term_set() const;

  /// "f1 & f2 | ~f1 & f3"; "TRUE" / "FALSE" for constants.
  std::string to_string() const;

  friend bool operator==(const Dnf&, const Dnf&) = default;

 private:
  std::vector<Term> terms_;
};

/// Output column of a function over `variables`. Row r assigns to column k
/// the bit (r >> (n - 1 - k)) & 1, so the first row is all-False and the
/// last column is the least significant bit.
struct TruthTable {
  std::vector<int> variables;
  std::vector<std::uint8_t> rows;

  std::size_t arity() const { return variables.size(); }
  bool row_value(std::size_t row, std::size_t column) const {
    return (row >> (arity() - 1 - column)) & 1U;
  }

  friend bool operator==(const TruthTable&, const TruthTable&) = default;
};

TruthTable truth_table(const Dnf& expr, std::size_t max_vars = kDefaultMaxVars);
/// Table over an explicit variable list (must contain every variable of expr).
TruthTable truth_table(const Dnf& expr, std::vector<int> variables,
                       std::size_t max_vars = kDefaultMaxVars);

/// Every prime implicant, sorted by size then literal order.
std::vector<Term> prime_implicants(const TruthTable& table);

/// Logically equivalent minimum-cardinality cover of prime implicants whose
/// term list depends only on the function, not on the input syntax.
Dnf quine_mccluskey_star(const Dnf& expr, std::size_t max_vars = kDefaultMaxVars);

std::optional<Term> consensus(const Term& a, const Term& b);

/// Closure under consensus followed by absorption: the full prime implicant
/// set, sorted by size then literal order.
Dnf blake_canonical_form(const Dnf& expr, std::size_t max_vars = kDefaultMaxVars);

/// Throws DimensionMismatch when the term references a feature outside m.
TermStatus evaluate_term(const Term& t, const MaskedSample& m);

struct Simplified {
  enum class Kind { constant_true, constant_false, residual } kind;
  Dnf residual;  // meaningful only for Kind::residual
};

/// Substitutes the known values of m and re-minimizes what is left.
Simplified substitute_simplify(const Dnf& expr, const MaskedSample& m,
                               std::size_t max_vars = kDefaultMaxVars);

}  // namespace treednf
