#include "treednf/boolean.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include "treednf/errors.hpp"

namespace treednf {

namespace {

// A cube over the columns of a truth table: bits set in `mask` are
// constrained to the matching bits of `value`. Column k lives at bit n-1-k.
struct Cube {
  std::uint32_t mask = 0;
  std::uint32_t value = 0;

  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(mask) << 32) | value;
  }
  bool contains(std::uint32_t row) const { return (row & mask) == value; }
};

constexpr std::size_t kHardArityLimit = 30;

void check_cap(std::size_t variables, std::size_t max_vars) {
  if (variables > max_vars || variables > kHardArityLimit) {
    throw VariableCapExceeded(variables, std::min(max_vars, kHardArityLimit));
  }
}

std::uint32_t column_bit(std::size_t n, std::size_t column) {
  return std::uint32_t{1} << (n - 1 - column);
}

Cube term_to_cube(const Term& t, const std::vector<int>& variables) {
  const std::size_t n = variables.size();
  Cube c;
  for (const Literal& lit : t.literals()) {
    auto it = std::lower_bound(variables.begin(), variables.end(), lit.feature);
    if (it == variables.end() || *it != lit.feature) {
      throw SchemaError("variable f" + std::to_string(lit.feature) +
                        " is not a column of the truth table");
    }
    const std::uint32_t bit =
        column_bit(n, static_cast<std::size_t>(it - variables.begin()));
    c.mask |= bit;
    if (lit.positive) c.value |= bit;
  }
  return c;
}

Term cube_to_term(const Cube& c, const std::vector<int>& variables) {
  const std::size_t n = variables.size();
  std::vector<Literal> lits;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint32_t bit = column_bit(n, k);
    if (c.mask & bit) lits.push_back({variables[k], (c.value & bit) != 0});
  }
  return Term(std::move(lits));
}

// Classic tabulation: merge same-mask cubes differing in one bit until no
// merge is possible. Cubes that never merge are the prime implicants.
std::vector<Cube> prime_cubes(const TruthTable& table) {
  const std::size_t n = table.arity();
  const std::uint32_t full =
      n == 0 ? 0 : static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  std::vector<Cube> current;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r]) current.push_back({full, static_cast<std::uint32_t>(r)});
  }
  std::vector<Cube> primes;
  while (!current.empty()) {
    std::unordered_set<std::uint64_t> present;
    present.reserve(current.size() * 2);
    for (const Cube& c : current) present.insert(c.key());
    std::unordered_set<std::uint64_t> next_keys;
    std::vector<Cube> next;
    for (const Cube& c : current) {
      bool merged = false;
      for (std::uint32_t bits = c.mask; bits != 0; bits &= bits - 1) {
        const std::uint32_t bit = bits & (~bits + 1);
        const Cube partner{c.mask, c.value ^ bit};
        if (!present.contains(partner.key())) continue;
        merged = true;
        const Cube up{c.mask & ~bit, c.value & ~bit};
        if (next_keys.insert(up.key()).second) next.push_back(up);
      }
      if (!merged) primes.push_back(c);
    }
    current = std::move(next);
  }
  return primes;
}

// Exact minimum cover by depth-first branch and bound. Rows are branched in
// ascending order and candidates tried in the given prime order, and only a
// strictly smaller cover replaces the incumbent, so the first minimum found
// in that order is returned.
class CoverSearch {
 public:
  CoverSearch(std::size_t row_count, std::vector<std::vector<int>> prime_rows)
      : prime_rows_(std::move(prime_rows)),
        row_primes_(row_count),
        covered_(row_count, 0) {
    for (std::size_t p = 0; p < prime_rows_.size(); ++p) {
      for (int r : prime_rows_[p]) row_primes_[r].push_back(static_cast<int>(p));
    }
  }

  std::vector<int> solve() {
    std::vector<int> chosen;
    // Essential primes belong to every cover.
    for (const auto& primes : row_primes_) {
      if (primes.size() == 1 &&
          std::find(chosen.begin(), chosen.end(), primes[0]) == chosen.end()) {
        chosen.push_back(primes[0]);
      }
    }
    for (int p : chosen) add(p);
    best_size_ = std::numeric_limits<std::size_t>::max();
    std::vector<int> extra;
    search(extra, 0);
    chosen.insert(chosen.end(), best_.begin(), best_.end());
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

 private:
  void add(int p) {
    for (int r : prime_rows_[p]) ++covered_[r];
  }
  void remove(int p) {
    for (int r : prime_rows_[p]) --covered_[r];
  }

  // Greedy packing of uncovered rows that share no candidate prime.
  std::size_t lower_bound(std::size_t from) {
    std::size_t bound = 0;
    ++stamp_;
    if (blocked_.size() < prime_rows_.size()) blocked_.assign(prime_rows_.size(), 0);
    for (std::size_t r = from; r < covered_.size(); ++r) {
      if (covered_[r]) continue;
      bool independent = true;
      for (int p : row_primes_[r]) {
        if (blocked_[p] == stamp_) {
          independent = false;
          break;
        }
      }
      if (!independent) continue;
      ++bound;
      for (int p : row_primes_[r]) blocked_[p] = stamp_;
    }
    return bound;
  }

  void search(std::vector<int>& extra, std::size_t from) {
    std::size_t row = from;
    while (row < covered_.size() && covered_[row]) ++row;
    if (row == covered_.size()) {
      if (extra.size() < best_size_) {
        best_size_ = extra.size();
        best_ = extra;
      }
      return;
    }
    if (extra.size() + lower_bound(row) >= best_size_) return;
    for (int p : row_primes_[row]) {
      extra.push_back(p);
      add(p);
      search(extra, row + 1);
      remove(p);
      extra.pop_back();
    }
  }

  std::vector<std::vector<int>> prime_rows_;
  std::vector<std::vector<int>> row_primes_;
  std::vector<int> covered_;
  std::vector<std::uint64_t> blocked_;
  std::uint64_t stamp_ = 0;
  std::size_t best_size_ = 0;
  std::vector<int> best_;
};

bool literal_holds(const Literal& lit, std::span<const std::uint8_t> assignment) {
  if (lit.feature < 0 || static_cast<std::size_t>(lit.feature) >= assignment.size()) {
    throw DimensionMismatch("feature f" + std::to_string(lit.feature) +
                            " outside sample of dimension " +
                            std::to_string(assignment.size()));
  }
  return (assignment[lit.feature] != 0) == lit.positive;
}

}  // namespace

MaskedSample MaskedSample::all_unknown(std::size_t dimension) {
  return MaskedSample(std::vector<Tri>(dimension, Tri::na));
}

MaskedSample MaskedSample::from_complete(std::span<const std::uint8_t> row) {
  std::vector<Tri> v;
  v.reserve(row.size());
  for (std::uint8_t x : row) v.push_back(x ? Tri::one : Tri::zero);
  return MaskedSample(std::move(v));
}

std::size_t MaskedSample::unknown_count() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), Tri::na));
}

// ---------------------------------------------------------------- Term

Term::Term(std::vector<Literal> literals) : literals_(std::move(literals)) {
  std::sort(literals_.begin(), literals_.end());
  literals_.erase(std::unique(literals_.begin(), literals_.end()), literals_.end());
  for (std::size_t i = 0; i < literals_.size(); ++i) {
    if (literals_[i].feature < 0) {
      throw SchemaError("negative feature index in term");
    }
    if (i > 0 && literals_[i].feature == literals_[i - 1].feature) {
      throw SchemaError("contradictory term: f" +
                        std::to_string(literals_[i].feature) +
                        " required both true and false");
    }
  }
}

std::optional<Term> Term::conjoin(const Term& a, const Term& b) {
  std::vector<Literal> lits;
  lits.reserve(a.size() + b.size());
  std::merge(a.literals_.begin(), a.literals_.end(), b.literals_.begin(),
             b.literals_.end(), std::back_inserter(lits));
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  for (std::size_t i = 1; i < lits.size(); ++i) {
    if (lits[i].feature == lits[i - 1].feature) return std::nullopt;
  }
  Term t;
  t.literals_ = std::move(lits);
  return t;
}

std::optional<bool> Term::polarity_of(int feature) const {
  auto it = std::lower_bound(literals_.begin(), literals_.end(), Literal{feature, false});
  if (it == literals_.end() || it->feature != feature) return std::nullopt;
  return it->positive;
}

bool Term::subsumes(const Term& other) const {
  return std::includes(other.literals_.begin(), other.literals_.end(),
                       literals_.begin(), literals_.end());
}

bool Term::evaluate(std::span<const std::uint8_t> assignment) const {
  for (const Literal& lit : literals_) {
    if (!literal_holds(lit, assignment)) return false;
  }
  return true;
}

int Term::max_feature() const {
  return literals_.empty() ? -1 : literals_.back().feature;
}

std::string Term::to_string() const {
  if (literals_.empty()) return "TRUE";
  std::string out;
  for (std::size_t i = 0; i < literals_.size(); ++i) {
    if (i) out += " & ";
    if (!literals_[i].positive) out += '~';
    out += 'f';
    out += std::to_string(literals_[i].feature);
  }
  return out;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(
      a.literals_.begin(), a.literals_.end(), b.literals_.begin(),
      b.literals_.end());
}

// ---------------------------------------------------------------- Dnf

Dnf Dnf::constant(bool value) { return value ? Dnf{Term{}} : Dnf{}; }

std::vector<int> Dnf::variables() const {
  std::vector<int> vars;
  for (const Term& t : terms_) {
    for (const Literal& lit : t.literals()) vars.push_back(lit.feature);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

bool Dnf::is_true() const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.empty(); });
}

bool Dnf::evaluate(std::span<const std::uint8_t> assignment) const {
  return std::any_of(terms_.begin(), terms_.end(),
                     [&](const Term& t) { return t.evaluate(assignment); });
}

std::vector<Term> Dnf::term_set() const {
  std::vector<Term> set = terms_;
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

std::string Dnf::to_string() const {
  if (terms_.empty()) return "FALSE";
  if (is_true()) return "TRUE";
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i) out += " | ";
    out += terms_[i].to_string();
  }
  return out;
}

// ---------------------------------------------------------------- tables

TruthTable truth_table(const Dnf& expr, std::size_t max_vars) {
  return truth_table(expr, expr.variables(), max_vars);
}

TruthTable truth_table(const Dnf& expr, std::vector<int> variables,
                       std::size_t max_vars) {
  std::sort(variables.begin(), variables.end());
  variables.erase(std::unique(variables.begin(), variables.end()), variables.end());
  check_cap(variables.size(), max_vars);
  const std::size_t n = variables.size();
  const std::uint32_t full =
      n == 0 ? 0 : static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  TruthTable table{variables, std::vector<std::uint8_t>(std::size_t{1} << n, 0)};
  for (const Term& t : expr.terms()) {
    const Cube c = term_to_cube(t, variables);
    const std::uint32_t free = full & ~c.mask;
    // Walk every subset of the free bits.
    std::uint32_t sub = free;
    while (true) {
      table.rows[c.value | sub] = 1;
      if (sub == 0) break;
      sub = (sub - 1) & free;
    }
  }
  return table;
}

std::vector<Term> prime_implicants(const TruthTable& table) {
  if (table.rows.size() != (std::size_t{1} << table.arity())) {
    throw SchemaError("truth table row count does not match its arity");
  }
  std::vector<Term> terms;
  for (const Cube& c : prime_cubes(table)) {
    terms.push_back(cube_to_term(c, table.variables));
  }
  std::sort(terms.begin(), terms.end());
  return terms;
}

Dnf quine_mccluskey_star(const Dnf& expr, std::size_t max_vars) {
  const TruthTable table = truth_table(expr, max_vars);
  const std::size_t n = table.arity();
  const auto& vars = table.variables;

  std::vector<std::pair<Term, Cube>> ranked;
  for (const Cube& c : prime_cubes(table)) ranked.emplace_back(cube_to_term(c, vars), c);
  if (ranked.empty()) return Dnf{};
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Cube> primes;
  for (const auto& [term, cube] : ranked) primes.push_back(cube);

  // Columns in no prime implicant are dropped along with every row that sets
  // them. Primes never constrain those columns, so the earliest remaining
  // row in a prime is the one with all its free columns false: its value.
  std::uint32_t relevant = 0;
  for (const Cube& c : primes) relevant |= c.mask;
  std::stable_sort(primes.begin(), primes.end(),
                   [](const Cube& a, const Cube& b) { return a.value < b.value; });

  // Rows still to cover, numbered in canonical order.
  const std::uint32_t irrelevant =
      n == 0 ? 0
             : static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1) & ~relevant;
  std::vector<int> row_slot(table.rows.size(), -1);
  std::size_t row_count = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r] && (r & irrelevant) == 0) {
      row_slot[r] = static_cast<int>(row_count++);
    }
  }
  std::vector<std::vector<int>> prime_rows(primes.size());
  for (std::size_t p = 0; p < primes.size(); ++p) {
    const Cube& c = primes[p];
    const std::uint32_t free = relevant & ~c.mask;
    std::uint32_t sub = free;
    while (true) {
      const int slot = row_slot[c.value | sub];
      if (slot >= 0) prime_rows[p].push_back(slot);
      if (sub == 0) break;
      sub = (sub - 1) & free;
    }
    std::sort(prime_rows[p].begin(), prime_rows[p].end());
  }

  CoverSearch search(row_count, std::move(prime_rows));
  std::vector<Term> out;
  for (int p : search.solve()) out.push_back(cube_to_term(primes[p], vars));
  return Dnf(std::move(out));
}

// ---------------------------------------------------------------- BCF

std::optional<Term> consensus(const Term& a, const Term& b) {
  const auto& la = a.literals();
  const auto& lb = b.literals();
  int opposed = -1;
  std::size_t i = 0, j = 0;
  while (i < la.size() && j < lb.size()) {
    if (la[i].feature < lb[j].feature) {
      ++i;
    } else if (lb[j].feature < la[i].feature) {
      ++j;
    } else {
      if (la[i].positive != lb[j].positive) {
        if (opposed >= 0) return std::nullopt;
        opposed = la[i].feature;
      }
      ++i;
      ++j;
    }
  }
  if (opposed < 0) return std::nullopt;
  std::vector<Literal> lits;
  for (const Literal& l : la) {
    if (l.feature != opposed) lits.push_back(l);
  }
  for (const Literal& l : lb) {
    if (l.feature != opposed) lits.push_back(l);
  }
  return Term(std::move(lits));
}

Dnf blake_canonical_form(const Dnf& expr, std::size_t max_vars) {
  check_cap(expr.variables().size(), max_vars);

  std::vector<Term> terms;
  std::set<Term> seen;
  for (const Term& t : expr.terms()) {
    if (seen.insert(t).second) terms.push_back(t);
  }
  std::deque<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = i + 1; j < terms.size(); ++j) pairs.emplace_back(i, j);
  }
  while (!pairs.empty()) {
    const auto [qi, pi] = pairs.front();
    pairs.pop_front();
    std::optional<Term> c = consensus(terms[qi], terms[pi]);
    if (!c || !seen.insert(*c).second) continue;
    // A consensus already absorbed by a known term adds nothing new.
    const bool absorbed = std::any_of(terms.begin(), terms.end(),
                                      [&](const Term& t) { return t.subsumes(*c); });
    if (absorbed) continue;
    for (std::size_t k = 0; k < terms.size(); ++k) pairs.emplace_back(terms.size(), k);
    terms.push_back(std::move(*c));
  }

  std::vector<Term> kept;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < terms.size() && !dominated; ++j) {
      dominated = j != i && terms[j] != terms[i] && terms[j].subsumes(terms[i]);
    }
    if (!dominated) kept.push_back(terms[i]);
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return Dnf(std::move(kept));
}

// ---------------------------------------------------------------- masked

TermStatus evaluate_term(const Term& t, const MaskedSample& m) {
  bool all_known = true;
  for (const Literal& lit : t.literals()) {
    if (static_cast<std::size_t>(lit.feature) >= m.size()) {
      throw DimensionMismatch("term references f" + std::to_string(lit.feature) +
                              " but sample has dimension " + std::to_string(m.size()));
    }
  }
  for (const Literal& lit : t.literals()) {
    const Tri v = m[lit.feature];
    if (v == Tri::na) {
      all_known = false;
    } else if ((v == Tri::one) != lit.positive) {
      return TermStatus::falsified;
    }
  }
  return all_known ? TermStatus::satisfied : TermStatus::unknown;
}

Simplified substitute_simplify(const Dnf& expr, const MaskedSample& m,
                               std::size_t max_vars) {
  std::vector<Term> residual;
  for (const Term& t : expr.terms()) {
    switch (evaluate_term(t, m)) {
      case TermStatus::satisfied:
        return {Simplified::Kind::constant_true, {}};
      case TermStatus::falsified:
        break;
      case TermStatus::unknown: {
        std::vector<Literal> lits;
        for (const Literal& lit : t.literals()) {
          if (!m.known(lit.feature)) lits.push_back(lit);
        }
        residual.emplace_back(std::move(lits));
        break;
      }
    }
  }
  if (residual.empty()) return {Simplified::Kind::constant_false, {}};
  Dnf simplified = quine_mccluskey_star(Dnf(std::move(residual)), max_vars);
  if (simplified.is_true()) return {Simplified::Kind::constant_true, {}};
  if (simplified.is_false()) return {Simplified::Kind::constant_false, {}};
  return {Simplified::Kind::residual, std::move(simplified)};
}

}  // namespace treednf
