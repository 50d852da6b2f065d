// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "oracles.hpp"
#include "treednf/canonical.hpp"
#include "treednf/cost.hpp"
#include "treednf/missingness.hpp"
#include "treednf/predict.hpp"
#include "treednf/rashomon.hpp"

using namespace treednf;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seconds > limit_seconds) {
    r.ok = false;
    r.detail += " (time limit exceeded)";
  }
  if (!r.ok) ++failures;
  std::printf("%s criterion %2d: %s [%.2fs] %s\n", r.ok ? "PASS" : "FAIL", id, title, seconds,
              r.detail.c_str());
  std::fflush(stdout);
}

std::vector<std::uint8_t> bits(std::uint64_t value, int dimension) {
  std::vector<std::uint8_t> x(static_cast<std::size_t>(dimension));
  for (int j = 0; j < dimension; ++j) x[static_cast<std::size_t>(j)] = (value >> j) & 1U;
  return x;
}

int expected_label(const std::set<int>& labels) { return labels.size() == 1 ? *labels.begin() : -1; }

int as_label(Prediction p) { return p == Prediction::na ? -1 : static_cast<int>(p); }

Dataset random_dataset(std::mt19937_64& rng, int dimension, int rows, const DecisionTree* tree) {
  Dataset d;
  for (int j = 0; j < dimension; ++j) d.feature_names.push_back("x" + std::to_string(j));
  for (int i = 0; i < rows; ++i) {
    d.rows.push_back(oracle::random_row(rng, dimension));
    d.labels.push_back(tree ? static_cast<std::uint8_t>(oracle::walk(*tree, d.rows.back()))
                            : static_cast<std::uint8_t>(rng() & 1U));
  }
  return d;
}

/// Tree and mask pairs shared by the completeness, agreement and dominance criteria.
struct MaskedCase {
  std::size_t tree;
  MaskedSample mask;
};

struct MaskCorpus {
  std::vector<DecisionTree> trees;
  std::vector<CanonicalForm> forms;
  std::vector<MaskedCase> cases;
};

const MaskCorpus& mask_corpus() {
  static const MaskCorpus corpus = [] {
    MaskCorpus c;
    std::mt19937_64 rng(3);
    for (std::size_t i = 0; i < 200; ++i) {
      const int dimension = 2 + static_cast<int>(oracle::uniform_index(rng, 7));
      c.trees.push_back(oracle::random_tree(rng, dimension, 5, 0.2));
      c.forms.push_back(to_dnf(c.trees.back()));
      for (int m = 0; m < 200; ++m) {
        const double p = oracle::uniform01(rng);
        c.cases.push_back({i, oracle::random_mask(rng, oracle::random_row(rng, dimension), p)});
      }
    }
    return c;
  }();
  return corpus;
}

/// Shuffles terms, splits one term on a variable it lacks and appends a
/// term absorbed by an existing one. The result is logically equal to `d`
/// over the same variables.
Dnf rewrite(std::mt19937_64& rng, const Dnf& d) {
  std::vector<Term> terms = d.terms();
  const std::vector<int> vars = d.variables();
  const std::size_t pick = oracle::uniform_index(rng, terms.size());
  const Term chosen = terms[pick];
  for (int v : vars) {
    if (chosen.polarity_of(v).has_value()) continue;
    terms.erase(terms.begin() + static_cast<std::ptrdiff_t>(pick));
    terms.push_back(*Term::conjoin(chosen, Term{pos(v)}));
    terms.push_back(*Term::conjoin(chosen, Term{neg(v)}));
    break;
  }
  const Term base = terms[oracle::uniform_index(rng, terms.size())];
  for (int v : vars) {
    if (base.polarity_of(v).has_value()) continue;
    terms.push_back(*Term::conjoin(base, Term{oracle::coin(rng, 0.5) ? pos(v) : neg(v)}));
    break;
  }
  std::shuffle(terms.begin(), terms.end(), rng);
  return Dnf(std::move(terms));
}

/// Every tree of depth at most `depth` over the given features.
std::vector<Subtree> all_subtrees(const std::vector<int>& features, int depth) {
  std::vector<Subtree> out{leaf(0), leaf(1)};
  if (depth == 0) return out;
  for (int f : features) {
    std::vector<int> rest;
    for (int g : features) {
      if (g != f) rest.push_back(g);
    }
    const std::vector<Subtree> children = all_subtrees(rest, depth - 1);
    for (const Subtree& lo : children) {
      for (const Subtree& hi : children) out.push_back(split(f, lo, hi));
    }
  }
  return out;
}

using Partition = std::set<std::vector<std::size_t>>;

template <typename Key>
Partition partition_by(const std::vector<Key>& keys) {
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < keys.size(); ++i) groups[keys[i]].push_back(i);
  Partition p;
  for (auto& [key, members] : groups) p.insert(members);
  return p;
}

bool same_distribution(const ImportanceDistribution& a, const ImportanceDistribution& b) {
  return a.feature_names == b.feature_names && a.features == b.features;
}

}  // namespace

int main() {
  criterion(1, "golden examples", 1.0, [] {
    const std::string left = canonical_key(to_dnf(oracle::and_tree_f1_root()));
    const std::string right = canonical_key(to_dnf(oracle::and_tree_f2_root()));
    const CanonicalForm mux = attach_bcf(to_dnf(oracle::mux_tree()));
    const Dnf dnf{Term{neg(1), pos(3)}, Term{pos(1), pos(2)}};
    const Dnf bcf{Term{neg(1), pos(3)}, Term{pos(1), pos(2)}, Term{pos(2), pos(3)}};
    const bool ok = left == "f1 & f2" && right == left && mux.simple_pos == dnf && *mux.bcf_pos == bcf;
    return Outcome{ok, "keys \"" + left + "\" / \"" + right + "\"; dnf " + mux.simple_pos.to_string() +
                           "; bcf " + mux.bcf_pos->to_string()};
  });

  criterion(2, "faithfulness on 1000 random trees", 60.0, [] {
    std::mt19937_64 rng(2);
    std::size_t checked = 0, wrong = 0;
    for (int i = 0; i < 1000; ++i) {
      const int dimension = 1 + static_cast<int>(oracle::uniform_index(rng, 8));
      const DecisionTree t = oracle::random_tree(rng, dimension, 4);
      const CanonicalForm cf = to_dnf(t);
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << dimension); ++v) {
        const std::vector<std::uint8_t> x = bits(v, dimension);
        const int walked = oracle::walk(t, x);
        if (evaluate(cf, x) != walked || cf.simple_pos.evaluate(x) == cf.simple_neg.evaluate(x) ||
            oracle::eval_dnf(cf.simple_pos, x) != (walked == 1)) {
          ++wrong;
        }
        ++checked;
      }
    }
    return Outcome{wrong == 0, std::to_string(checked) + " samples, " + std::to_string(wrong) + " mismatches"};
  });

  criterion(3, "completeness on 200 trees x 200 masks", 300.0, [] {
    const MaskCorpus& c = mask_corpus();
    std::size_t wrong = 0, predicted = 0;
    for (const MaskedCase& mc : c.cases) {
      const int truth = expected_label(oracle::completion_labels(c.trees[mc.tree], mc.mask));
      const int got = as_label(predict_dnf(c.forms[mc.tree], mc.mask));
      if (got != truth) ++wrong;
      if (got >= 0) ++predicted;
    }
    return Outcome{wrong == 0, std::to_string(c.cases.size()) + " cases, " + std::to_string(predicted) +
                                   " predicted, " + std::to_string(wrong) + " mismatches"};
  });

  criterion(4, "fast predictor agrees with the DNF predictor", 300.0, [] {
    const MaskCorpus& c = mask_corpus();
    std::size_t wrong = 0;
    for (const MaskedCase& mc : c.cases) {
      if (predict_missing_fast(c.trees[mc.tree], mc.mask) != predict_dnf(c.forms[mc.tree], mc.mask)) ++wrong;
    }
    return Outcome{wrong == 0, std::to_string(c.cases.size()) + " cases, " + std::to_string(wrong) + " mismatches"};
  });

  criterion(5, "equivalence classes of all depth-2 trees over 3 features", 60.0, [] {
    const std::vector<Subtree> shapes = all_subtrees({0, 1, 2}, 2);
    std::vector<std::string> keys;
    std::vector<std::vector<int>> tables;
    for (const Subtree& s : shapes) {
      const DecisionTree t(3, s);
      keys.push_back(canonical_key(to_dnf(t)));
      std::vector<int> table;
      for (std::uint64_t v = 0; v < 8; ++v) table.push_back(oracle::walk(t, bits(v, 3)));
      tables.push_back(table);
    }
    const Partition by_key = partition_by(keys);
    const Partition by_table = partition_by(tables);
    return Outcome{by_key == by_table, std::to_string(shapes.size()) + " trees, " + std::to_string(by_key.size()) +
                                           " key classes, " + std::to_string(by_table.size()) +
                                           " truth-table classes"};
  });

  criterion(6, "Blake canonical form equals enumerated prime implicants", 120.0, [] {
    std::mt19937_64 rng(6);
    std::size_t wrong = 0;
    for (int i = 0; i < 500; ++i) {
      const int variables = 1 + static_cast<int>(oracle::uniform_index(rng, 8));
      const Dnf d = oracle::random_dnf(rng, variables, 8, 0.4);
      const std::vector<Term> got = blake_canonical_form(d).terms();
      if (std::set<Term>(got.begin(), got.end()) != oracle::brute_primes(d, d.variables())) ++wrong;
    }
    return Outcome{wrong == 0, "500 expressions, " + std::to_string(wrong) + " mismatches"};
  });

  criterion(7, "Quine-McCluskey output is independent of syntax", 60.0, [] {
    std::mt19937_64 rng(7);
    std::size_t pairs = 0, wrong = 0;
    while (pairs < 100) {
      const int variables = 2 + static_cast<int>(oracle::uniform_index(rng, 5));
      const Dnf a = oracle::random_dnf(rng, variables, 5, 0.5);
      const Dnf b = rewrite(rng, a);
      if (a == b || a.variables() != b.variables()) continue;
      if (oracle::brute_table(a, a.variables()) != oracle::brute_table(b, a.variables())) {
        return Outcome{false, "generator produced a non-equivalent pair"};
      }
      ++pairs;
      if (quine_mccluskey_star(a) != quine_mccluskey_star(b)) ++wrong;
    }
    return Outcome{wrong == 0, "100 pairs, " + std::to_string(wrong) + " differing outputs"};
  });

  criterion(8, "Gini importance ratio on Y = X1 X2", 1.0, [] {
    const Dataset data = oracle::and_dataset();
    const std::vector<double> left = gini_importance(oracle::and_tree_f1_root(), data);
    const std::vector<double> right = gini_importance(oracle::and_tree_f2_root(), data);
    const double left_ratio = left[2] / left[1];
    const double right_ratio = right[1] / right[2];
    return Outcome{left_ratio == 2.0 && right_ratio == 2.0,
                   "deeper/root = " + std::to_string(left_ratio) + " and " + std::to_string(right_ratio)};
  });

  criterion(9, "missingness coverage rates and dominance", 300.0, [] {
    const DecisionTree tree = oracle::and_tree_f1_root();
    const Dataset data = oracle::and_dataset();
    // Enumerate the 4 masks over the two split features for each of the 4 rows.
    int dnf = 0, path = 0, complete = 0;
    for (const auto& row : data.rows) {
      for (unsigned mask = 0; mask < 4; ++mask) {
        std::vector<Tri> cells{Tri::zero, row[1] ? Tri::one : Tri::zero, row[2] ? Tri::one : Tri::zero};
        if (mask & 1U) cells[1] = Tri::na;
        if (mask & 2U) cells[2] = Tri::na;
        const MaskedSample m(cells);
        if (oracle::completion_labels(tree, m).size() == 1) ++dnf;
        if (oracle::path_label(tree, m) >= 0) ++path;
        if (m.known(1) && m.known(2)) ++complete;
      }
    }
    const ExpectedCoverage exact = expected_coverage(tree, data, 0.5);
    bool ok = exact.dnf == dnf / 16.0 && exact.path == path / 16.0 && exact.feature_complete == complete / 16.0 &&
              dnf > path && path > complete;

    const MaskCorpus& c = mask_corpus();
    std::size_t violations = 0;
    for (const MaskedCase& mc : c.cases) {
      const DecisionTree& t = c.trees[mc.tree];
      const bool by_dnf = predict_dnf(c.forms[mc.tree], mc.mask) != Prediction::na;
      const bool by_path = predict_path(t, mc.mask) != Prediction::na;
      const bool by_complete = predict_feature_complete(t, mc.mask) != Prediction::na;
      if ((by_complete && !by_path) || (by_path && !by_dnf)) ++violations;
    }
    ok = ok && violations == 0;
    return Outcome{ok, "dnf " + std::to_string(dnf) + "/16, path " + std::to_string(path) +
                           "/16, feature_complete " + std::to_string(complete) + "/16 by enumeration; " +
                           std::to_string(violations) + " dominance violations over " +
                           std::to_string(c.cases.size()) + " cases"};
  });

  criterion(10, "learned acquisition policy on the AND tree", 120.0, [] {
    const Dataset data = oracle::and_dataset();
    const CostModel costs = cost_model_from_json({{"f1", 1}, {"f2", 10}}, data);
    const double optimum =
        oracle::OptimalCost(oracle::and_tree_f1_root(), data.rows, costs.group_cost, costs.bin_group).solve();
    bool ok = optimum == 6.0;
    std::string detail = "optimum " + std::to_string(optimum) + "; learned";
    for (const DecisionTree& tree : {oracle::and_tree_f1_root(), oracle::and_tree_f2_root()}) {
      const AcquisitionEnv env(tree, attach_bcf(to_dnf(tree)), costs);
      for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const QPolicy q = train_q(env, data, QHyperparams{}, seed);
        const double cost = evaluate_policy(PolicyKind::optimized, env, &q, data).mean_cost;
        ok = ok && cost <= optimum * 1.05;
        detail += " " + std::to_string(cost);
      }
    }
    const AcquisitionEnv right(oracle::and_tree_f2_root(), attach_bcf(to_dnf(oracle::and_tree_f2_root())), costs);
    const double path = evaluate_policy(PolicyKind::path, right, nullptr, data).mean_cost;
    ok = ok && path == 10.5;
    return Outcome{ok, detail + "; path on the f2-rooted tree " + std::to_string(path)};
  });

  criterion(11, "dedup bookkeeping and duplication invariance", 60.0, [] {
    std::mt19937_64 rng(11);
    bool ok = true;
    std::size_t sets = 0;
    for (; sets < 50; ++sets) {
      const int dimension = 3 + static_cast<int>(oracle::uniform_index(rng, 4));
      TreeSet ts;
      const std::size_t count = 1 + oracle::uniform_index(rng, 25);
      for (std::size_t i = 0; i < count; ++i) {
        ts.trees.push_back(oracle::random_tree(rng, dimension, 3, 0.3));
        ts.objectives.push_back(oracle::uniform01(rng));
      }
      const Dataset data = random_dataset(rng, dimension, 30, nullptr);
      const TreeSet nontrivial = remove_trivial(ts);
      const DedupResult classes = dedup(nontrivial);
      ok = ok && classes.classes.size() <= nontrivial.size() && nontrivial.size() <= ts.size();

      TreeSet doubled = ts;
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t pick = oracle::uniform_index(rng, count);
        doubled.trees.push_back(ts.trees[pick]);
        doubled.objectives.push_back(ts.objectives[pick]);
      }
      ok = ok && same_distribution(importance_distribution(ts, data, true),
                                   importance_distribution(doubled, data, true));
    }
    return Outcome{ok, std::to_string(sets) + " random tree sets"};
  });

  criterion(12, "no bias from MCAR masking", 300.0, [] {
    std::mt19937_64 rng(12);
    const DecisionTree tree = oracle::random_tree(rng, 8, 4, 0.1);
    const CanonicalForm cf = to_dnf(tree);
    const Dataset data = random_dataset(rng, 8, 50, &tree);
    std::size_t predicted = 0, exceptions = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      const MaskedDataset masked = inject_mcar(data, {0.1 + 0.8 * static_cast<double>(seed % 9) / 8.0,
                                                      MissingMode::per_binary_feature, seed});
      for (std::size_t i = 0; i < masked.size(); ++i) {
        const Prediction p = predict_dnf(cf, masked.rows[i]);
        if (p == Prediction::na) continue;
        ++predicted;
        if (as_label(p) != oracle::walk(tree, data.rows[i])) ++exceptions;
      }
    }
    return Outcome{exceptions == 0, std::to_string(predicted) + " predictions, " + std::to_string(exceptions) +
                                        " exceptions"};
  });

  std::printf("%s\n", failures == 0 ? "ALL CRITERIA PASS" : "SOME CRITERIA FAILED");
  return failures == 0 ? 0 : 1;
}
