#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "treednf/errors.hpp"
#include "treednf/rashomon.hpp"

using namespace treednf;

namespace {

TreeSet make_set(std::vector<DecisionTree> trees, std::vector<double> objectives = {}) {
  TreeSet ts;
  if (objectives.empty()) objectives.assign(trees.size(), 0.0);
  ts.trees = std::move(trees);
  ts.objectives = std::move(objectives);
  return ts;
}

// Every tree of depth at most `depth` over the features in `available`.
std::vector<Subtree> all_subtrees(const std::vector<int>& available, int depth) {
  std::vector<Subtree> out{leaf(0), leaf(1)};
  if (depth == 0) return out;
  for (int f : available) {
    std::vector<int> rest;
    for (int g : available) {
      if (g != f) rest.push_back(g);
    }
    const std::vector<Subtree> children = all_subtrees(rest, depth - 1);
    for (const Subtree& lo : children) {
      for (const Subtree& hi : children) out.push_back(split(f, lo, hi));
    }
  }
  return out;
}

std::vector<int> truth_vector(const DecisionTree& t) {
  std::vector<int> out;
  for (int bits = 0; bits < (1 << t.dimension()); ++bits) {
    std::vector<std::uint8_t> x(t.dimension());
    for (int j = 0; j < t.dimension(); ++j) x[j] = (bits >> j) & 1;
    out.push_back(oracle::walk(t, x));
  }
  return out;
}

}  // namespace

TEST_CASE("remove_trivial") {
  const DecisionTree trivial(3, split(1, leaf(0), leaf(0)));
  const DecisionTree nested(3, split(0, leaf(1), split(2, leaf(1), leaf(1))));
  CHECK(has_trivial_split(trivial));
  CHECK(has_trivial_split(nested));
  CHECK_FALSE(has_trivial_split(oracle::and_tree_f1_root()));
  const TreeSet ts = make_set({trivial, oracle::and_tree_f1_root(), nested, oracle::and_tree_f2_root()},
                              {1, 2, 3, 4});
  const TreeSet kept = remove_trivial(ts);
  CHECK(kept.size() == 2);
  CHECK(kept.objectives == std::vector<double>{2, 4});
}

TEST_CASE("dedup") {
  SUBCASE("the AND pair forms one class") {
    const DedupResult r = dedup(make_set({oracle::and_tree_f1_root(), oracle::and_tree_f2_root()}, {0.5, 0.4}));
    REQUIRE(r.classes.size() == 1);
    CHECK(r.classes[0].members == std::vector<std::size_t>{0, 1});
    CHECK(r.classes[0].representative == 1);
    CHECK(r.classes[0].key == "f1 & f2");
  }
  SUBCASE("copies collapse; ties go to the lowest index") {
    const DedupResult r = dedup(make_set({oracle::mux_tree(), oracle::mux_tree(), oracle::mux_tree()}));
    REQUIRE(r.classes.size() == 1);
    CHECK(r.classes[0].representative == 0);
  }
  SUBCASE("all depth-2 trees over three features") {
    std::vector<DecisionTree> trees;
    for (Subtree& s : all_subtrees({0, 1, 2}, 2)) trees.emplace_back(3, std::move(s));
    CHECK(trees.size() == 302);
    std::set<std::vector<int>> tables;
    for (const DecisionTree& t : trees) tables.insert(truth_vector(t));
    const TreeSet ts = make_set(trees);
    const DedupResult r = dedup(ts);
    CHECK(r.classes.size() == tables.size());
    std::size_t covered = 0;
    for (const EquivalenceClass& c : r.classes) {
      covered += c.members.size();
      for (std::size_t m : c.members) CHECK(truth_vector(trees[m]) == truth_vector(trees[c.members[0]]));
    }
    CHECK(covered == 302);
    CHECK(r.classes.size() <= remove_trivial(ts).size());
    CHECK(remove_trivial(ts).size() <= ts.size());
  }
  SUBCASE("membership does not depend on input order") {
    std::mt19937_64 rng(5);
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 60; ++i) trees.push_back(oracle::random_tree(rng, 4, 3));
    const DedupResult forward = dedup(make_set(trees));
    std::vector<std::size_t> perm(trees.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<DecisionTree> shuffled;
    for (std::size_t k : perm) shuffled.push_back(trees[k]);
    const DedupResult backward = dedup(make_set(shuffled));
    std::map<std::string, std::set<std::size_t>> a, b;
    for (const auto& c : forward.classes) a[c.key].insert(c.members.begin(), c.members.end());
    for (const auto& c : backward.classes) {
      for (std::size_t m : c.members) b[c.key].insert(perm[m]);
    }
    CHECK(a == b);
  }
  SUBCASE("over-cap trees are flagged and skipped") {
    const DecisionTree wide(4, split(0, split(1, leaf(0), leaf(1)), split(2, leaf(0), split(3, leaf(0), leaf(1)))));
    const DedupResult r = dedup(make_set({oracle::mux_tree(), wide}), 3);
    CHECK(r.over_cap == std::vector<std::size_t>{1});
    CHECK(r.classes.size() == 1);
    const nlohmann::json j = dedup_to_json(r, 2);
    CHECK(j["total"] == 2);
    CHECK(j["unique"] == 1);
    CHECK(j["classes"][0]["members"] == nlohmann::json::array({0}));
  }
}

TEST_CASE("parse_tree_set") {
  const nlohmann::json doc = nlohmann::json::parse(R"([
    {"dimension": 3, "objective": 0.25, "root": {"leaf": 0}},
    {"dimension": 3, "root": {"feature": 0, "false": {"leaf": 0}, "true": {"leaf": 1}}}])");
  const TreeSet ts = parse_tree_set(doc);
  CHECK(ts.objectives == std::vector<double>{0.25, 0.0});
  const TreeSet wrapped = parse_tree_set({{"source", "unit"}, {"trees", doc}});
  CHECK(wrapped.source == "unit");
  CHECK_THROWS_AS(parse_tree_set(nlohmann::json{{"x", 1}}), SchemaError);
  CHECK_THROWS_AS(parse_tree_set(nlohmann::json::parse(R"([{"root": {"leaf": 0}, "objective": "x"}])")),
                  SchemaError);
}

TEST_CASE("importance_distribution") {
  const Dataset data = oracle::and_dataset();
  const TreeSet pair = make_set({oracle::and_tree_f1_root(), oracle::and_tree_f2_root()}, {0.0, 0.0});
  SUBCASE("without dedup the pair gives two mass points") {
    const ImportanceDistribution d = importance_distribution(pair, data, false);
    CHECK(d.features[1] == WeightedValues{{0.125, 0.5}, {0.25, 0.5}});
    CHECK(d.features[2] == WeightedValues{{0.125, 0.5}, {0.25, 0.5}});
    CHECK(d.features[0] == WeightedValues{{0.0, 1.0}});
  }
  SUBCASE("with dedup one representative survives") {
    const ImportanceDistribution d = importance_distribution(pair, data, true);
    CHECK(d.features[1] == WeightedValues{{0.125, 1.0}});
    CHECK(d.features[2] == WeightedValues{{0.25, 1.0}});
  }
  SUBCASE("singleton is degenerate either way") {
    const TreeSet one = make_set({oracle::and_tree_f1_root()});
    CHECK(importance_distribution(one, data, false).features[1].size() == 1);
    CHECK(importance_distribution(one, data, true).features[1].size() == 1);
  }
  SUBCASE("duplicating trees is invisible after dedup") {
    std::mt19937_64 rng(40);
    Dataset d;
    d.feature_names = {"a", "b", "c", "d"};
    for (int i = 0; i < 50; ++i) {
      d.rows.push_back(oracle::random_row(rng, 4));
      d.labels.push_back(rng() & 1U);
    }
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 20; ++i) trees.push_back(oracle::random_tree(rng, 4, 3));
    const TreeSet base = make_set(trees);
    std::vector<DecisionTree> more = trees;
    more.push_back(trees[3]);
    more.push_back(trees[7]);
    const TreeSet dup = make_set(more);
    const ImportanceDistribution a = importance_distribution(base, d, true);
    const ImportanceDistribution b = importance_distribution(dup, d, true);
    CHECK(a.features == b.features);
    for (const WeightedValues& f : a.features) {
      double total = 0.0;
      for (const auto& [v, w] : f) {
        CHECK(v >= 0.0);
        total += w;
      }
      CHECK(total == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("wasserstein_1") {
  const WeightedValues zero{{0.0, 1.0}}, one{{1.0, 1.0}}, half{{0.5, 1.0}};
  const WeightedValues split_mass{{0.0, 0.5}, {1.0, 0.5}};
  CHECK(wasserstein_1(split_mass, split_mass) == 0.0);
  CHECK(wasserstein_1(zero, one) == 1.0);
  CHECK(wasserstein_1(split_mass, half) == 0.5);
  CHECK_THROWS_AS(wasserstein_1({}, one), EmptyDistribution);

  // Equal-size, equal-weight samples: mean absolute difference of order statistics.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(12), y(12);
    WeightedValues a, b;
    for (int i = 0; i < 12; ++i) {
      x[i] = static_cast<double>(rng() % 7) / 4.0;
      y[i] = static_cast<double>(rng() % 9) / 3.0;
      a.emplace_back(x[i], 1.0);
      b.emplace_back(y[i], 2.0);
    }
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double expected = 0.0;
    for (int i = 0; i < 12; ++i) expected += std::abs(x[i] - y[i]) / 12.0;
    CHECK(wasserstein_1(a, b) == doctest::Approx(expected));
    CHECK(wasserstein_1(b, a) == doctest::Approx(expected));
  }
}

TEST_CASE("permutation_importance") {
  std::mt19937_64 rng(10);
  const DecisionTree x3(3, split(2, leaf(0), leaf(1)));
  Dataset d;
  d.feature_names = {"x1", "x2", "x3"};
  for (int i = 0; i < 200; ++i) {
    d.rows.push_back(oracle::random_row(rng, 3));
    d.labels.push_back(d.rows.back()[2]);
  }
  const std::vector<double> imp = permutation_importance(x3, d, 42, 5);
  CHECK(imp[0] == 0.0);
  CHECK(imp[1] == 0.0);
  CHECK(imp[2] > 0.3);
  CHECK(permutation_importance(x3, d, 42, 5) == imp);
  CHECK_THROWS_AS(permutation_importance(x3, d, 42, 0), SchemaError);
}
