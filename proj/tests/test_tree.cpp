#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "treednf/errors.hpp"
#include "treednf/tree.hpp"

using namespace treednf;

TEST_CASE("parse_tree") {
  SUBCASE("AND tree document") {
    const DecisionTree t = parse_tree(std::string(R"({
      "dimension": 3, "feature_names": ["f0", "f1", "f2"],
      "root": {"feature": 1, "false": {"leaf": 0},
               "true": {"feature": 2, "false": {"leaf": 0}, "true": {"leaf": 1}}}})"));
    CHECK(t.nodes().size() - t.leaf_count() == 2);
    CHECK(t.used_features() == std::vector<int>{1, 2});
    CHECK(tree_to_json(t) == tree_to_json(oracle::and_tree_f1_root()));
  }
  SUBCASE("single leaf") {
    const DecisionTree t = parse_tree(std::string(R"({"dimension": 2, "root": {"leaf": 1}})"));
    CHECK(t.is_constant());
    CHECK(predict_traverse(t, std::vector<std::uint8_t>{0, 1}) == 1);
  }
  SUBCASE("dimension inferred when absent") {
    const DecisionTree t = parse_tree(std::string(
        R"({"root": {"feature": 4, "false": {"leaf": 0}, "true": {"leaf": 1}}})"));
    CHECK(t.dimension() == 5);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_tree(std::string(R"({"dimension": 3, "root": {"feature": 1,
        "false": {"leaf": 0}, "true": {"feature": 1, "false": {"leaf": 0}, "true": {"leaf": 1}}}})")),
                    RepeatedSplitOnPath);
    CHECK_THROWS_AS(parse_tree(std::string(R"({"dimension": 2, "root": {"feature": 2,
        "false": {"leaf": 0}, "true": {"leaf": 1}}})")),
                    UnknownFeatureIndex);
    CHECK_THROWS_AS(parse_tree(std::string(R"({"dimension": 2, "root": {"leaf": 2}})")), SchemaError);
    CHECK_THROWS_AS(parse_tree(std::string(R"({"dimension": 2, "root": {"feature": 0,
        "false": {"leaf": 0}}})")),
                    SchemaError);
    CHECK_THROWS_AS(parse_tree(std::string(R"({"dimension": 2})")), SchemaError);
    CHECK_THROWS_AS(parse_tree(std::string("{not json")), SchemaError);
    CHECK_THROWS_AS(parse_tree(std::string(R"({"dimension": 2, "feature_names": ["a"],
        "root": {"leaf": 0}})")),
                    SchemaError);
  }
  SUBCASE("the same feature on sibling branches is fine") {
    CHECK_NOTHROW(oracle::and_tree_f1_root());
    CHECK_NOTHROW(DecisionTree(3, split(0, split(1, leaf(0), leaf(1)), split(1, leaf(1), leaf(0)))));
  }
}

TEST_CASE("json round trip preserves structure") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const DecisionTree t = oracle::random_tree(rng, 6, 4);
    const DecisionTree back = parse_tree(tree_to_json(t).dump());
    CHECK(tree_to_json(back) == tree_to_json(t));
  }
}

TEST_CASE("predict_traverse") {
  const DecisionTree and_tree = oracle::and_tree_f1_root();
  CHECK(predict_traverse(and_tree, std::vector<std::uint8_t>{0, 1, 1}) == 1);
  CHECK(predict_traverse(and_tree, std::vector<std::uint8_t>{0, 0, 1}) == 0);
  const DecisionTree mux = oracle::mux_tree();
  CHECK(predict_traverse(mux, std::vector<std::uint8_t>{0, 0, 0, 1}) == 1);
  CHECK(predict_traverse(mux, std::vector<std::uint8_t>{0, 0, 1, 1}) == 1);
  CHECK_THROWS_AS(predict_traverse(and_tree, std::vector<std::uint8_t>{1, 1}), DimensionMismatch);
}

TEST_CASE("leaves_as_terms") {
  LeafTerms f1 = leaves_as_terms(oracle::and_tree_f1_root());
  CHECK(f1.positive == std::vector<Term>{Term{pos(1), pos(2)}});
  CHECK(f1.negative == std::vector<Term>{Term{neg(1)}, Term{pos(1), neg(2)}});

  LeafTerms c = leaves_as_terms(DecisionTree(2, leaf(1)));
  CHECK(c.positive == std::vector<Term>{Term{}});
  CHECK(c.negative.empty());

  LeafTerms f2 = leaves_as_terms(oracle::mux_tree());
  CHECK(f2.positive == std::vector<Term>{Term{neg(1), pos(3)}, Term{pos(1), pos(2)}});
  CHECK(f2.negative == std::vector<Term>{Term{neg(1), neg(3)}, Term{pos(1), neg(2)}});
}

TEST_CASE("leaf terms partition the input space") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const DecisionTree t = oracle::random_tree(rng, 6, 4);
    const LeafTerms terms = leaves_as_terms(t);
    std::vector<std::uint8_t> x(6);
    for (int bits = 0; bits < 64; ++bits) {
      for (int j = 0; j < 6; ++j) x[j] = (bits >> j) & 1;
      int hits = 0, label = -1;
      for (const Term& p : terms.positive) {
        if (p.evaluate(x)) ++hits, label = 1;
      }
      for (const Term& n : terms.negative) {
        if (n.evaluate(x)) ++hits, label = 0;
      }
      CHECK(hits == 1);
      CHECK(label == predict_traverse(t, x));
    }
  }
}

TEST_CASE("gini_importance") {
  const Dataset data = oracle::and_dataset();
  SUBCASE("deeper split is twice the root in both orders") {
    const std::vector<double> left = gini_importance(oracle::and_tree_f1_root(), data);
    CHECK(left[1] == 0.125);
    CHECK(left[2] == 0.25);
    CHECK(left[2] / left[1] == 2.0);
    CHECK(left[0] == 0.0);
    const std::vector<double> right = gini_importance(oracle::and_tree_f2_root(), data);
    CHECK(right[1] / right[2] == 2.0);
  }
  SUBCASE("constant tree") {
    CHECK(gini_importance(DecisionTree(3, leaf(0)), data) == std::vector<double>(3, 0.0));
  }
  SUBCASE("unreached nodes contribute nothing") {
    Dataset only_zero = data;
    only_zero.rows = {{0, 0, 0}, {0, 0, 1}};
    only_zero.labels = {0, 0};
    const std::vector<double> imp = gini_importance(oracle::and_tree_f1_root(), only_zero);
    CHECK(imp == std::vector<double>(3, 0.0));
  }
  SUBCASE("errors") {
    Dataset empty = data;
    empty.rows.clear();
    empty.labels.clear();
    CHECK_THROWS_AS(gini_importance(oracle::and_tree_f1_root(), empty), EmptyDataset);
    Dataset wide = data;
    wide.feature_names.push_back("extra");
    CHECK_THROWS_AS(gini_importance(oracle::and_tree_f1_root(), wide), DimensionMismatch);
  }
  SUBCASE("non-negative, zero off-tree") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 50; ++i) {
      const DecisionTree t = oracle::random_tree(rng, 5, 3);
      Dataset d;
      d.feature_names = {"a", "b", "c", "d", "e"};
      for (int r = 0; r < 40; ++r) {
        d.rows.push_back(oracle::random_row(rng, 5));
        d.labels.push_back(rng() & 1U);
      }
      const std::vector<double> imp = gini_importance(t, d);
      for (int j = 0; j < 5; ++j) {
        CHECK(imp[j] >= 0.0);
        const auto& used = t.used_features();
        if (std::find(used.begin(), used.end(), j) == used.end()) CHECK(imp[j] == 0.0);
      }
    }
  }
}

TEST_CASE("csv datasets") {
  const std::string text = "a,b,label\n0,1,1\r\n1,NA,0\n\n";
  const MaskedDataset m = parse_masked_csv(text);
  CHECK(m.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(m.rows[1][1] == Tri::na);
  CHECK(m.labels == std::vector<std::uint8_t>{1, 0});
  CHECK(masked_to_csv(m) == "a,b,label\n0,1,1\n1,NA,0\n");
  CHECK_THROWS_AS(parse_dataset_csv(text), SchemaError);
  CHECK_THROWS_AS(parse_masked_csv("a,b\n0,1\n"), SchemaError);
  CHECK_THROWS_AS(parse_masked_csv("a,label\n2,1\n"), SchemaError);
  CHECK_THROWS_AS(parse_masked_csv("a,label\n1\n"), SchemaError);

  // Label column may sit anywhere.
  const Dataset d = parse_dataset_csv("label,x,y\n1,0,1\n0,1,1\n");
  CHECK(d.rows[0] == std::vector<std::uint8_t>{0, 1});
  CHECK(d.labels == std::vector<std::uint8_t>{1, 0});
  CHECK(dataset_to_csv(d) == "x,y,label\n0,1,1\n1,1,0\n");
}

TEST_CASE("group maps") {
  Dataset d = parse_dataset_csv("age<=5,age<=10,priors<=1,label\n1,1,0,1\n");
  attach_group_map(d, nlohmann::json{{"0", "age"}, {"1", "age"}, {"2", "priors"}});
  CHECK(*d.groups == std::vector<int>{0, 0, 1});
  CHECK(d.group_names == std::vector<std::string>{"age", "priors"});
  CHECK_NOTHROW(d.validate());
  CHECK(group_map_to_json(d) == nlohmann::json{{"0", "age"}, {"1", "age"}, {"2", "priors"}});
  CHECK_THROWS_AS(attach_group_map(d, nlohmann::json{{"0", "age"}}), SchemaError);
  CHECK_THROWS_AS(attach_group_map(d, nlohmann::json{{"0", "a"}, {"1", "a"}, {"2", "b"}, {"7", "c"}}),
                  UnknownFeatureIndex);
  CHECK_THROWS_AS(attach_group_map(d, nlohmann::json{{"x", "a"}}), SchemaError);
}
