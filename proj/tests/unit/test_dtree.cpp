#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include <algorithm>

using namespace metatune;
using metatune::testing::node_sample_counts;
using metatune::testing::random_dataset;

namespace {

TrainingSample sample(std::vector<double> x, int y, double w = 1.0) { return {std::move(x), OutcomeClass(y), w}; }

std::vector<double> thresholds_of(const DecisionTreeModel &m) {
  std::vector<double> out;
  for (const auto &n : m.nodes())
    if (const auto *s = std::get_if<SplitNode>(&n))
      out.push_back(s->threshold);
  return out;
}

} // namespace

TEST_SUITE("dtree") {

TEST_CASE("balanced weights") {
  const auto w = balance_weights({sample({0}, 0), sample({0}, 0), sample({0}, 0), sample({0}, 1)});
  CHECK(w[0].weight == doctest::Approx(4.0 / 6.0));
  CHECK(w[1].weight == doctest::Approx(4.0 / 6.0));
  CHECK(w[2].weight == doctest::Approx(4.0 / 6.0));
  CHECK(w[3].weight == doctest::Approx(2.0));

  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto data = balance_weights(random_dataset(rng, 1 + rep * 3, 2));
    double sum = 0.0;
    for (const auto &s : data)
      sum += s.weight;
    CHECK(sum == doctest::Approx(static_cast<double>(data.size())));
  }
  CHECK_THROWS_AS(balance_weights({}), EmptyTrainingSet);
}

TEST_CASE("gini impurity") {
  CHECK(gini({}) == 0.0);
  CHECK(gini({5, 0, 0, 0, 0, 0}) == 0.0);
  CHECK(gini({1, 1, 0, 0, 0, 0}) == doctest::Approx(0.5));
  CHECK(gini({1, 1, 1, 1, 1, 1}) == doctest::Approx(5.0 / 6.0));
  CHECK(gini({3, 1, 0, 0, 0, 0}) == doctest::Approx(1.0 - 0.5625 - 0.0625));
  CHECK(majority_class({1, 2, 2, 0, 0, 0}).value() == 1);
  CHECK(majority_class({0, 0, 0, 0, 0, 0}).value() == 0);
}

TEST_CASE("pure data yields a single leaf") {
  std::vector<TrainingSample> data;
  for (int i = 0; i < 10; ++i)
    data.push_back(sample({double(i), double(i % 3)}, 2));
  const auto m = train(data);
  CHECK(m.nodes().size() == 1);
  CHECK(m.predict(std::vector<double>{100, 100}).value() == 2);
  CHECK(m.depth() == 0);
}

TEST_CASE("two points split at the midpoint") {
  const std::vector<TrainingSample> data{sample({0.0}, 0), sample({1.0}, 3)};
  TrainParams p{2, 1, std::nullopt, ClassWeighting::Balanced};
  const auto m = train(data, p);
  REQUIRE(m.nodes().size() == 3);
  const auto &root = std::get<SplitNode>(m.nodes()[m.root()]);
  CHECK(root.feature_index == 0);
  CHECK(root.threshold == 0.5);
  CHECK(m.predict(std::vector<double>{0.2}).value() == 0);
  CHECK(m.predict(std::vector<double>{0.9}).value() == 3);
  CHECK(m.leaf_count() == 2);
}

TEST_CASE("separable points are fit exactly") {
  std::vector<TrainingSample> data;
  for (int i = 0; i < 8; ++i)
    data.push_back(sample({double(i), double((i * 5) % 8)}, i / 2));
  TrainParams p{2, 1, std::nullopt, ClassWeighting::Balanced};
  const auto m = train(data, p);
  for (const auto &s : data)
    CHECK(m.predict(s.x) == s.y);
}

TEST_CASE("default leaf limits hold on every node") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto data = random_dataset(rng, 30, 3);
    const auto m = train(data);
    const auto counts = node_sample_counts(m, data);
    for (std::size_t id = 0; id < m.nodes().size(); ++id) {
      CHECK(counts[id] >= 3);
      if (std::holds_alternative<SplitNode>(m.nodes()[id]))
        CHECK(counts[id] >= 4);
    }
  }
}

TEST_CASE("max depth limits the tree") {
  std::mt19937_64 rng(5);
  const auto data = random_dataset(rng, 60, 3);
  for (std::size_t d : {0u, 1u, 2u, 3u}) {
    TrainParams p;
    p.max_depth = d;
    CHECK(train(data, p).depth() <= d);
  }
}

TEST_CASE("thresholds fall strictly between observed values") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const auto data = random_dataset(rng, 25, 3, 6);
    const auto m = train(data, {2, 1, std::nullopt, ClassWeighting::Balanced});
    const auto counts = node_sample_counts(m, data);
    for (std::size_t id = 0; id < m.nodes().size(); ++id) {
      const auto *s = std::get_if<SplitNode>(&m.nodes()[id]);
      if (!s)
        continue;
      // Both children receive training samples.
      CHECK(counts[s->left] > 0);
      CHECK(counts[s->right] > 0);
      CHECK(counts[s->left] + counts[s->right] == counts[id]);
    }
    if (const auto *root = std::get_if<SplitNode>(&m.nodes()[m.root()]))
      for (const auto &d : data)
        CHECK(d.x[root->feature_index] != root->threshold);
  }
}

TEST_CASE("training agrees with the brute-force reference") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    const auto data = random_dataset(rng, 4 + rep % 9, 1 + rep % 3, 3, 3);
    for (auto weighting : {ClassWeighting::Balanced, ClassWeighting::Uniform}) {
      TrainParams p{2, 1, std::nullopt, weighting};
      const auto ref = oracle::build_tree(data, p);
      const auto m = train(data, p);
      CHECK(m.leaf_count() == ref->leaves());
      for (const auto &s : data)
        CHECK(m.predict(s.x).value() == ref->predict(s.x));

      const auto root = best_root_split(data, p);
      const auto want = oracle::best_split(data, oracle::effective_weights(data, weighting),
                                           [&] {
                                             std::vector<std::size_t> all(data.size());
                                             std::iota(all.begin(), all.end(), 0);
                                             return all;
                                           }(),
                                           p, 0);
      REQUIRE(root.has_value() == want.has_value());
      if (root) {
        CHECK(root->feature_index == want->feature);
        CHECK(root->threshold == want->threshold);
        CHECK(std::abs(root->impurity - want->impurity) < 1e-9);
      }
    }
  }
}

TEST_CASE("sample order does not change the tree") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    auto data = random_dataset(rng, 40, 4);
    const auto reference = save_model(train(data));
    for (int shuffle = 0; shuffle < 3; ++shuffle) {
      std::shuffle(data.begin(), data.end(), rng);
      CHECK(save_model(train(data)) == reference);
    }
  }
}

TEST_CASE("ties go to the lowest feature index") {
  // Features 0 and 1 are identical, so every split is tied.
  std::vector<TrainingSample> data;
  for (int i = 0; i < 8; ++i)
    data.push_back(sample({double(i), double(i)}, i < 4 ? 0 : 1));
  const auto m = train(data, {2, 1, std::nullopt, ClassWeighting::Uniform});
  CHECK(std::get<SplitNode>(m.nodes()[m.root()]).feature_index == 0);
  CHECK(thresholds_of(m) == std::vector<double>{3.5});
}

TEST_CASE("model text round trip") {
  std::mt19937_64 rng(31);
  const auto data = random_dataset(rng, 80, 5, 10);
  const auto m = train(data, {2, 1, std::nullopt, ClassWeighting::Balanced});
  const auto text = save_model(m);
  const auto back = load_model(text);
  CHECK(save_model(back) == text);
  std::uniform_real_distribution<double> u(-1.0, 11.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(5);
    for (auto &v : x)
      v = u(rng);
    CHECK(back.predict(x) == m.predict(x));
  }
}

TEST_CASE("model text errors") {
  const std::string good = "lfdt 1\nfeatures 2\nnodes 3\n"
                           "node 0 split 1 0.5 1 2\n"
                           "node 1 leaf 0 1 0 0 0 0 0\n"
                           "node 2 leaf 4 0 0 0 0 2 0\n"
                           "root 0\n";
  const auto m = load_model(good);
  CHECK(m.predict(std::vector<double>{0, 1}).value() == 4);
  CHECK(save_model(m) == good);

  CHECK_THROWS_AS(load_model("lfdt 2\nfeatures 2\nnodes 1\nnode 0 leaf 0 1 0 0 0 0 0\nroot 0\n"), VersionError);

  auto line_of = [](const std::string &text) -> std::size_t {
    try {
      load_model(text);
    } catch (const FormatError &e) {
      return e.line();
    }
    return 0;
  };
  // Declared node count does not match the nodes present.
  CHECK(line_of("lfdt 1\nfeatures 2\nnodes 4\nnode 0 split 1 0.5 1 2\nnode 1 leaf 0 1 0 0 0 0 0\n"
                "node 2 leaf 4 0 0 0 0 2 0\nroot 0\n") == 7);
  CHECK(line_of("lfdt 1\nfeatures 2\nnodes 3\nnode 0 split 1 0.5 1 2\nnode 1 leaf 0 1 0 0 0 0\n"
                "node 2 leaf 4 0 0 0 0 2 0\nroot 0\n") == 5);
  CHECK(line_of("lfdt 1\nfeatures 2\nnodes 3\nnode 0 split 1 abc 1 2\nnode 1 leaf 0 1 0 0 0 0 0\n"
                "node 2 leaf 4 0 0 0 0 2 0\nroot 0\n") == 4);
  CHECK(line_of("lfdt 1\nfeatures 2\nnodes 1\nnode 0 leaf 7 1 0 0 0 0 0\nroot 0\n") == 4);
  CHECK(line_of("lfdt 1\nfeatures 2\nnodes 1\nnode 0 leaf 0 1 0 0 0 0 0\nroot 0\nextra\n") == 6);
  CHECK(line_of("model 1\n") == 1);
  // Structurally broken trees.
  CHECK_THROWS_AS(load_model("lfdt 1\nfeatures 2\nnodes 2\nnode 0 split 5 0.5 1 1\nnode 1 leaf 0 1 0 0 0 0 0\nroot 0\n"),
                  FormatError);
  CHECK_THROWS_AS(load_model("lfdt 1\nfeatures 2\nnodes 2\nnode 0 leaf 0 1 0 0 0 0 0\nnode 1 leaf 0 1 0 0 0 0 0\nroot 0\n"),
                  FormatError);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(train(std::vector<TrainingSample>{}), EmptyTrainingSet);
  CHECK_THROWS_AS(train(std::vector<TrainingSample>{sample({1, 2}, 0), sample({1}, 1)}), DimensionMismatch);
  const auto m = train(std::vector<TrainingSample>{sample({1, 2}, 0)});
  CHECK_THROWS_AS(m.predict(std::vector<double>{1}), DimensionMismatch);
  CHECK(predict_class(m, std::vector<double>{5, 5}).value() == 0);
}

} // TEST_SUITE
