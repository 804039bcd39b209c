#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "pgdetect/baselines.hpp"

using namespace pgd;

namespace {

double train_accuracy(const Classifier& c, const DatasetTable& t) {
  const auto s = c.score(t.features);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < s.size(); ++i) ok += (s[i] >= 0.5) == (t.labels[i] == 1);
  return static_cast<double>(ok) / static_cast<double>(s.size());
}

DatasetTable table_1d(const std::vector<double>& x, const std::vector<int>& y) {
  DatasetTable t;
  t.feature_names = {"x"};
  t.features = Matrix(x.size(), 1, x);
  t.labels = y;
  return t;
}

DatasetTable xor_table() {
  DatasetTable t;
  t.feature_names = {"a", "b"};
  t.features = Matrix(4, 2, {0, 0, 0, 1, 1, 0, 1, 1});
  t.labels = {0, 1, 1, 0};
  return t;
}

/// Weighted error of the best threshold/polarity on one feature, by enumeration.
double brute_stump_error(const DatasetTable& t, const std::vector<double>& w) {
  double best = 1.0;
  for (std::size_t f = 0; f < t.cols(); ++f) {
    auto col = t.features.column(f);
    col.push_back(-1e300);
    for (double thr : col) {
      for (int pol : {1, -1}) {
        double err = 0;
        for (std::size_t i = 0; i < t.rows(); ++i) {
          const int h = (t.features(i, f) > thr) == (pol == 1) ? 1 : 0;
          if (h != t.labels[i]) err += w[i];
        }
        best = std::min(best, err);
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("decision tree examples") {
  const auto line = table_1d({-3, -2, -1, 1, 2, 3}, {0, 0, 0, 1, 1, 1});
  const auto dt = train_decision_tree(line);
  CHECK(dt.depth() == 1);
  CHECK(dt.nodes()[0].threshold == 0.0);
  CHECK(train_accuracy(dt, line) == 1.0);

  const auto pure = train_decision_tree(table_1d({1, 2, 3}, {1, 1, 1}));
  CHECK(pure.nodes().size() == 1);
  CHECK(pure.score(Matrix(1, 1, {9}))[0] == 1.0);

  const auto x = xor_table();
  CHECK(train_accuracy(train_decision_tree(x, 2), x) == 1.0);
  CHECK_THROWS(train_decision_tree(DatasetTable{}));
}

TEST_CASE("unlimited tree fits noisy data without conflicting duplicates") {
  Rng rng(3);
  DatasetTable t;
  t.feature_names = {"a", "b", "c"};
  t.features = Matrix(120, 3, rng.normal_vector(360, 0, 1));
  for (std::size_t i = 0; i < 120; ++i) t.labels.push_back(rng.uniform() < 0.5);
  CHECK(train_accuracy(train_decision_tree(t, kUnlimitedDepth, 1), t) == 1.0);
}

TEST_CASE("degenerate forest equals the decision tree") {
  const auto t = fixture::separable_table(60, 4, 5);
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.bootstrap = false;
  cfg.subsample_features = false;
  const auto rf = train_random_forest(t, cfg, 99);
  CHECK(rf.trees()[0] == train_decision_tree(t, cfg.max_depth, cfg.min_leaf));
}

TEST_CASE("random forest: separable accuracy and determinism") {
  const auto t = fixture::separable_table(40, 3, 2);
  ForestConfig cfg;
  cfg.n_trees = 25;
  const auto a = train_random_forest(t, cfg, 7);
  CHECK(train_accuracy(a, t) == 1.0);
  const auto b = train_random_forest(t, cfg, 7);
  REQUIRE(a.trees().size() == b.trees().size());
  for (std::size_t k = 0; k < a.trees().size(); ++k) CHECK(a.trees()[k] == b.trees()[k]);
  for (double s : a.score(t.features)) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("adaboost: one stump separates 1-D data") {
  const auto line = table_1d({-3, -2, -1, 1, 2, 3}, {0, 0, 0, 1, 1, 1});
  const auto ada = train_adaboost(line, 20);
  CHECK(ada.stumps().size() == 1);
  CHECK(train_accuracy(ada, line) == 1.0);
  CHECK_THROWS(train_adaboost(table_1d({1, 2}, {1, 1}), 5));
}

TEST_CASE("adaboost weight trace") {
  const auto t = table_1d({1, 2, 3, 4, 5, 6, 7, 8}, {0, 0, 1, 1, 0, 1, 1, 0});
  std::vector<AdaBoostRound> trace;
  const auto ada = train_adaboost(t, 20, &trace);
  REQUIRE(trace.size() >= 3);

  // Round 1 by hand: uniform weights 1/8, best stump "x > 2.5" misses x = 5 and 8.
  for (double w : trace[0].weights_before) CHECK(w == doctest::Approx(0.125));
  CHECK(trace[0].stump.weighted_error == doctest::Approx(0.25));
  CHECK(trace[0].stump.alpha == doctest::Approx(0.5 * std::log(3.0)));
  // Misclassified rows carry half the mass afterwards: 1/4 each, the rest 1/12.
  CHECK(trace[1].weights_before[4] == doctest::Approx(0.25));
  CHECK(trace[1].weights_before[7] == doctest::Approx(0.25));
  CHECK(trace[1].weights_before[0] == doctest::Approx(1.0 / 12.0));

  for (std::size_t r = 0; r < 3; ++r) {
    const auto& w = trace[r].weights_before;
    const auto& s = trace[r].stump;
    CHECK(s.weighted_error < 0.5);
    CHECK(s.weighted_error == doctest::Approx(brute_stump_error(t, w)).epsilon(1e-12));
    CHECK(s.alpha == doctest::Approx(0.5 * std::log((1 - s.weighted_error) / s.weighted_error)));
    std::vector<double> next(w.size());
    double z = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const int y = t.labels[i] == 1 ? 1 : -1;
      next[i] = w[i] * std::exp(-s.alpha * y * s.predict(t.features.row(i)));
      z += next[i];
    }
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(trace[r + 1].weights_before[i] == doctest::Approx(next[i] / z));
  }
  for (const auto& s : ada.stumps()) CHECK(s.weighted_error < 0.5);
}

TEST_CASE("linear svm") {
  const auto t = fixture::separable_table(20, 2, 4);
  SvmConfig cfg;
  const auto svm = train_linear_svm(t, cfg, 3);
  CHECK(train_accuracy(svm, t) == 1.0);
  CHECK(svm.weights().size() == 3);

  // Averaged iterates only settle once lambda * steps is large; check the trace there.
  SvmConfig settled;
  settled.lambda = 0.1;
  SvmTrace trace;
  train_linear_svm(t, settled, 3, &trace);
  REQUIRE(trace.objective.size() == settled.epochs);
  for (std::size_t e = 1; e < trace.objective.size(); ++e) {
    CHECK(trace.objective[e] <= trace.objective[e - 1] * (1 + 1e-9) + 1e-12);
  }

  auto flipped = t;
  for (int& y : flipped.labels) y = 1 - y;
  const auto neg = train_linear_svm(flipped, cfg, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(neg.weights()[i] == doctest::Approx(-svm.weights()[i]).epsilon(1e-12));
  CHECK_THROWS(train_linear_svm(table_1d({1, 2}, {0, 0}), cfg, 1));
}

TEST_CASE("mlp baseline") {
  Rng rng(1);
  const auto row = rng.normal_vector(16, 0, 1);
  DatasetTable dup;
  for (std::size_t c = 0; c < 16; ++c) dup.feature_names.push_back("f" + std::to_string(c));
  dup.features = Matrix(32, 16);
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 0; c < 16; ++c) dup.features(r, c) = row[c];
    dup.labels.push_back(1);
  }
  TrainConfig cfg;
  cfg.epochs = 1000;
  cfg.seed = 1;
  const auto fit = train_mlp(dup, DatasetTable{}, cfg);
  CHECK(fit.history.epochs.back().train_loss < 0.01);

  auto again = train_mlp(dup, DatasetTable{}, cfg);
  auto first = fit.model;
  const auto p1 = first.network().params(), p2 = again.model.network().params();
  for (std::size_t k = 0; k < p1.size(); ++k) CHECK(p1[k]->value == p2[k]->value);
  CHECK(fit.model.method() == "nn");

  Rng init(2);
  const auto net = mlp_init(6, init);
  const Tensor3 x(4, 1, 6, init.normal_vector(24, 0, 1));
  CHECK(gradient_check(net, x, {1, 0, 0, 1}, 1e-5, 1e-6).passed);
}

TEST_CASE("every baseline separates the 20-point fixture") {
  const auto t = fixture::separable_table(20, 2);
  TrainConfig nn;
  nn.epochs = 100;
  nn.learning_rate = 1e-2;
  nn.batch_size = 8;
  ForestConfig rf;
  rf.n_trees = 25;
  CHECK(train_accuracy(train_decision_tree(t), t) == 1.0);
  CHECK(train_accuracy(train_random_forest(t, rf, 1), t) == 1.0);
  CHECK(train_accuracy(train_adaboost(t, 100), t) == 1.0);
  CHECK(train_accuracy(train_linear_svm(t, SvmConfig{}, 1), t) == 1.0);
  CHECK(train_accuracy(train_mlp(t, DatasetTable{}, nn).model, t) == 1.0);
}

TEST_CASE("baselines round-trip through the model container") {
  const auto dir = std::filesystem::path(PGDETECT_TEST_TMP) / "baselines";
  std::filesystem::create_directories(dir);
  const auto t = fixture::separable_table(30, 5, 8);
  TrainConfig nn;
  nn.epochs = 3;
  ForestConfig rf;
  rf.n_trees = 5;

  std::vector<std::unique_ptr<Classifier>> models;
  models.push_back(std::make_unique<DecisionTree>(train_decision_tree(t)));
  models.push_back(std::make_unique<RandomForest>(train_random_forest(t, rf, 2)));
  models.push_back(std::make_unique<AdaBoost>(train_adaboost(t, 10)));
  models.push_back(std::make_unique<LinearSvm>(train_linear_svm(t, SvmConfig{}, 2)));
  models.push_back(std::make_unique<NetworkClassifier>(train_mlp(t, DatasetTable{}, nn).model));
  models.push_back(std::make_unique<NetworkClassifier>(train_pgn4(t, DatasetTable{}, nn).model));
  for (const auto& m : models) {
    const auto path = dir / (m->method() + ".mdl");
    m->save(path);
    const auto back = load_classifier(path);
    CHECK(back->method() == m->method());
    CHECK(back->score(t.features) == m->score(t.features));
  }
}
