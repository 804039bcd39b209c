#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pgdetect/container.hpp"
#include "pgdetect/dataset.hpp"
#include "pgdetect/network.hpp"
#include "pgdetect/rng.hpp"
#include "pgdetect/tensor.hpp"
#include "pgdetect/training.hpp"

namespace pgd {

/// Common scoring surface for PGN4 and the five baselines. Scores are in [0, 1].
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string method() const = 0;
  virtual std::vector<double> score(const Matrix& x) const = 0;
  virtual Container to_container() const = 0;

  void save(const std::filesystem::path& path) const { save_container(to_container(), path); }
};

/// Dispatches on the container's "method" field.
std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path);

// ------------------------------------------------------------------ trees

struct TreeNode {
  // Internal: x[feature] <= threshold goes left. Leaf: left = right = -1.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // positive fraction of training rows reaching the node

  bool is_leaf() const { return left < 0; }
};

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

struct TreeConfig {
  std::size_t max_depth = 6;
  std::size_t min_leaf = 1;
  /// Features tried per split; 0 means all of them.
  std::size_t features_per_split = 0;
};

/// CART with Gini impurity. Candidate thresholds are midpoints between
/// consecutive distinct values; ties keep the first (feature, threshold) found.
class DecisionTree final : public Classifier {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features)
      : nodes_(std::move(nodes)), n_features_(n_features) {}

  std::string method() const override { return "dt"; }
  std::vector<double> score(const Matrix& x) const override;
  Container to_container() const override;

  double score_row(std::span<const double> row) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t depth() const;

  static DecisionTree from_payload(std::span<const double> payload, std::size_t n_nodes,
                                   std::size_t n_features);
  void append_payload(std::vector<double>& out) const;

  friend bool operator==(const DecisionTree& a, const DecisionTree& b);

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

/// Trains on the rows listed in `rows` (duplicates allowed, as in a bootstrap).
/// `rng` is consulted only when features_per_split subsamples.
DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::vector<std::size_t> rows,
                      const TreeConfig& config, Rng* rng = nullptr);

DecisionTree train_decision_tree(const DatasetTable& train, std::size_t max_depth = 6,
                                 std::size_t min_leaf = 1);

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 6;
  std::size_t min_leaf = 1;
  bool bootstrap = true;
  bool subsample_features = true;  // ceil(sqrt(F)) features per split
};

class RandomForest final : public Classifier {
 public:
  explicit RandomForest(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {}

  std::string method() const override { return "rf"; }
  std::vector<double> score(const Matrix& x) const override;
  Container to_container() const override;
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
};

/// Tree k draws from Rng(derive_seed(seed, k)).
RandomForest train_random_forest(const DatasetTable& train, const ForestConfig& config,
                                 std::uint64_t seed);

// ------------------------------------------------------------------ boosting

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  /// +1: predict +1 when x > threshold; -1: predict +1 when x <= threshold.
  int polarity = 1;
  double alpha = 0.0;
  double weighted_error = 0.0;

  int predict(std::span<const double> row) const;
};

struct AdaBoostRound {
  Stump stump;
  std::vector<double> weights_before;  // sample weights the stump was fit on
};

/// Discrete AdaBoost over depth-1 stumps; score = sigmoid(sum of alpha * h(x)).
class AdaBoost final : public Classifier {
 public:
  explicit AdaBoost(std::vector<Stump> stumps) : stumps_(std::move(stumps)) {}

  std::string method() const override { return "ada"; }
  std::vector<double> score(const Matrix& x) const override;
  Container to_container() const override;
  double margin(std::span<const double> row) const;
  const std::vector<Stump>& stumps() const { return stumps_; }

 private:
  std::vector<Stump> stumps_;
};

/// Minimum weighted-error stump for labels in {-1, +1}.
Stump best_stump(const Matrix& x, std::span<const int> signs, std::span<const double> weights);

/// `trace`, when given, receives the weights and stump of every retained round.
AdaBoost train_adaboost(const DatasetTable& train, std::size_t n_rounds,
                        std::vector<AdaBoostRound>* trace = nullptr);

// ------------------------------------------------------------------ svm

struct SvmConfig {
  double lambda = 1e-3;
  std::size_t epochs = 50;
};

/// Linear SVM; the bias is the last weight, paired with a constant 1 feature.
class LinearSvm final : public Classifier {
 public:
  explicit LinearSvm(std::vector<double> weights) : weights_(std::move(weights)) {}

  std::string method() const override { return "svm"; }
  std::vector<double> score(const Matrix& x) const override;
  Container to_container() const override;
  double margin(std::span<const double> row) const;
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
};

struct SvmTrace {
  /// Regularized hinge objective of the running-average iterate after each epoch.
  std::vector<double> objective;
};

/// Pegasos-style stochastic subgradient descent with step 1/(lambda t).
/// The returned model is the average of all iterates.
LinearSvm train_linear_svm(const DatasetTable& train, const SvmConfig& config, std::uint64_t seed,
                           SvmTrace* trace = nullptr);

double svm_objective(const std::vector<double>& weights, const DatasetTable& data, double lambda);

// ------------------------------------------------------------------ networks

/// PGN4 or MLP wrapped as a Classifier; rows are fed as (1 x F) signals.
class NetworkClassifier final : public Classifier {
 public:
  explicit NetworkClassifier(Network net) : net_(std::move(net)) {}

  std::string method() const override;
  std::vector<double> score(const Matrix& x) const override;
  Container to_container() const override;
  const Network& network() const { return net_; }
  Network& network() { return net_; }

 private:
  mutable Network net_;
};

struct NetworkFit {
  NetworkClassifier model;
  TrainHistory history;
};

/// One hidden layer of 128 ReLU units, trained with the shared Adam/BCE loop.
NetworkFit train_mlp(const DatasetTable& train, const DatasetTable& valid,
                     const TrainConfig& config, std::size_t hidden_units = 128);

NetworkFit train_pgn4(const DatasetTable& train, const DatasetTable& valid,
                      const TrainConfig& config, ActivationKind activation = ActivationKind::Relu,
                      double dropout_rate = 0.0);

}  // namespace pgd
