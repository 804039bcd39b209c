#include "pgdetect/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pgd {

using nlohmann::json;

namespace {

double gini_sum(double n, double pos) {
  // n * gini, so that child contributions add without reweighting.
  if (n == 0.0) return 0.0;
  const double p = pos / n;
  return n * 2.0 * p * (1.0 - p);
}

void require_both_classes(const DatasetTable& t, const char* who) {
  const std::size_t pos = t.positives();
  if (pos == 0) throw std::invalid_argument(std::string(who) + ": training data has no positive (1) labels");
  if (pos == t.rows()) throw std::invalid_argument(std::string(who) + ": training data has no negative (0) labels");
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, const TreeConfig& config, Rng* rng)
      : x_(x), y_(y), config_(config), rng_(rng) {}

  int build(std::vector<std::size_t> rows, std::size_t depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::size_t pos = 0;
    for (auto r : rows) pos += (y_[r] == 1);
    nodes_[index].value = rows.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(rows.size());

    const bool pure = pos == 0 || pos == rows.size();
    if (pure || depth >= config_.max_depth || rows.size() < 2 * config_.min_leaf) return index;
    const SplitChoice split = best_split(rows, pos);
    if (!split.found) return index;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (x_(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    nodes_[index].feature = static_cast<int>(split.feature);
    nodes_[index].threshold = split.threshold;
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  std::vector<std::size_t> candidate_features() {
    const std::size_t f = x_.cols();
    std::vector<std::size_t> all(f);
    std::iota(all.begin(), all.end(), 0);
    const std::size_t k = config_.features_per_split;
    if (k == 0 || k >= f || rng_ == nullptr) return all;
    // Partial Fisher-Yates, then ascending order for deterministic tie-breaks.
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_->below(f - i));
      std::swap(all[i], all[j]);
    }
    all.resize(k);
    std::sort(all.begin(), all.end());
    return all;
  }

  SplitChoice best_split(const std::vector<std::size_t>& rows, std::size_t pos_total) {
    SplitChoice best;
    const double n = static_cast<double>(rows.size());
    std::vector<std::pair<double, int>> column(rows.size());
    for (std::size_t feature : candidate_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x_(rows[i], feature), y_[rows[i]]};
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = column.size() - n_left;
        if (n_left < config_.min_leaf || n_right < config_.min_leaf) continue;
        const double impurity =
            gini_sum(static_cast<double>(n_left), left_pos) +
            gini_sum(static_cast<double>(n_right), static_cast<double>(pos_total) - left_pos);
        if (!best.found || impurity < best.impurity - 1e-12 * n) {
          best.found = true;
          best.feature = feature;
          best.threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const int> y_;
  TreeConfig config_;
  Rng* rng_;
  std::vector<TreeNode> nodes_;
};

Matrix with_bias_column(const Matrix& x) {
  Matrix out(x.rows(), x.cols() + 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto src = x.row(r);
    auto dst = out.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    dst[x.cols()] = 1.0;
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ DecisionTree

double DecisionTree::score_row(std::span<const double> row) const {
  if (nodes_.empty()) throw std::logic_error("DecisionTree: empty tree");
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].value;
}

std::vector<double> DecisionTree::score(const Matrix& x) const {
  if (x.cols() != n_features_) {
    throw std::invalid_argument("DecisionTree: input has " + std::to_string(x.cols()) +
                                " features, model expects " + std::to_string(n_features_));
  }
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = score_row(x.row(r));
  return out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

void DecisionTree::append_payload(std::vector<double>& out) const {
  for (const auto& n : nodes_) {
    out.push_back(n.feature);
    out.push_back(n.threshold);
    out.push_back(n.left);
    out.push_back(n.right);
    out.push_back(n.value);
  }
}

DecisionTree DecisionTree::from_payload(std::span<const double> payload, std::size_t n_nodes,
                                        std::size_t n_features) {
  if (payload.size() < n_nodes * 5) throw ContainerError("tree payload too short");
  std::vector<TreeNode> nodes(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double* p = payload.data() + i * 5;
    nodes[i] = {static_cast<int>(p[0]), p[1], static_cast<int>(p[2]), static_cast<int>(p[3]), p[4]};
    const auto& n = nodes[i];
    const bool bad_child = !n.is_leaf() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                                            n.left >= static_cast<int>(n_nodes) ||
                                            n.right >= static_cast<int>(n_nodes) ||
                                            n.feature < 0 || n.feature >= static_cast<int>(n_features));
    if (bad_child) throw ContainerError("tree payload has an invalid node");
  }
  return DecisionTree(std::move(nodes), n_features);
}

Container DecisionTree::to_container() const {
  Container c;
  c.header = {{"method", "dt"}, {"n_features", n_features_}, {"n_nodes", nodes_.size()}};
  append_payload(c.payload);
  return c;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
  if (a.n_features_ != b.n_features_ || a.nodes_.size() != b.nodes_.size()) return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const auto& x = a.nodes_[i];
    const auto& y = b.nodes_[i];
    if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left ||
        x.right != y.right || x.value != y.value) {
      return false;
    }
  }
  return true;
}

DecisionTree fit_tree(const Matrix& x, std::span<const int> y, std::vector<std::size_t> rows,
                      const TreeConfig& config, Rng* rng) {
  if (rows.empty()) throw std::invalid_argument("fit_tree: no training rows");
  if (config.min_leaf < 1) throw std::invalid_argument("fit_tree: min_leaf must be >= 1");
  TreeBuilder builder(x, y, config, rng);
  builder.build(std::move(rows), 0);
  return DecisionTree(builder.take(), x.cols());
}

DecisionTree train_decision_tree(const DatasetTable& train, std::size_t max_depth,
                                 std::size_t min_leaf) {
  if (train.rows() == 0) throw std::invalid_argument("train_decision_tree: empty training set");
  std::vector<std::size_t> rows(train.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return fit_tree(train.features, train.labels, std::move(rows), {max_depth, min_leaf, 0});
}

// ------------------------------------------------------------------ RandomForest

std::vector<double> RandomForest::score(const Matrix& x) const {
  std::vector<double> out(x.rows(), 0.0);
  for (const auto& tree : trees_) {
    const auto s = tree.score(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s[i];
  }
  for (auto& v : out) v /= static_cast<double>(trees_.size());
  return out;
}

Container RandomForest::to_container() const {
  Container c;
  json sizes = json::array();
  for (const auto& t : trees_) {
    sizes.push_back(t.nodes().size());
    t.append_payload(c.payload);
  }
  c.header = {{"method", "rf"},
              {"n_features", trees_.empty() ? 0 : trees_.front().n_features()},
              {"tree_sizes", sizes}};
  return c;
}

RandomForest train_random_forest(const DatasetTable& train, const ForestConfig& config,
                                 std::uint64_t seed) {
  if (config.n_trees < 1) throw std::invalid_argument("train_random_forest: n_trees must be >= 1");
  if (train.rows() == 0) throw std::invalid_argument("train_random_forest: empty training set");
  const std::size_t n = train.rows();
  const std::size_t f = train.cols();
  TreeConfig tree_config{config.max_depth, config.min_leaf, 0};
  if (config.subsample_features) {
    tree_config.features_per_split =
        static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(f))));
  }
  std::vector<DecisionTree> trees;
  trees.reserve(config.n_trees);
  for (std::size_t k = 0; k < config.n_trees; ++k) {
    Rng rng(derive_seed(seed, k));
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees.push_back(fit_tree(train.features, train.labels, std::move(rows), tree_config, &rng));
  }
  return RandomForest(std::move(trees));
}

// ------------------------------------------------------------------ AdaBoost

int Stump::predict(std::span<const double> row) const {
  const bool above = row[feature] > threshold;
  return (polarity > 0) == above ? 1 : -1;
}

Stump best_stump(const Matrix& x, std::span<const int> signs, std::span<const double> weights) {
  const std::size_t n = x.rows();
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  Stump best;
  bool found = false;
  std::vector<std::size_t> order(n);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    // Threshold below every value: polarity +1 predicts +1 everywhere.
    double pos_below = 0.0;  // weight of +1 rows with x <= threshold
    double neg_below = 0.0;
    double neg_total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (signs[i] < 0) neg_total += weights[i];
    auto consider = [&](double threshold) {
      // polarity +1 errs on +1 rows below and -1 rows above.
      const double err_plus = (pos_below + (neg_total - neg_below)) / total;
      const double err_minus = 1.0 - err_plus;
      const double err = std::min(err_plus, err_minus);
      if (!found || err < best.weighted_error - 1e-15) {
        found = true;
        best.feature = f;
        best.threshold = threshold;
        best.polarity = err_plus <= err_minus ? 1 : -1;
        best.weighted_error = err;
      }
    };
    consider(x(order[0], f) - 1.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const std::size_t i = order[k];
      (signs[i] > 0 ? pos_below : neg_below) += weights[i];
      const double a = x(i, f);
      const double b = x(order[k + 1], f);
      if (a == b) continue;
      consider(a + (b - a) / 2.0);
    }
  }
  return best;
}

double AdaBoost::margin(std::span<const double> row) const {
  double m = 0.0;
  for (const auto& s : stumps_) m += s.alpha * s.predict(row);
  return m;
}

std::vector<double> AdaBoost::score(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = sigmoid(margin(x.row(r)));
  return out;
}

Container AdaBoost::to_container() const {
  Container c;
  c.header = {{"method", "ada"}, {"n_stumps", stumps_.size()}};
  for (const auto& s : stumps_) {
    c.payload.insert(c.payload.end(), {static_cast<double>(s.feature), s.threshold,
                                       static_cast<double>(s.polarity), s.alpha, s.weighted_error});
  }
  return c;
}

AdaBoost train_adaboost(const DatasetTable& train, std::size_t n_rounds,
                        std::vector<AdaBoostRound>* trace) {
  if (n_rounds < 1) throw std::invalid_argument("train_adaboost: n_rounds must be >= 1");
  require_both_classes(train, "train_adaboost");
  const std::size_t n = train.rows();
  std::vector<int> signs(n);
  for (std::size_t i = 0; i < n; ++i) signs[i] = train.labels[i] == 1 ? 1 : -1;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<Stump> stumps;
  constexpr double kMinError = 1e-10;
  for (std::size_t round = 0; round < n_rounds; ++round) {
    Stump s = best_stump(train.features, signs, w);
    if (s.weighted_error >= 0.5) break;
    const double err = std::max(s.weighted_error, kMinError);
    s.alpha = 0.5 * std::log((1.0 - err) / err);
    if (trace) trace->push_back({s, w});
    stumps.push_back(s);
    if (s.weighted_error <= kMinError) break;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(-s.alpha * signs[i] * s.predict(train.features.row(i)));
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
  }
  return AdaBoost(std::move(stumps));
}

// ------------------------------------------------------------------ LinearSvm

double LinearSvm::margin(std::span<const double> row) const {
  if (row.size() + 1 != weights_.size()) {
    throw std::invalid_argument("LinearSvm: input has " + std::to_string(row.size()) +
                                " features, model expects " + std::to_string(weights_.size() - 1));
  }
  double m = weights_.back();
  for (std::size_t i = 0; i < row.size(); ++i) m += weights_[i] * row[i];
  return m;
}

std::vector<double> LinearSvm::score(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = sigmoid(margin(x.row(r)));
  return out;
}

Container LinearSvm::to_container() const {
  Container c;
  c.header = {{"method", "svm"}, {"n_weights", weights_.size()}};
  c.payload = weights_;
  return c;
}

double svm_objective(const std::vector<double>& weights, const DatasetTable& data, double lambda) {
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  double hinge = 0.0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto row = data.features.row(r);
    double m = weights.back();
    for (std::size_t i = 0; i < row.size(); ++i) m += weights[i] * row[i];
    const double y = data.labels[r] == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * m);
  }
  return 0.5 * lambda * reg + hinge / static_cast<double>(data.rows());
}

LinearSvm train_linear_svm(const DatasetTable& train, const SvmConfig& config, std::uint64_t seed,
                           SvmTrace* trace) {
  require_both_classes(train, "train_linear_svm");
  if (!(config.lambda > 0.0)) throw std::invalid_argument("train_linear_svm: lambda must be > 0");
  if (config.epochs < 1) throw std::invalid_argument("train_linear_svm: epochs must be >= 1");
  const Matrix x = with_bias_column(train.features);
  const std::size_t d = x.cols();
  std::vector<double> w(d, 0.0);
  std::vector<double> avg(d, 0.0);
  const double radius = 1.0 / std::sqrt(config.lambda);
  Rng rng(seed);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i : rng.permutation(train.rows())) {
      ++t;
      const double eta = 1.0 / (config.lambda * static_cast<double>(t));
      const auto row = x.row(i);
      const double y = train.labels[i] == 1 ? 1.0 : -1.0;
      double m = 0.0;
      for (std::size_t k = 0; k < d; ++k) m += w[k] * row[k];
      const double shrink = 1.0 - eta * config.lambda;
      for (auto& v : w) v *= shrink;
      if (y * m < 1.0) {
        for (std::size_t k = 0; k < d; ++k) w[k] += eta * y * row[k];
      }
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      if (norm2 > radius * radius) {
        const double s = radius / std::sqrt(norm2);
        for (auto& v : w) v *= s;
      }
      const double inv_t = 1.0 / static_cast<double>(t);
      for (std::size_t k = 0; k < d; ++k) avg[k] += (w[k] - avg[k]) * inv_t;
    }
    if (trace) trace->objective.push_back(svm_objective(avg, train, config.lambda));
  }
  return LinearSvm(std::move(avg));
}

// ------------------------------------------------------------------ networks

std::string NetworkClassifier::method() const {
  return net_.architecture().kind == "mlp" ? "nn" : net_.architecture().kind;
}

std::vector<double> NetworkClassifier::score(const Matrix& x) const {
  return net_.predict(rows_as_signals(x));
}

Container NetworkClassifier::to_container() const { return net_.to_container(); }

NetworkFit train_mlp(const DatasetTable& train_set, const DatasetTable& valid,
                     const TrainConfig& config, std::size_t hidden_units) {
  Rng init(derive_seed(config.seed, 0));
  Network net = mlp_init(train_set.cols(), init, hidden_units);
  TrainHistory history = train(net, train_set, valid, config);
  return {NetworkClassifier(std::move(net)), std::move(history)};
}

NetworkFit train_pgn4(const DatasetTable& train_set, const DatasetTable& valid,
                      const TrainConfig& config, ActivationKind activation, double dropout_rate) {
  Rng init(derive_seed(config.seed, 0));
  Network net = pgn4_init(train_set.cols(), init, activation, dropout_rate);
  TrainHistory history = train(net, train_set, valid, config);
  return {NetworkClassifier(std::move(net)), std::move(history)};
}

// ------------------------------------------------------------------ loading

std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path) {
  const Container c = load_container(path);
  try {
    const std::string method = c.header.at("method").get<std::string>();
    if (method == "pgn4" || method == "nn") {
      return std::make_unique<NetworkClassifier>(Network::from_container(c));
    }
    if (method == "dt") {
      return std::make_unique<DecisionTree>(DecisionTree::from_payload(
          c.payload, c.header.at("n_nodes").get<std::size_t>(),
          c.header.at("n_features").get<std::size_t>()));
    }
    if (method == "rf") {
      std::vector<DecisionTree> trees;
      std::size_t offset = 0;
      const auto n_features = c.header.at("n_features").get<std::size_t>();
      for (const auto& size : c.header.at("tree_sizes")) {
        const auto n_nodes = size.get<std::size_t>();
        if (offset + n_nodes * 5 > c.payload.size()) throw ContainerError("forest payload too short");
        trees.push_back(DecisionTree::from_payload(
            std::span<const double>(c.payload).subspan(offset, n_nodes * 5), n_nodes, n_features));
        offset += n_nodes * 5;
      }
      return std::make_unique<RandomForest>(std::move(trees));
    }
    if (method == "ada") {
      const auto n = c.header.at("n_stumps").get<std::size_t>();
      if (c.payload.size() != n * 5) throw ContainerError("boosting payload has unexpected length");
      std::vector<Stump> stumps(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double* p = c.payload.data() + i * 5;
        stumps[i] = {static_cast<std::size_t>(p[0]), p[1], static_cast<int>(p[2]), p[3], p[4]};
      }
      return std::make_unique<AdaBoost>(std::move(stumps));
    }
    if (method == "svm") return std::make_unique<LinearSvm>(c.payload);
    throw ContainerError("unknown method '" + method + "' in model file");
  } catch (const json::exception& e) {
    throw ContainerError(std::string("model header is malformed: ") + e.what());
  }
}

}  // namespace pgd
