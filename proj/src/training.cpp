#include "pgdetect/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pgdetect/metrics.hpp"

namespace pgd {

namespace {

constexpr double kClamp = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Tensor3 batch_tensor(const DatasetTable& t, const std::vector<std::size_t>& order,
                     std::size_t begin, std::size_t end, std::vector<int>& labels) {
  const std::size_t f = t.cols();
  Tensor3 x(end - begin, 1, f);
  labels.clear();
  for (std::size_t i = begin; i < end; ++i) {
    const auto row = t.features.row(order[i]);
    std::copy(row.begin(), row.end(), x.data().begin() + static_cast<std::ptrdiff_t>((i - begin) * f));
    labels.push_back(t.labels[order[i]]);
  }
  return x;
}

}  // namespace

BceResult bce_loss(std::span<const double> p, std::span<const int> y) {
  if (p.size() != y.size()) {
    throw std::invalid_argument("bce_loss: " + std::to_string(p.size()) + " predictions for " +
                                std::to_string(y.size()) + " labels");
  }
  if (p.empty()) throw std::invalid_argument("bce_loss: empty input");
  const double n = static_cast<double>(p.size());
  BceResult r;
  r.grad.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kClamp, 1.0 - kClamp);
    r.loss -= y[i] ? std::log(q) : std::log(1.0 - q);
    r.grad[i] = (y[i] ? -1.0 / q : 1.0 / (1.0 - q)) / n;
  }
  r.loss /= n;
  return r;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("TrainConfig: beta1 must be in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("TrainConfig: beta2 must be in [0,1)");
  if (!(eps > 0.0)) throw std::invalid_argument("TrainConfig: eps must be > 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
}

void adam_step(const std::vector<Param*>& params, AdamState& state, const TrainConfig& config) {
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.emplace_back(p->size(), 0.0);
      state.v.emplace_back(p->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state tracks " + std::to_string(state.m.size()) +
                                " tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (state.m[k].size() != params[k]->size() || params[k]->grad.size() != params[k]->size()) {
      throw std::invalid_argument("adam_step: shape mismatch for tensor '" + params[k]->name + "'");
    }
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k]->value;
    const auto& grad = params[k]->grad;
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,train_loss,train_acc,valid_loss,valid_acc,valid_roc_auc,valid_pr_auc\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," +
           format_double(e.train_accuracy) + "," + format_double(e.valid_loss) + "," +
           format_double(e.valid_accuracy) + "," + format_double(e.valid_roc_auc) + "," +
           format_double(e.valid_pr_auc) + "\n";
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n,
                                                              std::size_t batch_size) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    ranges.emplace_back(begin, std::min(n, begin + batch_size));
  }
  if (ranges.size() > 1 && ranges.back().second - ranges.back().first == 1) {
    ranges[ranges.size() - 2].second = n;
    ranges.pop_back();
  }
  return ranges;
}

TrainHistory train(Network& model, const DatasetTable& train_set, const DatasetTable& valid,
                   const TrainConfig& config) {
  config.validate();
  if (train_set.rows() == 0) throw std::invalid_argument("train: empty training set");
  if (train_set.cols() != model.input_length()) {
    throw std::invalid_argument("train: training set has " + std::to_string(train_set.cols()) +
                                " features, model expects " + std::to_string(model.input_length()));
  }
  if (valid.rows() > 0 && valid.feature_names != train_set.feature_names) {
    throw std::invalid_argument("train: validation columns differ from training columns");
  }

  Rng rng(config.seed);
  AdamState state;
  TrainHistory history;
  const auto params = model.params();
  std::vector<std::size_t> order(train_set.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<int> labels;

  const Tensor3 valid_x = rows_as_signals(valid.features);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) order = rng.permutation(train_set.rows());
    model.set_mode(Mode::Training);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (const auto& [begin, end] : batch_ranges(order.size(), config.batch_size)) {
      const Tensor3 x = batch_tensor(train_set, order, begin, end, labels);
      const auto p = model.forward(x);
      const double loss = model.backward(labels);
      adam_step(params, state, config);
      loss_sum += loss * static_cast<double>(end - begin);
      for (std::size_t i = 0; i < p.size(); ++i) correct += (p[i] >= 0.5) == (labels[i] == 1);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_set.rows());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.rows());
    rec.valid_loss = rec.valid_accuracy = rec.valid_roc_auc = rec.valid_pr_auc = kNaN;
    if (valid.rows() > 0) {
      const auto p = model.predict(valid_x);
      rec.valid_loss = bce_loss(p, valid.labels).loss;
      rec.valid_accuracy = accuracy_f1(confusion_at(p, valid.labels)).accuracy;
      const std::size_t pos = valid.positives();
      if (pos > 0 && pos < valid.rows()) {
        rec.valid_roc_auc = roc_curve(p, valid.labels).auc;
        rec.valid_pr_auc = pr_curve(p, valid.labels).auc;
      }
    }
    history.epochs.push_back(rec);
  }
  history.adam_steps = state.t;
  model.set_mode(Mode::Inference);
  return history;
}

GradientCheckReport gradient_check(const Network& model, const Tensor3& x,
                                   const std::vector<int>& labels, double h, double tolerance,
                                   const std::function<void(Network&)>& tamper) {
  if (x.batch() == 0) throw std::invalid_argument("gradient_check: empty batch");
  if (!(h > 0.0)) throw std::invalid_argument("gradient_check: h must be > 0");
  Network net = model;
  net.set_mode(Mode::Training);
  net.forward(x);
  net.backward(labels);
  if (tamper) tamper(net);

  GradientCheckReport report;
  std::size_t layer_index = 0;
  for (auto& layer : net.layers()) {
    for (Param* p : layer->params()) {
      const std::vector<double> analytic = p->grad;
      std::vector<double> numeric(p->size());
      for (std::size_t i = 0; i < p->size(); ++i) {
        const double saved = p->value[i];
        p->value[i] = saved + h;
        const double up = net.loss(x, labels);
        p->value[i] = saved - h;
        const double down = net.loss(x, labels);
        p->value[i] = saved;
        numeric[i] = (up - down) / (2.0 * h);
      }
      double diff2 = 0.0, a2 = 0.0, n2 = 0.0, max_abs = 0.0;
      for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double d = analytic[i] - numeric[i];
        diff2 += d * d;
        a2 += analytic[i] * analytic[i];
        n2 += numeric[i] * numeric[i];
        max_abs = std::max(max_abs, std::abs(d));
      }
      GradientCheckEntry e;
      e.name = std::to_string(layer_index) + "." + layer->kind() + "." + p->name;
      e.size = p->size();
      e.max_abs_error = max_abs;
      e.relative_error =
          std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), kGradCheckNormFloor});
      report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
      report.entries.push_back(std::move(e));
    }
    ++layer_index;
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace pgd
