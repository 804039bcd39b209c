// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pgdetect/baselines.hpp"
#include "pgdetect/experiment.hpp"
#include "pgdetect/features.hpp"
#include "pgdetect/metrics.hpp"
#include "pgdetect/synth.hpp"
#include "pgdetect/training.hpp"

using namespace pgd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::path(PGDETECT_TEST_TMP) / "acceptance" / name;
  fs::remove_all(dir);
  return dir;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double train_accuracy(const Classifier& c, const DatasetTable& t) {
  const auto s = c.score(t.features);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < s.size(); ++i) ok += (s[i] >= 0.5) == (t.labels[i] == 1);
  return static_cast<double>(ok) / static_cast<double>(s.size());
}

// ------------------------------------------------------------------ criteria

Outcome gradient_correctness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto full = fixture::pgn4_grad_case(2024);
  const auto rep = gradient_check(full.model, full.x, full.labels, 1e-5, 1e-4);
  o.require(rep.passed, "pgn4 max rel error " + fmt(rep.max_relative_error));
  const auto dense = fixture::dense_grad_case(11);
  const double de = gradient_check(dense.model, dense.x, dense.labels, 1e-5, 1e-6).max_relative_error;
  o.require(de < 1e-6, "dense-only rel error " + fmt(de));
  const auto conv = fixture::conv_grad_case(11);
  const double ce = gradient_check(conv.model, conv.x, conv.labels, 1e-5, 1e-6).max_relative_error;
  o.require(ce < 1e-6, "conv-only rel error " + fmt(ce));
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, "runtime " + fmt(secs) + " s");
  o.note("pgn4 " + fmt(rep.max_relative_error) + " over " + std::to_string(rep.entries.size()) +
         " tensors, dense " + fmt(de) + ", conv " + fmt(ce) + ", " + fmt(secs, 3) + " s");
  return o;
}

Outcome shape_law() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t checked = 0;
  for (std::size_t len = 4; len <= 256; ++len) {
    for (std::size_t stride : {1u, 2u}) {
      Conv1d conv(1, 1, 3, stride);
      const auto y = conv.forward(Tensor3(1, 1, len), Mode::Inference);
      if (y.length() != (len + stride - 1) / stride) o.require(false, "L=" + std::to_string(len));
      ++checked;
    }
  }
  const std::size_t f[3] = {102, 27, 5}, want[3] = {832, 224, 64};
  for (int i = 0; i < 3; ++i) {
    Rng rng(1);
    auto net = pgn4_init(f[i], rng);
    std::size_t width = 0;
    for (auto& l : net.layers())
      if (auto* d = dynamic_cast<Dense*>(l.get()); d && !width) width = d->in_features();
    o.require(width == want[i] && pgn4_flatten_width(f[i]) == want[i], "flatten width for F=" + std::to_string(f[i]));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 1.0, "runtime " + fmt(secs) + " s");
  o.note(std::to_string(checked) + " conv lengths, flatten 832/224/64, " + fmt(secs, 3) + " s");
  return o;
}

Outcome optimizer_correctness() {
  Outcome o;
  TrainConfig cfg;
  const std::vector<double> grads{0.5, -0.3, 0.8, 0.1, -1.2, 0.05, 0.5, 0.5, -0.7, 2.0};
  const auto ref = oracle::adam_scalar_trace(1.25, grads, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps);
  Param p("theta", {1});
  p.value = {1.25};
  AdamState state;
  double worst = 0;
  for (std::size_t t = 0; t < grads.size(); ++t) {
    p.grad = {grads[t]};
    adam_step({&p}, state, cfg);
    worst = std::max(worst, std::abs(p.value[0] - ref[t]));
  }
  o.require(worst <= 1e-12, "trace deviation " + fmt(worst));

  double worst_first = 0;
  for (double g : {0.5, -0.5, 3.0, -0.1}) {
    Param q("theta", {1});
    q.value = {0.0};
    q.grad = {g};
    AdamState s;
    adam_step({&q}, s, cfg);
    const double expect = -cfg.learning_rate * (g > 0 ? 1 : -1);
    worst_first = std::max(worst_first, std::abs(q.value[0] - expect) / cfg.learning_rate);
  }
  o.require(worst_first <= 1e-6, "first step relative deviation " + fmt(worst_first));
  o.note("10-step deviation " + fmt(worst) + ", first step " + fmt(worst_first));
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  double roc_worst = 0, pr_worst = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 5 + rng.below(120);
    const std::size_t levels = seed % 4 == 0 ? 0 : 2 + rng.below(8);  // 3 of 4 instances are heavily tied
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform() < 0.35 ? 1 : 0;
      s[i] = levels ? static_cast<double>(rng.below(levels)) : rng.uniform() + 0.3 * y[i];
    }
    y[0] = 1;
    y[n - 1] = 0;
    roc_worst = std::max(roc_worst, std::abs(roc_curve(s, y).auc - oracle::mann_whitney_auc(s, y)));
    pr_worst = std::max(pr_worst, std::abs(pr_curve(s, y).auc - oracle::pr_auc_enumerated(s, y)));
  }
  o.require(roc_worst <= 1e-12, "roc deviation " + fmt(roc_worst));
  o.require(pr_worst <= 1e-12, "pr deviation " + fmt(pr_worst));
  o.note("200 instances, roc max dev " + fmt(roc_worst) + ", pr max dev " + fmt(pr_worst));
  return o;
}

Outcome selection_properties() {
  Outcome o;
  std::size_t good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t rows = 30 + rng.below(100), cols = 3 + rng.below(30);
    DatasetTable t;
    for (std::size_t c = 0; c < cols; ++c) t.feature_names.push_back("f" + std::to_string(c));
    t.features = Matrix(rows, cols, rng.normal_vector(rows * cols, 0, 1));
    for (std::size_t r = 0; r < rows; ++r) t.labels.push_back(rng.uniform() < 0.5);
    for (std::size_t c = 0; c < cols; ++c) {
      const double w = 2 * rng.uniform() - 1;
      for (std::size_t r = 0; r < rows; ++r) t.features(r, c) += w * t.labels[r];
    }
    const auto rep = correlation_report(t);
    const std::size_t n = 1 + rng.below(cols);

    std::vector<std::size_t> idx(cols);
    for (std::size_t i = 0; i < cols; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const double fa = std::abs(rep.flag_corr[a]), fb = std::abs(rep.flag_corr[b]);
      return fa != fb ? fa > fb : a < b;
    });
    std::vector<std::string> want;
    for (std::size_t i = 0; i < n; ++i) want.push_back(t.feature_names[idx[i]]);

    const auto arr = select_and_arrange(rep, n);
    auto got = arr.ordered_names;
    const bool first_ok = !got.empty() && got.front() == want.front();
    std::sort(got.begin(), got.end());
    auto want_sorted = want;
    std::sort(want_sorted.begin(), want_sorted.end());
    const bool det = select_and_arrange(rep, n).ordered_names == arr.ordered_names;
    good += first_ok && got == want_sorted && det;
  }
  o.require(good == 100, std::to_string(good) + "/100 random tables");

  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec s;
    s.n_rows = 4056;
    s.n_features = 102;
    s.n_signal = 5;
    s.signal_strengths = {0.45, 0.40, 0.35, 0.30, 0.25};
    s.seed = 1000 + seed;
    const auto d = generate(s);
    auto pool = select_and_arrange(correlation_report(d.table), 5).candidate_pool;
    std::vector<std::string> planted;
    for (auto c : d.signal_columns) planted.push_back(d.table.feature_names[c]);
    std::sort(pool.begin(), pool.end());
    std::sort(planted.begin(), planted.end());
    recovered += pool == planted;
  }
  o.require(recovered >= 9, "planted recovery " + std::to_string(recovered) + "/10");
  o.note("100/100 random tables ok, planted top-5 recovered on " + std::to_string(recovered) + "/10 seeds");
  return o;
}

Outcome trainability() {
  Outcome o;
  double worst_overfit = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const auto row = rng.normal_vector(16, 0, 1);
    DatasetTable dup;
    for (std::size_t c = 0; c < 16; ++c) dup.feature_names.push_back("f" + std::to_string(c));
    dup.features = Matrix(32, 16);
    for (std::size_t r = 0; r < 32; ++r) {
      for (std::size_t c = 0; c < 16; ++c) dup.features(r, c) = row[c];
      dup.labels.push_back(seed % 2 ? 1 : 0);
    }
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.seed = seed;
    const auto fit = train_pgn4(dup, DatasetTable{}, cfg);
    worst_overfit = std::max(worst_overfit, fit.history.epochs.back().train_loss);
  }
  o.require(worst_overfit < 0.01, "overfit loss " + fmt(worst_overfit));
  o.note("overfit BCE <= " + fmt(worst_overfit) + " on 5 seeds");

  ExperimentConfig cfg;
  cfg.preset = "a-like";
  const auto data = load_experiment_data(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = run_sweep(cfg, data, scratch("a_like_sweep"));
  const double secs = seconds_since(t0);

  double auc5 = NAN, auc_full = NAN;
  std::size_t cells = 0;
  for (const auto& cell : result.runs[0].cells) {
    cells += cell.ok;
    if (cell.method != "pgn4" || !cell.ok) continue;
    if (cell.count == 5) auc5 = cell.report.roc_auc;
    if (cell.count == kFullFeatures) auc_full = cell.report.roc_auc;
  }
  o.require(cells == 30, std::to_string(cells) + "/30 cells succeeded");
  o.require(auc5 >= 0.85, "pgn4 N=5 roc auc " + fmt(auc5));
  o.require(auc_full - auc5 <= 0.05, "full-to-5 degradation " + fmt(auc_full - auc5));
  o.require(secs < 900.0, "sweep runtime " + fmt(secs) + " s");
  o.note("pgn4 roc auc N=5 " + fmt(auc5) + ", full " + fmt(auc_full) + ", 30-cell sweep " + fmt(secs, 3) + " s");
  return o;
}

Outcome baseline_sanity() {
  Outcome o;
  const auto t = fixture::separable_table(20, 2);
  TrainConfig nn;
  nn.epochs = 100;
  nn.learning_rate = 1e-2;
  nn.batch_size = 8;
  ForestConfig rf;
  rf.n_trees = 25;
  const double acc[5] = {train_accuracy(train_linear_svm(t, SvmConfig{}, 1), t),
                         train_accuracy(train_decision_tree(t), t),
                         train_accuracy(train_random_forest(t, rf, 1), t),
                         train_accuracy(train_adaboost(t, 100), t),
                         train_accuracy(train_mlp(t, DatasetTable{}, nn).model, t)};
  const char* names[5] = {"svm", "dt", "rf", "ada", "nn"};
  for (int i = 0; i < 5; ++i) o.require(acc[i] == 1.0, std::string(names[i]) + " accuracy " + fmt(acc[i]));

  const auto wide = fixture::separable_table(80, 6, 3);
  ForestConfig one;
  one.n_trees = 1;
  one.bootstrap = false;
  one.subsample_features = false;
  const auto forest = train_random_forest(wide, one, 17);
  const auto tree = train_decision_tree(wide, one.max_depth, one.min_leaf);
  o.require(forest.trees()[0] == tree && forest.score(wide.features) == tree.score(wide.features),
            "degenerate forest differs from tree");
  o.note("5/5 baselines at 100% on the 20-point fixture, 1-tree forest == tree");
  return o;
}

Outcome determinism_persistence() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.preset = "b-like";
  cfg.feature_counts = {5, kFullFeatures};
  cfg.train.epochs = 3;
  cfg.forest_trees = 20;
  cfg.boost_rounds = 20;
  const auto data = load_experiment_data(cfg);
  const auto d1 = scratch("det_a"), d2 = scratch("det_b");
  run_sweep(cfg, data, d1);
  run_sweep(cfg, data, d2);
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::recursive_directory_iterator(d1)) {
    if (!e.is_regular_file()) continue;
    ++files;
    same += slurp(e.path()) == slurp(d2 / fs::relative(e.path(), d1));
  }
  o.require(files > 0 && same == files, std::to_string(same) + "/" + std::to_string(files) + " artifacts identical");

  Rng rng(9);
  auto net = pgn4_init(12, rng);
  const Tensor3 x(6, 1, 12, rng.normal_vector(72, 0, 1));
  net.forward(x);
  net.backward({1, 0, 1, 0, 1, 1});
  const auto path = scratch("model") / "m.pgn4";
  fs::create_directories(path.parent_path());
  net.save(path);
  auto back = Network::load(path);
  const auto p1 = net.predict(x), p2 = back.predict(x);
  o.require(std::memcmp(p1.data(), p2.data(), p1.size() * sizeof(double)) == 0, "reloaded forward differs");

  std::string bytes = slurp(path);
  bytes[bytes.size() / 2] ^= 0x20;
  const auto bad = path.parent_path() / "bad.pgn4";
  std::ofstream(bad, std::ios::binary) << bytes;
  bool rejected = false;
  try {
    Network::load(bad);
  } catch (const ContainerError& e) {
    rejected = std::string(e.what()).find("checksum") != std::string::npos;
  }
  o.require(rejected, "corrupted model not rejected by checksum");
  o.note(std::to_string(files) + " sweep artifacts byte-identical, bit-exact reload, corruption rejected");
  return o;
}

Outcome synthetic_fidelity() {
  Outcome o;
  const auto a = generate(preset_a_like(42));
  const auto b = generate(preset_b_like(42));
  o.require(a.table.rows() == 4056 && a.table.cols() == 102, "a-like shape");
  o.require(b.table.rows() == 4132 && b.table.cols() == 27, "b-like shape");

  Rng rng(7);
  const auto hist = reason_histogram(sample_reason_codes(100000, rng));
  const auto p = reason_probabilities();
  double worst = 0;
  for (std::size_t i = 0; i < kReasonCodes.size(); ++i) {
    worst = std::max(worst, std::abs(hist.at(std::string(kReasonCodes[i].label)) - p[i]));
  }
  o.require(worst <= 0.02, "reason frequency deviation " + fmt(worst));

  ExperimentConfig cfg;
  cfg.preset = "b-like";
  cfg.methods = {"dt"};
  const auto r = run_sweep(cfg, b.table);
  bool has50 = false;
  for (const auto& cell : r.runs[0].cells) has50 = has50 || cell.count == 50;
  o.require(!has50 && r.runs[0].skipped == std::vector<FeatureCount>{50}, "N=50 not skipped on b-like");
  o.note("4056x102 and 4132x27, reason max dev " + fmt(worst, 3) + ", b-like N=50 skipped");
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gradient correctness", gradient_correctness},
      {"shape law", shape_law},
      {"optimizer correctness", optimizer_correctness},
      {"metric oracle equivalence", metric_oracles},
      {"feature selection properties", selection_properties},
      {"trainability", trainability},
      {"baseline sanity", baseline_sanity},
      {"determinism and persistence", determinism_persistence},
      {"synthetic fidelity", synthetic_fidelity},
  };
  int failed = 0, index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << index << "] " << name << ": " << o.detail << std::endl;
  }
  std::cout << (9 - failed) << "/9 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
