// Command-line experiment runner: synthesize data, rank features, train,
// evaluate, and sweep every method over several feature counts.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pgdetect/dataset.hpp"
#include "pgdetect/experiment.hpp"
#include "pgdetect/features.hpp"
#include "pgdetect/metrics.hpp"
#include "pgdetect/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DataFlags {
  std::string data;
  std::string preset;
  std::string label = "flag";
  std::vector<std::string> exclude;
  std::uint64_t seed = 42;
  double valid_fraction = 0.25;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--data", f.data, "CSV file with a header row");
  cmd->add_option("--preset", f.preset, "Synthetic preset instead of a CSV (a-like, b-like)");
  cmd->add_option("--label", f.label, "Label column name (values 0/1)")->capture_default_str();
  cmd->add_option("--exclude", f.exclude, "Column to drop; repeatable (rg_reason is always dropped)");
  cmd->add_option("--seed", f.seed, "Seed for generation, split and training")->capture_default_str();
  cmd->add_option("--valid-fraction", f.valid_fraction, "Share of rows held out for validation")
      ->capture_default_str();
}

pgd::ExperimentConfig config_from(const DataFlags& f) {
  pgd::ExperimentConfig c;
  c.data_path = f.data;
  c.preset = f.preset;
  c.label_column = f.label;
  for (const auto& e : f.exclude) c.exclude_columns.push_back(e);
  c.seed = f.seed;
  c.valid_fraction = f.valid_fraction;
  return c;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string metrics_line(const pgd::EvalReport& r) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(4);
  s << "accuracy " << r.accuracy << "  f1 " << r.f1 << "  roc_auc " << r.roc_auc << "  pr_auc "
    << r.pr_auc << "  (tp " << r.confusion.tp << " fp " << r.confusion.fp << " tn "
    << r.confusion.tn << " fn " << r.confusion.fn << ")";
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pgdetect: problem-gambling detection experiments with PGN4 and baselines"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic behavioral dataset as CSV");
  std::string synth_preset = "a-like";
  std::string synth_spec;
  std::string synth_out;
  std::uint64_t synth_seed = 42;
  double synth_rate = -1.0;
  synth->add_option("--preset", synth_preset, "a-like (4056x102) or b-like (4132x27)")->capture_default_str();
  synth->add_option("--spec", synth_spec, "JSON generator spec overriding preset fields");
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--positive-rate", synth_rate, "Share of flagged users");
  synth->add_option("--out", synth_out, "Output CSV path")->required();

  // report-correlations
  auto* corr = app.add_subcommand("report-correlations",
                                  "Rank features by correlation with the flag (CSV to stdout or --out)");
  DataFlags corr_flags;
  add_data_flags(corr, corr_flags);
  bool corr_full = false;
  std::string corr_out;
  corr->add_flag("--full-table", corr_full, "Use every row instead of the training split");
  corr->add_option("--out", corr_out, "Write CSV here instead of stdout");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate every method at every feature count");
  DataFlags sweep_flags;
  add_data_flags(sweep, sweep_flags);
  std::string sweep_config, sweep_features, sweep_methods, sweep_out, sweep_activation;
  std::size_t sweep_epochs = 0, sweep_batch = 0, sweep_repeats = 0;
  double sweep_lr = 0.0;
  bool sweep_full_table = false, sweep_no_std = false, sweep_signed = false, sweep_no_models = false;
  sweep->add_option("--config", sweep_config, "JSON config file; flags override its fields");
  sweep->add_option("--features", sweep_features, "Feature counts, e.g. 5,10,20,50,full");
  sweep->add_option("--methods", sweep_methods, "Subset of pgn4,svm,dt,rf,ada,nn (or all)");
  sweep->add_option("--epochs", sweep_epochs, "Training epochs for pgn4/nn (default 20)");
  sweep->add_option("--batch-size", sweep_batch, "Minibatch size (default 32)");
  sweep->add_option("--lr", sweep_lr, "Adam learning rate (default 2e-4)");
  sweep->add_option("--activation", sweep_activation, "relu or leaky_relu");
  sweep->add_option("--repeats", sweep_repeats, "Average over k seeded splits (mean +- std)");
  sweep->add_option("--out", sweep_out, "Results directory (default results)");
  sweep->add_flag("--select-on-full-table", sweep_full_table, "Rank features on all rows (leaks validation)");
  sweep->add_flag("--no-standardize", sweep_no_std, "Skip z-scoring");
  sweep->add_flag("--signed-rank", sweep_signed, "Rank by signed rather than absolute correlation");
  sweep->add_flag("--no-models", sweep_no_models, "Do not write model files");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one method on the training split and save it");
  DataFlags train_flags;
  add_data_flags(train_cmd, train_flags);
  std::string train_method = "pgn4", train_features = "full", train_out, train_history;
  std::size_t train_epochs = 20, train_batch = 32;
  double train_lr = 2e-4;
  train_cmd->add_option("--method", train_method)->capture_default_str();
  train_cmd->add_option("--features", train_features, "Feature count or full")->capture_default_str();
  train_cmd->add_option("--epochs", train_epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", train_batch)->capture_default_str();
  train_cmd->add_option("--lr", train_lr)->capture_default_str();
  train_cmd->add_option("--out", train_out, "Model file (.pgn4)")->required();
  train_cmd->add_option("--history", train_history, "Per-epoch CSV for pgn4/nn");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a dataset with a saved model");
  std::string eval_model, eval_curves;
  DataFlags eval_flags;
  add_data_flags(eval_cmd, eval_flags);
  eval_cmd->add_option("--model", eval_model, "Model file written by train or sweep")->required();
  eval_cmd->add_option("--curves", eval_curves, "Directory for roc.csv and pr.csv");

  // report
  auto* report = app.add_subcommand("report", "Print a results directory as a table");
  std::string report_dir = "results";
  report->add_option("results", report_dir, "Directory written by sweep")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      pgd::SynthSpec spec = pgd::preset(synth_preset, synth_seed);
      if (!synth_spec.empty()) {
        std::ifstream in(synth_spec);
        if (!in) throw std::runtime_error("cannot read spec file " + synth_spec);
        const json j = json::parse(in);
        if (j.contains("n_rows")) spec.n_rows = j["n_rows"];
        if (j.contains("n_features")) spec.n_features = j["n_features"];
        if (j.contains("signal_strengths")) {
          spec.signal_strengths = j["signal_strengths"].get<std::vector<double>>();
          spec.n_signal = spec.signal_strengths.size();
        }
        if (j.contains("shared_nuisance")) spec.shared_nuisance = j["shared_nuisance"];
        if (j.contains("positive_rate")) spec.positive_rate = j["positive_rate"];
        if (j.contains("emit_reason_codes")) spec.emit_reason_codes = j["emit_reason_codes"];
        if (j.contains("noise_cliques")) {
          spec.noise_cliques.clear();
          for (const auto& c : j["noise_cliques"]) spec.noise_cliques.push_back({c.at("size"), c.at("corr")});
        }
      }
      if (synth_rate > 0.0) spec.positive_rate = synth_rate;
      const auto data = pgd::generate(spec);
      write_file(synth_out, pgd::synth_csv(data));
      std::cout << "wrote " << synth_out << ": " << data.table.rows() << " rows x "
                << data.table.cols() << " features + flag (" << data.table.positives()
                << " flagged)\n";
      return 0;
    }

    if (corr->parsed()) {
      auto config = config_from(corr_flags);
      config.validate();
      const auto data = pgd::load_experiment_data(config);
      pgd::DatasetTable basis = data;
      if (!corr_full) {
        pgd::Rng rng(pgd::derive_seed(config.seed, 0));
        basis = pgd::split_train_valid(data, config.valid_fraction, rng).train;
      }
      const std::string csv = pgd::correlations_csv(pgd::correlation_report(basis));
      if (corr_out.empty()) {
        std::cout << csv;
      } else {
        write_file(corr_out, csv);
      }
      return 0;
    }

    if (sweep->parsed()) {
      pgd::ExperimentConfig config;
      if (!sweep_config.empty()) {
        std::ifstream in(sweep_config);
        if (!in) throw std::runtime_error("cannot read config file " + sweep_config);
        config.merge_json(json::parse(in));
      }
      if (sweep->count("--data")) {
        config.data_path = sweep_flags.data;
        config.preset.clear();
      }
      if (sweep->count("--preset")) {
        config.preset = sweep_flags.preset;
        config.data_path.clear();
      }
      if (sweep->count("--label")) config.label_column = sweep_flags.label;
      for (const auto& e : sweep_flags.exclude) config.exclude_columns.push_back(e);
      if (sweep->count("--seed")) config.seed = sweep_flags.seed;
      if (sweep->count("--valid-fraction")) config.valid_fraction = sweep_flags.valid_fraction;
      if (sweep->count("--features")) config.feature_counts = pgd::parse_feature_counts(sweep_features);
      if (sweep->count("--methods")) config.methods = pgd::parse_methods(sweep_methods);
      if (sweep->count("--epochs")) config.train.epochs = sweep_epochs;
      if (sweep->count("--batch-size")) config.train.batch_size = sweep_batch;
      if (sweep->count("--lr")) config.train.learning_rate = sweep_lr;
      if (sweep->count("--activation")) config.activation = pgd::activation_from_string(sweep_activation);
      if (sweep->count("--repeats")) config.repeats = sweep_repeats;
      if (sweep->count("--out")) config.out_dir = sweep_out;
      if (sweep_full_table) config.select_on_full_table = true;
      if (sweep_no_std) config.standardize = false;
      if (sweep_signed) config.rank = pgd::RankBy::Signed;
      if (sweep_no_models) config.save_models = false;
      config.validate();

      const auto data = pgd::load_experiment_data(config);
      std::cerr << "data: " << data.rows() << " rows x " << data.cols() << " features, "
                << data.positives() << " flagged / " << data.rows() - data.positives()
                << " unflagged\n";
      const fs::path out = config.out_dir;
      const auto result = pgd::run_sweep(config, data, out,
                                         [](const std::string& msg) { std::cerr << msg << "\n"; });
      const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      char stamp[32];
      std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      write_file(out / "run_info.txt", std::string("finished ") + stamp + "\nseed " +
                                           std::to_string(config.seed) + "\nconfig_hash " +
                                           result.config_hash + "\n");
      std::cout << pgd::render_report(out);
      return result.all_ok() ? 0 : 1;
    }

    if (train_cmd->parsed()) {
      auto config = config_from(train_flags);
      config.methods = pgd::parse_methods(train_method);
      if (config.methods.size() != 1) throw std::invalid_argument("train takes exactly one --method");
      config.train.epochs = train_epochs;
      config.train.batch_size = train_batch;
      config.train.learning_rate = train_lr;
      config.validate();
      const auto count = pgd::parse_feature_counts(train_features).at(0);
      const auto data = pgd::load_experiment_data(config);
      pgd::Rng rng(pgd::derive_seed(config.seed, 0));
      const auto split = pgd::split_train_valid(data, config.valid_fraction, rng);
      const auto report = pgd::correlation_report(split.train);
      const auto usable = static_cast<std::size_t>(
          std::count(report.degenerate.begin(), report.degenerate.end(), false));
      const auto arrangement =
          pgd::select_and_arrange(report, count == pgd::kFullFeatures ? usable : count);
      auto train_t = pgd::project(split.train, arrangement);
      auto valid_t = pgd::project(split.valid, arrangement);
      const auto stats = pgd::fit_standardize(train_t);
      stats.apply(train_t);
      stats.apply(valid_t);
      pgd::TrainHistory history;
      auto model = pgd::fit_method(config.methods[0], train_t, valid_t, config,
                                   pgd::derive_seed(config.seed, 1000), &history);
      const auto eval = pgd::evaluate(model->score(valid_t.features), valid_t.labels);
      pgd::PipelineModel pm{std::move(model), arrangement.ordered_names, stats};
      pm.save(train_out);
      if (!train_history.empty()) write_file(train_history, history.to_csv());
      std::cout << "saved " << train_out << " (" << config.methods[0] << ", "
                << arrangement.ordered_names.size() << " features)\nvalidation: "
                << metrics_line(eval) << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      auto config = config_from(eval_flags);
      config.validate();
      const auto data = pgd::load_experiment_data(config);
      const auto pm = pgd::PipelineModel::load(eval_model);
      const auto eval = pgd::evaluate(pm.score(data), data.labels);
      std::cout << pm.classifier->method() << " on " << data.rows() << " rows: "
                << metrics_line(eval) << "\n";
      if (!eval_curves.empty()) {
        write_file(fs::path(eval_curves) / "roc.csv", pgd::curve_csv(eval.roc_points, "fpr,tpr"));
        write_file(fs::path(eval_curves) / "pr.csv", pgd::curve_csv(eval.pr_points, "recall,precision"));
      }
      return 0;
    }

    if (report->parsed()) {
      std::cout << pgd::render_report(report_dir);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
