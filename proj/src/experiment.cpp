#include "pgdetect/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pgdetect/container.hpp"
#include "pgdetect/synth.hpp"

namespace pgd {

using nlohmann::json;

namespace {

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string provenance_line(const SweepResult& r) {
  return "# pgdetect seed=" + std::to_string(r.config.seed) + " config_hash=" + r.config_hash;
}

std::string cell_stem(const SweepResult& r, std::size_t repeat, const SweepCell& cell) {
  std::string stem = "N" + feature_count_label(cell.count) + "_" + cell.method;
  if (r.config.repeats > 1) stem = "r" + std::to_string(repeat) + "_" + stem;
  return stem;
}

json stats_to_json(const StandardizeStats& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

}  // namespace

std::string feature_count_label(FeatureCount n) {
  return n == kFullFeatures ? "full" : std::to_string(n);
}

std::vector<FeatureCount> parse_feature_counts(const std::string& text) {
  std::vector<FeatureCount> out;
  for (const auto& item : split_commas(text)) {
    if (item == "full") {
      out.push_back(kFullFeatures);
      continue;
    }
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v <= 0) {
      throw std::invalid_argument("feature count '" + item + "' must be a positive integer or 'full'");
    }
    out.push_back(static_cast<FeatureCount>(v));
  }
  if (out.empty()) throw std::invalid_argument("no feature counts given");
  return out;
}

std::vector<std::string> parse_methods(const std::string& text) {
  auto methods = split_commas(text);
  if (methods.size() == 1 && methods[0] == "all") return kAllMethods;
  for (const auto& m : methods) {
    if (std::find(kAllMethods.begin(), kAllMethods.end(), m) == kAllMethods.end()) {
      throw std::invalid_argument("unknown method '" + m + "' (expected pgn4, svm, dt, rf, ada, nn)");
    }
  }
  if (methods.empty()) throw std::invalid_argument("no methods given");
  return methods;
}

// ------------------------------------------------------------------ config

void ExperimentConfig::validate() const {
  if (data_path.empty() == preset.empty()) {
    throw std::invalid_argument("exactly one of a data path or a synthetic preset is required");
  }
  train.validate();
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw std::invalid_argument("valid_fraction must be in (0,1)");
  }
  if (feature_counts.empty()) throw std::invalid_argument("no feature counts configured");
  if (methods.empty()) throw std::invalid_argument("no methods configured");
  for (const auto& m : methods) parse_methods(m);
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
}

json ExperimentConfig::to_json() const {
  json counts = json::array();
  for (auto c : feature_counts) {
    if (c == kFullFeatures) {
      counts.push_back("full");
    } else {
      counts.push_back(c);
    }
  }
  return json{{"data", data_path},
              {"preset", preset},
              {"label", label_column},
              {"exclude", exclude_columns},
              {"features", counts},
              {"methods", methods},
              {"seed", seed},
              {"epochs", train.epochs},
              {"batch_size", train.batch_size},
              {"lr", train.learning_rate},
              {"beta1", train.beta1},
              {"beta2", train.beta2},
              {"adam_eps", train.eps},
              {"shuffle", train.shuffle},
              {"valid_fraction", valid_fraction},
              {"standardize", standardize},
              {"select_on_full_table", select_on_full_table},
              {"rank", rank == RankBy::Absolute ? "absolute" : "signed"},
              {"activation", to_string(activation)},
              {"dropout", dropout_rate},
              {"tree_max_depth", tree_max_depth},
              {"tree_min_leaf", tree_min_leaf},
              {"forest_trees", forest_trees},
              {"boost_rounds", boost_rounds},
              {"svm_lambda", svm_lambda},
              {"svm_epochs", svm_epochs},
              {"nn_hidden", nn_hidden},
              {"repeats", repeats},
              {"save_models", save_models},
              {"out", out_dir}};
}

void ExperimentConfig::merge_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  const json known = to_json();
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key) && key != "config_hash") {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("data", data_path);
  take("preset", preset);
  take("label", label_column);
  take("exclude", exclude_columns);
  if (j.contains("features")) {
    feature_counts.clear();
    for (const auto& c : j.at("features")) {
      if (c.is_string()) {
        const auto parsed = parse_feature_counts(c.get<std::string>());
        feature_counts.insert(feature_counts.end(), parsed.begin(), parsed.end());
      } else {
        feature_counts.push_back(c.get<std::size_t>());
      }
    }
  }
  take("methods", methods);
  take("seed", seed);
  take("epochs", train.epochs);
  take("batch_size", train.batch_size);
  take("lr", train.learning_rate);
  take("beta1", train.beta1);
  take("beta2", train.beta2);
  take("adam_eps", train.eps);
  take("shuffle", train.shuffle);
  take("valid_fraction", valid_fraction);
  take("standardize", standardize);
  take("select_on_full_table", select_on_full_table);
  if (j.contains("rank")) {
    const auto r = j.at("rank").get<std::string>();
    if (r != "absolute" && r != "signed") throw std::invalid_argument("rank must be absolute or signed");
    rank = r == "absolute" ? RankBy::Absolute : RankBy::Signed;
  }
  if (j.contains("activation")) activation = activation_from_string(j.at("activation"));
  take("dropout", dropout_rate);
  take("tree_max_depth", tree_max_depth);
  take("tree_min_leaf", tree_min_leaf);
  take("forest_trees", forest_trees);
  take("boost_rounds", boost_rounds);
  take("svm_lambda", svm_lambda);
  take("svm_epochs", svm_epochs);
  take("nn_hidden", nn_hidden);
  take("repeats", repeats);
  take("save_models", save_models);
  take("out", out_dir);
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("out");
  const std::string text = j.dump();
  return hex64(fnv1a64(text.data(), text.size()));
}

DatasetTable load_experiment_data(const ExperimentConfig& config) {
  if (!config.preset.empty()) {
    return generate(preset(config.preset, config.seed)).table;
  }
  CsvOptions opts;
  opts.label_column = config.label_column;
  opts.exclude_columns = config.exclude_columns;
  return load_csv(config.data_path, opts);
}

bool SweepResult::all_ok() const {
  for (const auto& run : runs)
    for (const auto& cell : run.cells)
      if (!cell.ok) return false;
  return true;
}

// ------------------------------------------------------------------ fitting

std::unique_ptr<Classifier> fit_method(const std::string& method, const DatasetTable& train_set,
                                       const DatasetTable& valid, const ExperimentConfig& config,
                                       std::uint64_t seed, TrainHistory* history) {
  TrainConfig tc = config.train;
  tc.seed = seed;
  if (method == "pgn4") {
    auto fit = train_pgn4(train_set, valid, tc, config.activation, config.dropout_rate);
    if (history) *history = std::move(fit.history);
    return std::make_unique<NetworkClassifier>(std::move(fit.model));
  }
  if (method == "nn") {
    auto fit = train_mlp(train_set, valid, tc, config.nn_hidden);
    if (history) *history = std::move(fit.history);
    return std::make_unique<NetworkClassifier>(std::move(fit.model));
  }
  if (method == "dt") {
    return std::make_unique<DecisionTree>(
        train_decision_tree(train_set, config.tree_max_depth, config.tree_min_leaf));
  }
  if (method == "rf") {
    ForestConfig fc;
    fc.n_trees = config.forest_trees;
    fc.max_depth = config.tree_max_depth;
    fc.min_leaf = config.tree_min_leaf;
    return std::make_unique<RandomForest>(train_random_forest(train_set, fc, seed));
  }
  if (method == "ada") return std::make_unique<AdaBoost>(train_adaboost(train_set, config.boost_rounds));
  if (method == "svm") {
    return std::make_unique<LinearSvm>(
        train_linear_svm(train_set, {config.svm_lambda, config.svm_epochs}, seed));
  }
  throw std::invalid_argument("unknown method '" + method + "'");
}

std::vector<double> PipelineModel::score(const DatasetTable& table) const {
  DatasetTable input = project(table, feature_names);
  if (stats) stats->apply(input);
  return classifier->score(input.features);
}

void PipelineModel::save(const std::filesystem::path& path) const {
  Container c = classifier->to_container();
  c.header["input"] = {{"features", feature_names}};
  if (stats) c.header["input"]["standardize"] = stats_to_json(*stats);
  save_container(c, path);
}

PipelineModel PipelineModel::load(const std::filesystem::path& path) {
  PipelineModel m;
  m.classifier = load_classifier(path);
  const Container c = load_container(path);
  if (!c.header.contains("input")) {
    throw ContainerError("model file " + path.string() + " carries no input feature list");
  }
  const auto& in = c.header.at("input");
  m.feature_names = in.at("features").get<std::vector<std::string>>();
  if (in.contains("standardize")) {
    StandardizeStats s;
    s.mean = in.at("standardize").at("mean").get<std::vector<double>>();
    s.std = in.at("standardize").at("std").get<std::vector<double>>();
    m.stats = std::move(s);
  }
  return m;
}

// ------------------------------------------------------------------ reports

std::string correlations_csv(const CorrelationReport& report, RankBy rank) {
  std::string out = "feature,flag_correlation\n";
  for (std::size_t i : rank_features(report, rank)) {
    out += report.feature_names[i] + "," + format_double(report.flag_corr[i]) + "\n";
  }
  return out;
}

std::string top_features_csv(const CorrelationReport& report, const std::vector<std::string>& pool,
                             const std::string& provenance) {
  std::vector<std::size_t> idx;
  for (const auto& name : pool) {
    const auto it = std::find(report.feature_names.begin(), report.feature_names.end(), name);
    idx.push_back(static_cast<std::size_t>(it - report.feature_names.begin()));
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(report.flag_corr[a]) > std::abs(report.flag_corr[b]);
  });
  std::string out = provenance + "\nrank,feature,correlation_coefficient\n";
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out += std::to_string(k + 1) + "," + report.feature_names[idx[k]] + "," +
           format_double(report.flag_corr[idx[k]]) + "\n";
  }
  return out;
}

std::string grid_csv(const SweepResult& result) {
  std::string out = provenance_line(result) + "\n";
  out += "repeat,features,n_features,method,status,accuracy,f1,roc_auc,pr_auc,tp,fp,tn,fn,error\n";
  for (std::size_t rep = 0; rep < result.runs.size(); ++rep) {
    for (const auto& cell : result.runs[rep].cells) {
      out += std::to_string(rep) + "," + feature_count_label(cell.count) + "," +
             std::to_string(cell.n_features) + "," + cell.method + ",";
      if (cell.ok) {
        const auto& r = cell.report;
        out += "ok," + format_double(r.accuracy) + "," + format_double(r.f1) + "," +
               format_double(r.roc_auc) + "," + format_double(r.pr_auc) + "," +
               std::to_string(r.confusion.tp) + "," + std::to_string(r.confusion.fp) + "," +
               std::to_string(r.confusion.tn) + "," + std::to_string(r.confusion.fn) + ",\n";
      } else {
        std::string msg = cell.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        out += "failed,,,,,,,,," + msg + "\n";
      }
    }
  }
  return out;
}

json grid_json(const SweepResult& result) {
  json j;
  j["seed"] = result.config.seed;
  j["config_hash"] = result.config_hash;
  j["config"] = result.config.to_json();
  j["runs"] = json::array();
  for (const auto& run : result.runs) {
    json r;
    r["seed"] = run.seed;
    json skipped = json::array();
    for (auto s : run.skipped) skipped.push_back(feature_count_label(s));
    r["skipped"] = skipped;
    json grid = json::object();
    for (const auto& cell : run.cells) {
      json c{{"ok", cell.ok}, {"n_features", cell.n_features}};
      if (cell.ok) {
        c["accuracy"] = cell.report.accuracy;
        c["f1"] = cell.report.f1;
        c["roc_auc"] = cell.report.roc_auc;
        c["pr_auc"] = cell.report.pr_auc;
        c["confusion"] = {{"tp", cell.report.confusion.tp}, {"fp", cell.report.confusion.fp},
                          {"tn", cell.report.confusion.tn}, {"fn", cell.report.confusion.fn}};
      } else {
        c["error"] = cell.error;
      }
      grid[feature_count_label(cell.count)][cell.method] = c;
    }
    r["grid"] = grid;
    json arrangements = json::object();
    for (const auto& [count, arr] : run.arrangements) {
      arrangements[feature_count_label(count)] = {{"ordered", arr.ordered_names},
                                                  {"pool", arr.candidate_pool}};
    }
    r["arrangements"] = arrangements;
    j["runs"].push_back(r);
  }
  return j;
}

// ------------------------------------------------------------------ sweep

SweepResult run_sweep(const ExperimentConfig& config, const DatasetTable& data,
                      const std::optional<std::filesystem::path>& out_dir, const LogFn& log) {
  config.validate();
  data.validate();
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  SweepResult result;
  result.config = config;
  result.config_hash = config.hash();
  const std::string prov = provenance_line(result);

  if (out_dir) {
    std::filesystem::create_directories(*out_dir / "curves");
    std::filesystem::create_directories(*out_dir / "history");
    if (config.save_models) std::filesystem::create_directories(*out_dir / "models");
  }

  for (std::size_t rep = 0; rep < config.repeats; ++rep) {
    SweepRun run;
    run.seed = config.repeats == 1 ? config.seed : derive_seed(config.seed, 100 + rep);
    Rng split_rng(derive_seed(run.seed, 0));
    Split split = split_train_valid(data, config.valid_fraction, split_rng);
    run.train_indices = split.train_indices;
    run.valid_indices = split.valid_indices;
    say("split: " + std::to_string(split.train.rows()) + " train / " +
        std::to_string(split.valid.rows()) + " validation rows (" +
        std::to_string(split.train.positives()) + " / " + std::to_string(split.valid.positives()) +
        " flagged)");
    run.correlations = correlation_report(config.select_on_full_table ? data : split.train);
    const auto usable = static_cast<std::size_t>(std::count(
        run.correlations.degenerate.begin(), run.correlations.degenerate.end(), false));

    std::size_t cell_index = 0;
    for (const FeatureCount count : config.feature_counts) {
      if (count != kFullFeatures && count > data.cols()) {
        say("skipping N=" + std::to_string(count) + ": only " + std::to_string(data.cols()) +
            " features available");
        run.skipped.push_back(count);
        continue;
      }
      const std::size_t n = count == kFullFeatures ? usable : std::min(count, usable);
      FeatureArrangement arrangement;
      DatasetTable train_t, valid_t;
      std::optional<StandardizeStats> stats;
      std::string prep_error;
      try {
        arrangement = select_and_arrange(run.correlations, n, config.rank);
        train_t = project(split.train, arrangement);
        valid_t = project(split.valid, arrangement);
        if (config.standardize) {
          stats = fit_standardize(train_t);
          stats->apply(train_t);
          stats->apply(valid_t);
        }
      } catch (const std::exception& e) {
        prep_error = e.what();
      }
      run.arrangements.emplace_back(count, arrangement);
      if (out_dir && prep_error.empty()) {
        std::string name = "features_N" + feature_count_label(count);
        if (config.repeats > 1) name = "r" + std::to_string(rep) + "_" + name;
        write_text(*out_dir / (name + ".csv"),
                   top_features_csv(run.correlations, arrangement.candidate_pool, prov));
      }

      for (const auto& method : config.methods) {
        SweepCell cell;
        cell.count = count;
        cell.n_features = n;
        cell.method = method;
        const std::uint64_t cell_seed = derive_seed(run.seed, 1000 + cell_index++);
        if (!prep_error.empty()) {
          cell.error = prep_error;
          run.cells.push_back(std::move(cell));
          continue;
        }
        try {
          TrainHistory history;
          auto model = fit_method(method, train_t, valid_t, config, cell_seed, &history);
          const auto scores = model->score(valid_t.features);
          cell.report = evaluate(scores, valid_t.labels);
          cell.ok = true;
          say("N=" + feature_count_label(count) + " " + method + ": acc " +
              format_double(std::round(cell.report.accuracy * 1e4) / 1e4) + " roc_auc " +
              format_double(std::round(cell.report.roc_auc * 1e4) / 1e4));
          if (out_dir) {
            const std::string stem = cell_stem(result, rep, cell);
            write_text(*out_dir / "curves" / (stem + ".roc.csv"),
                       prov + "\n" + curve_csv(cell.report.roc_points, "fpr,tpr"));
            write_text(*out_dir / "curves" / (stem + ".pr.csv"),
                       prov + "\n" + curve_csv(cell.report.pr_points, "recall,precision"));
            if (!history.epochs.empty()) {
              write_text(*out_dir / "history" / (stem + ".csv"), prov + "\n" + history.to_csv());
            }
            if (config.save_models) {
              PipelineModel pm{std::move(model), arrangement.ordered_names, stats};
              pm.save(*out_dir / "models" / (stem + ".pgn4"));
            }
          }
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
          say("N=" + feature_count_label(count) + " " + method + " failed: " + cell.error);
        }
        run.cells.push_back(std::move(cell));
      }
    }
    result.runs.push_back(std::move(run));
  }

  if (out_dir) {
    write_text(*out_dir / "grid.csv", grid_csv(result));
    write_text(*out_dir / "grid.json", grid_json(result).dump(2) + "\n");
    write_text(*out_dir / "correlations.csv",
               prov + "\n" + correlations_csv(result.runs.front().correlations, config.rank));
    json split_j{{"seed", config.seed}, {"config_hash", result.config_hash}, {"runs", json::array()}};
    for (const auto& run : result.runs) {
      split_j["runs"].push_back({{"seed", run.seed}, {"train", run.train_indices}, {"valid", run.valid_indices}});
    }
    write_text(*out_dir / "split.json", split_j.dump() + "\n");
    json cfg = config.to_json();
    cfg["config_hash"] = result.config_hash;
    write_text(*out_dir / "config.json", cfg.dump(2) + "\n");
  }
  return result;
}

// ------------------------------------------------------------------ report rendering

namespace {

struct GridRow {
  std::string features;
  std::string method;
  bool ok = false;
  double metric[4] = {0, 0, 0, 0};
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.1f%%", v * 100.0);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_report(const std::filesystem::path& dir) {
  const auto grid_path = dir / "grid.csv";
  if (!std::filesystem::exists(grid_path)) {
    throw std::runtime_error("no grid.csv in " + dir.string());
  }
  std::istringstream in(read_text(grid_path));
  std::string line;
  std::string provenance;
  bool header_seen = false;
  // (features, method) -> per-repeat metric tuples; insertion order kept separately.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<GridRow>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      provenance = line.substr(1);
      continue;
    }
    if (!header_seen) {
      if (line.rfind("repeat,features,n_features,method,status", 0) != 0) {
        throw std::runtime_error("grid.csv: unexpected header");
      }
      header_seen = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() < 14) {
      throw std::runtime_error("grid.csv: line " + std::to_string(line_no) + " is malformed");
    }
    GridRow row;
    row.features = cells[1];
    row.method = cells[3];
    row.ok = cells[4] == "ok";
    if (row.ok) {
      for (int k = 0; k < 4; ++k) {
        try {
          row.metric[k] = std::stod(cells[5 + static_cast<std::size_t>(k)]);
        } catch (const std::exception&) {
          throw std::runtime_error("grid.csv: line " + std::to_string(line_no) +
                                   " has a non-numeric metric");
        }
      }
    }
    const auto key = std::make_pair(row.features, row.method);
    if (!rows.contains(key)) keys.push_back(key);
    rows[key].push_back(row);
  }
  if (!header_seen) throw std::runtime_error("grid.csv: missing header");

  // Aggregate (mean over repeats; a failed repeat fails the cell).
  struct Agg {
    bool ok = true;
    double mean[4] = {0, 0, 0, 0};
    double sd[4] = {0, 0, 0, 0};
    std::size_t n = 0;
  };
  std::map<std::pair<std::string, std::string>, Agg> agg;
  for (const auto& key : keys) {
    Agg a;
    const auto& rs = rows[key];
    a.n = rs.size();
    for (const auto& r : rs) a.ok = a.ok && r.ok;
    if (a.ok) {
      for (int k = 0; k < 4; ++k) {
        for (const auto& r : rs) a.mean[k] += r.metric[k];
        a.mean[k] /= static_cast<double>(rs.size());
        for (const auto& r : rs) a.sd[k] += (r.metric[k] - a.mean[k]) * (r.metric[k] - a.mean[k]);
        a.sd[k] = rs.size() > 1 ? std::sqrt(a.sd[k] / static_cast<double>(rs.size() - 1)) : 0.0;
      }
    }
    agg[key] = a;
  }

  // Best cell per column within each feature-count block is starred.
  std::map<std::string, double> best[4];
  for (const auto& key : keys) {
    const auto& a = agg[key];
    if (!a.ok) continue;
    for (int k = 0; k < 4; ++k) {
      auto it = best[k].find(key.first);
      if (it == best[k].end() || a.mean[k] > it->second) best[k][key.first] = a.mean[k];
    }
  }

  const bool multi = !keys.empty() && agg[keys.front()].n > 1;
  const std::size_t w = multi ? 17 : 10;
  std::ostringstream out;
  if (!provenance.empty()) out << "#" << provenance << "\n";
  out << pad("Feature", 9) << pad("Approach", 10) << pad("Acc", w) << pad("F1 Score", w)
      << pad("ROC AUC", w) << pad("PR AUC", w) << "\n";
  std::string last_features;
  for (const auto& key : keys) {
    const auto& a = agg[key];
    out << pad(key.first == last_features ? "" : key.first, 9) << pad(key.second, 10);
    last_features = key.first;
    for (int k = 0; k < 4; ++k) {
      std::string cell = "-";
      if (a.ok) {
        cell = pct(a.mean[k]);
        if (multi) cell += "+-" + pct(a.sd[k]);
        if (a.mean[k] == best[k][key.first]) cell += "*";
      }
      out << pad(cell, w);
    }
    out << "\n";
  }
  out << "(* best in feature block)\n";

  const auto corr_path = dir / "correlations.csv";
  if (std::filesystem::exists(corr_path)) {
    std::istringstream cin(read_text(corr_path));
    std::vector<std::pair<std::string, std::string>> top;
    bool seen_header = false;
    while (std::getline(cin, line) && top.size() < 5) {
      if (line.empty() || line[0] == '#') continue;
      if (!seen_header) {
        seen_header = true;
        continue;
      }
      const auto cells = split_csv_line(line);
      if (cells.size() != 2) throw std::runtime_error("correlations.csv is malformed");
      top.emplace_back(cells[0], cells[1]);
    }
    out << "\nTop " << top.size() << " features by |correlation with flag| (training split)\n";
    out << pad("Feature name", 32) << "Correlation coefficient\n";
    for (const auto& [name, corr] : top) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", std::stod(corr));
      out << pad(name, 32) << buf << "\n";
    }
  }
  return out.str();
}

}  // namespace pgd
