#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgdetect/baselines.hpp"
#include "pgdetect/dataset.hpp"
#include "pgdetect/features.hpp"
#include "pgdetect/metrics.hpp"
#include "pgdetect/training.hpp"

namespace pgd {

inline const std::vector<std::string> kAllMethods{"pgn4", "svm", "dt", "rf", "ada", "nn"};

/// 0 stands for "full" (every non-degenerate feature).
using FeatureCount = std::size_t;
inline constexpr FeatureCount kFullFeatures = 0;

std::string feature_count_label(FeatureCount n);
/// Parses "5,10,20,50,full".
std::vector<FeatureCount> parse_feature_counts(const std::string& text);
std::vector<std::string> parse_methods(const std::string& text);

struct ExperimentConfig {
  std::string data_path;           // CSV input; empty when `preset` is used
  std::string preset;              // synthetic preset name
  std::string label_column = "flag";
  std::vector<std::string> exclude_columns{"rg_reason"};
  std::vector<FeatureCount> feature_counts{5, 10, 20, 50, kFullFeatures};
  std::vector<std::string> methods = kAllMethods;
  TrainConfig train;
  std::uint64_t seed = 42;
  double valid_fraction = 0.25;
  bool standardize = true;
  /// Rank features on the whole table instead of the training split.
  bool select_on_full_table = false;
  RankBy rank = RankBy::Absolute;
  ActivationKind activation = ActivationKind::Relu;
  double dropout_rate = 0.0;
  std::size_t tree_max_depth = 6;
  std::size_t tree_min_leaf = 1;
  std::size_t forest_trees = 100;
  std::size_t boost_rounds = 100;
  double svm_lambda = 1e-3;
  std::size_t svm_epochs = 20;
  std::size_t nn_hidden = 128;
  std::size_t repeats = 1;
  bool save_models = true;
  std::string out_dir = "results";

  void validate() const;
  nlohmann::json to_json() const;
  /// Fields missing from `j` keep their current values.
  void merge_json(const nlohmann::json& j);
  /// Hex FNV-1a of the canonical JSON, excluding out_dir.
  std::string hash() const;
};

/// Loads the CSV or generates the preset named by the config.
DatasetTable load_experiment_data(const ExperimentConfig& config);

struct SweepCell {
  FeatureCount count = 0;
  std::size_t n_features = 0;  // resolved count actually used
  std::string method;
  bool ok = false;
  std::string error;
  EvalReport report;
};

struct SweepRun {
  std::uint64_t seed = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> valid_indices;
  CorrelationReport correlations;
  std::vector<std::pair<FeatureCount, FeatureArrangement>> arrangements;
  std::vector<SweepCell> cells;
  std::vector<FeatureCount> skipped;
};

struct SweepResult {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<SweepRun> runs;  // one per repeat

  bool all_ok() const;
};

using LogFn = std::function<void(const std::string&)>;

/// Fits one method on prepared (projected, standardized) tables.
std::unique_ptr<Classifier> fit_method(const std::string& method, const DatasetTable& train,
                                       const DatasetTable& valid, const ExperimentConfig& config,
                                       std::uint64_t seed, TrainHistory* history = nullptr);

/// Classifier plus the input recipe (feature order and standardization) it was trained with.
struct PipelineModel {
  std::unique_ptr<Classifier> classifier;
  std::vector<std::string> feature_names;
  std::optional<StandardizeStats> stats;

  std::vector<double> score(const DatasetTable& table) const;
  void save(const std::filesystem::path& path) const;
  static PipelineModel load(const std::filesystem::path& path);
};

/// split -> correlations (train only) -> per N: arrange, project, standardize,
/// fit every method, evaluate on validation. Cell failures are recorded, not thrown.
/// When `out_dir` is set, artifacts are written there.
SweepResult run_sweep(const ExperimentConfig& config, const DatasetTable& data,
                      const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                      const LogFn& log = {});

/// Table-5-style rows: rank, feature, flag correlation, sorted by |corr| descending.
std::string top_features_csv(const CorrelationReport& report, const std::vector<std::string>& pool,
                             const std::string& provenance_line);

/// "feature,flag_correlation" for every feature, sorted by |corr| descending.
std::string correlations_csv(const CorrelationReport& report, RankBy rank = RankBy::Absolute);

std::string grid_csv(const SweepResult& result);
nlohmann::json grid_json(const SweepResult& result);

/// Aligned text rendering of a results directory; throws on missing or corrupt files.
std::string render_report(const std::filesystem::path& results_dir);

}  // namespace pgd
