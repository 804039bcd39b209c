#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pgdetect/dataset.hpp"
#include "pgdetect/tensor.hpp"

namespace pgd {

struct PearsonResult {
  double r = 0.0;
  /// Set when either input has zero variance; r is then 0.
  bool degenerate = false;
};

PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Flag correlations C(i) and the feature-feature matrix C_f(i, j).
struct CorrelationReport {
  std::vector<std::string> feature_names;
  std::vector<double> flag_corr;
  std::vector<bool> degenerate;
  Matrix pairwise;
};

CorrelationReport correlation_report(const DatasetTable& table);

enum class RankBy { Absolute, Signed };

/// Ordered subset of features fed to the network: `ordered_names` is a
/// permutation of `candidate_pool` with highly correlated features adjacent.
struct FeatureArrangement {
  std::vector<std::string> ordered_names;
  std::vector<std::string> candidate_pool;
  std::size_t count = 0;
};

/// Pool = the N non-degenerate features ranked highest by flag correlation
/// (ties to the lower column index). Arrangement is a greedy chain: the best
/// unplaced pool member becomes an anchor, and its most correlated unplaced
/// pool partner (by |C_f|) is placed right after it.
FeatureArrangement select_and_arrange(const CorrelationReport& report, std::size_t count,
                                      RankBy rank = RankBy::Absolute);

/// Feature indices sorted by descending rank score, degenerate features last.
std::vector<std::size_t> rank_features(const CorrelationReport& report,
                                       RankBy rank = RankBy::Absolute);

DatasetTable project(const DatasetTable& table, const FeatureArrangement& arrangement);
DatasetTable project(const DatasetTable& table, const std::vector<std::string>& names);

}  // namespace pgd
