#include "pgdetect/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pgd {

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 observations");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  const double r = sxy / std::sqrt(sxx * syy);
  return {std::clamp(r, -1.0, 1.0), false};
}

CorrelationReport correlation_report(const DatasetTable& table) {
  if (table.rows() == 0) throw std::invalid_argument("correlation_report: empty table");
  const std::size_t f = table.cols();
  CorrelationReport report;
  report.feature_names = table.feature_names;
  report.flag_corr.assign(f, 0.0);
  report.degenerate.assign(f, false);
  report.pairwise = Matrix(f, f);

  std::vector<std::vector<double>> cols(f);
  for (std::size_t c = 0; c < f; ++c) cols[c] = table.features.column(c);
  const std::vector<double> flags(table.labels.begin(), table.labels.end());

  for (std::size_t i = 0; i < f; ++i) {
    const auto res = pearson(cols[i], flags);
    report.flag_corr[i] = res.r;
    // A column is degenerate when it has no variance; a single-class label
    // vector also yields 0 here without marking the feature.
    report.degenerate[i] = pearson(cols[i], cols[i]).degenerate;
  }
  for (std::size_t i = 0; i < f; ++i) {
    report.pairwise(i, i) = report.degenerate[i] ? 0.0 : 1.0;
    for (std::size_t j = i + 1; j < f; ++j) {
      const double r = pearson(cols[i], cols[j]).r;
      report.pairwise(i, j) = r;
      report.pairwise(j, i) = r;
    }
  }
  return report;
}

std::vector<std::size_t> rank_features(const CorrelationReport& report, RankBy rank) {
  const std::size_t f = report.flag_corr.size();
  auto score = [&](std::size_t i) {
    return rank == RankBy::Absolute ? std::abs(report.flag_corr[i]) : report.flag_corr[i];
  };
  std::vector<std::size_t> order(f);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (report.degenerate[a] != report.degenerate[b]) return !report.degenerate[a];
    return score(a) > score(b);
  });
  return order;
}

FeatureArrangement select_and_arrange(const CorrelationReport& report, std::size_t count,
                                      RankBy rank) {
  const auto usable = static_cast<std::size_t>(
      std::count(report.degenerate.begin(), report.degenerate.end(), false));
  if (count < 1 || count > usable) {
    throw std::invalid_argument("select_and_arrange: N=" + std::to_string(count) +
                                " outside [1, " + std::to_string(usable) +
                                "] (non-degenerate features)");
  }
  const auto order = rank_features(report, rank);
  // Pool in rank order; position in `pool` doubles as anchor priority.
  std::vector<std::size_t> pool(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));

  std::vector<bool> placed(count, false);
  std::vector<std::size_t> arranged;
  arranged.reserve(count);
  std::size_t next_anchor = 0;
  while (arranged.size() < count) {
    while (placed[next_anchor]) ++next_anchor;
    const std::size_t anchor = next_anchor;
    placed[anchor] = true;
    arranged.push_back(pool[anchor]);

    // Most |C_f|-correlated unplaced partner; ties go to the lower column index.
    std::size_t best = count;
    double best_corr = -1.0;
    for (std::size_t k = 0; k < count; ++k) {
      if (placed[k]) continue;
      const double c = std::abs(report.pairwise(pool[anchor], pool[k]));
      if (c > best_corr || (c == best_corr && pool[k] < pool[best])) {
        best = k;
        best_corr = c;
      }
    }
    if (best < count) {
      placed[best] = true;
      arranged.push_back(pool[best]);
    }
  }

  FeatureArrangement out;
  out.count = count;
  for (std::size_t idx : pool) out.candidate_pool.push_back(report.feature_names[idx]);
  for (std::size_t idx : arranged) out.ordered_names.push_back(report.feature_names[idx]);
  return out;
}

DatasetTable project(const DatasetTable& table, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  for (const auto& name : names) {
    const auto idx = table.index_of(name);
    if (!idx) throw std::invalid_argument("project: unknown feature '" + name + "'");
    cols.push_back(*idx);
  }
  DatasetTable out;
  out.feature_names = names;
  out.labels = table.labels;
  out.row_ids = table.row_ids;
  out.features = Matrix(table.rows(), cols.size());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto src = table.features.row(r);
    auto dst = out.features.row(r);
    for (std::size_t k = 0; k < cols.size(); ++k) dst[k] = src[cols[k]];
  }
  return out;
}

DatasetTable project(const DatasetTable& table, const FeatureArrangement& arrangement) {
  return project(table, arrangement.ordered_names);
}

}  // namespace pgd
