#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgdetect/rng.hpp"
#include "pgdetect/tensor.hpp"

namespace pgd {

/// Numeric behavioral features plus binary RG flags (1 = flagged).
struct DatasetTable {
  std::vector<std::string> feature_names;
  Matrix features;           // rows = users, cols = features
  std::vector<int> labels;   // one flag per row
  std::vector<std::string> row_ids;  // empty, or one id per row

  std::size_t rows() const { return features.rows(); }
  std::size_t cols() const { return features.cols(); }
  std::size_t positives() const;

  /// Throws std::invalid_argument when any table invariant is broken.
  void validate() const;

  /// Copy of the rows listed in `indices`, in that order.
  DatasetTable subset(const std::vector<std::size_t>& indices) const;
  std::optional<std::size_t> index_of(const std::string& name) const;
};

struct CsvOptions {
  std::string label_column = "flag";
  std::vector<std::string> exclude_columns;
  /// Column copied verbatim into row_ids instead of being parsed as a feature.
  std::string id_column;
};

DatasetTable load_csv(const std::filesystem::path& path, const CsvOptions& options);
DatasetTable parse_csv(const std::string& text, const CsvOptions& options);

/// Header: features then the label column. Values use shortest round-trip formatting.
std::string to_csv(const DatasetTable& table, const std::string& label_column = "flag");
void write_csv(const DatasetTable& table, const std::filesystem::path& path,
               const std::string& label_column = "flag");

struct Split {
  DatasetTable train;
  DatasetTable valid;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> valid_indices;
};

/// Validation size is round-half-up of rows * valid_fraction, chosen by a seeded shuffle.
Split split_train_valid(const DatasetTable& table, double valid_fraction, Rng& rng);

struct StandardizeStats {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation

  void apply(DatasetTable& table) const;
};

StandardizeStats fit_standardize(const DatasetTable& train);

/// z-scores every table with statistics from `train`; zero-variance features become 0.
std::pair<std::vector<DatasetTable>, StandardizeStats> standardize(
    const DatasetTable& train, const std::vector<DatasetTable>& others);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace pgd
