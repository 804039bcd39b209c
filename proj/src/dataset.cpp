#include "pgdetect/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace pgd {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

std::size_t DatasetTable::positives() const {
  std::size_t n = 0;
  for (int y : labels) n += (y == 1);
  return n;
}

void DatasetTable::validate() const {
  if (feature_names.size() != features.cols()) {
    throw std::invalid_argument("DatasetTable: " + std::to_string(feature_names.size()) +
                                " names for " + std::to_string(features.cols()) + " columns");
  }
  if (labels.size() != features.rows()) {
    throw std::invalid_argument("DatasetTable: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(features.rows()) + " rows");
  }
  if (!row_ids.empty() && row_ids.size() != features.rows()) {
    throw std::invalid_argument("DatasetTable: row_ids length does not match row count");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("DatasetTable: label outside {0,1}");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names) {
    if (!seen.insert(name).second) {
      throw std::invalid_argument("DatasetTable: duplicate feature name '" + name + "'");
    }
  }
}

DatasetTable DatasetTable::subset(const std::vector<std::size_t>& indices) const {
  DatasetTable out;
  out.feature_names = feature_names;
  out.features = Matrix(indices.size(), cols());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = features.row(indices[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(labels[indices[i]]);
    if (!row_ids.empty()) out.row_ids.push_back(row_ids[indices[i]]);
  }
  return out;
}

std::optional<std::size_t> DatasetTable::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    if (feature_names[i] == name) return i;
  }
  return std::nullopt;
}

DatasetTable parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw std::runtime_error("load_csv: empty file (no header row)");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  const std::unordered_set<std::string> excluded(options.exclude_columns.begin(),
                                                 options.exclude_columns.end());
  std::optional<std::size_t> label_idx;
  std::optional<std::size_t> id_idx;
  std::vector<std::size_t> keep;
  DatasetTable table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == options.label_column) {
      label_idx = c;
    } else if (!options.id_column.empty() && header[c] == options.id_column) {
      id_idx = c;
    } else if (!excluded.contains(header[c])) {
      keep.push_back(c);
      table.feature_names.push_back(header[c]);
    }
  }
  if (!label_idx) {
    throw std::runtime_error("load_csv: label column '" + options.label_column + "' not found");
  }

  std::vector<double> values;
  std::size_t row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("load_csv: row " + std::to_string(row) + " (line " +
                               std::to_string(line_no) + ") has " +
                               std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const std::string cell = trim(cells[keep[k]]);
      const auto v = parse_number(cell);
      if (!v) {
        throw std::runtime_error("load_csv: non-numeric value '" + cell + "' at row " +
                                 std::to_string(row) + ", column \"" + header[keep[k]] + "\"");
      }
      values.push_back(*v);
    }
    const std::string label = trim(cells[*label_idx]);
    if (label == "0") {
      table.labels.push_back(0);
    } else if (label == "1") {
      table.labels.push_back(1);
    } else {
      throw std::runtime_error("load_csv: label '" + label + "' at row " + std::to_string(row) +
                               " is not 0 or 1");
    }
    if (id_idx) table.row_ids.push_back(trim(cells[*id_idx]));
  }
  if (row == 0) throw std::runtime_error("load_csv: file has a header but no data rows");
  table.features = Matrix(row, keep.size(), std::move(values));
  table.validate();
  return table;
}

DatasetTable load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string to_csv(const DatasetTable& table, const std::string& label_column) {
  std::string out;
  for (const auto& name : table.feature_names) out += name + ",";
  out += label_column + "\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (double v : table.features.row(r)) {
      out += format_double(v);
      out += ',';
    }
    out += table.labels[r] ? "1\n" : "0\n";
  }
  return out;
}

void write_csv(const DatasetTable& table, const std::filesystem::path& path,
               const std::string& label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string() + " for writing");
  out << to_csv(table, label_column);
  if (!out) throw std::runtime_error("write_csv: write failed for " + path.string());
}

Split split_train_valid(const DatasetTable& table, double valid_fraction, Rng& rng) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw std::invalid_argument("split_train_valid: valid_fraction must be in (0, 1)");
  }
  if (table.rows() == 0) throw std::invalid_argument("split_train_valid: empty table");
  const auto n_valid =
      static_cast<std::size_t>(std::floor(static_cast<double>(table.rows()) * valid_fraction + 0.5));
  auto order = rng.permutation(table.rows());
  Split split;
  split.valid_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_valid));
  split.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_valid), order.end());
  split.train = table.subset(split.train_indices);
  split.valid = table.subset(split.valid_indices);
  return split;
}

StandardizeStats fit_standardize(const DatasetTable& train) {
  if (train.rows() == 0) throw std::invalid_argument("standardize: empty training table");
  StandardizeStats stats;
  const std::size_t n = train.rows();
  const std::size_t f = train.cols();
  stats.mean.assign(f, 0.0);
  stats.std.assign(f, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = train.features.row(r);
    for (std::size_t c = 0; c < f; ++c) stats.mean[c] += row[c];
  }
  for (auto& m : stats.mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = train.features.row(r);
    for (std::size_t c = 0; c < f; ++c) {
      const double d = row[c] - stats.mean[c];
      stats.std[c] += d * d;
    }
  }
  for (auto& s : stats.std) s = std::sqrt(s / static_cast<double>(n));
  return stats;
}

void StandardizeStats::apply(DatasetTable& table) const {
  if (table.cols() != mean.size()) {
    throw std::invalid_argument("standardize: table has " + std::to_string(table.cols()) +
                                " features, statistics cover " + std::to_string(mean.size()));
  }
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto row = table.features.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = std[c] > 0.0 ? (row[c] - mean[c]) / std[c] : 0.0;
    }
  }
}

std::pair<std::vector<DatasetTable>, StandardizeStats> standardize(
    const DatasetTable& train, const std::vector<DatasetTable>& others) {
  StandardizeStats stats = fit_standardize(train);
  std::vector<DatasetTable> out;
  out.reserve(others.size() + 1);
  out.push_back(train);
  for (const auto& t : others) out.push_back(t);
  for (auto& t : out) stats.apply(t);
  return {std::move(out), std::move(stats)};
}

}  // namespace pgd
