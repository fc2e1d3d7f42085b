#include "sbl/dataio.hpp"

#include "sbl/types.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace sbl {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back("");
  return cells;
}

bool is_missing(const std::string& cell) {
  if (cell.empty()) return true;
  std::string upper = cell;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  return upper == "NA" || upper == "NAN" || upper == "NULL";
}

double parse_cell(const std::string& cell, int row, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    std::ostringstream msg;
    msg << "non-numeric cell '" << cell << "' at data row " << row << ", column '" << column
        << "'";
    throw DataError(msg.str());
  }
  return value;
}

struct RawTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::vector<int> dropped_rows;  // 1-based data-row numbers
};

RawTable read_table(const std::string& path, bool allow_missing) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file '" + path + "'");

  RawTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
  table.names = split_csv_line(line);
  if (table.names.empty() || std::any_of(table.names.begin(), table.names.end(),
                                         [](const std::string& n) { return n.empty(); }))
    throw DataError("malformed header in '" + path + "'");

  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != table.names.size()) {
      std::ostringstream msg;
      msg << "data row " << row << " has " << cells.size() << " cells, expected "
          << table.names.size();
      throw DataError(msg.str());
    }
    if (allow_missing &&
        std::any_of(cells.begin(), cells.end(), [](const std::string& c) { return is_missing(c); })) {
      table.dropped_rows.push_back(row);
      continue;
    }
    std::vector<double> values(cells.size());
    for (size_t j = 0; j < cells.size(); ++j) {
      if (is_missing(cells[j]))
        throw DataError("missing value at data row " + std::to_string(row) + ", column '" +
                        table.names[j] + "'");
      values[j] = parse_cell(cells[j], row, table.names[j]);
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

Dataset take_rows(const Dataset& ds, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.names = ds.names;
  out.response_name = ds.response_name;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index k = 0; k < out.X.rows(); ++k) {
    out.X.row(k) = ds.X.row(rows[static_cast<size_t>(k)]);
    out.y(k) = ds.y(rows[static_cast<size_t>(k)]);
  }
  return out;
}

}  // namespace

std::vector<std::string> read_csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file '" + path + "'");
  auto names = split_csv_line(line);
  if (names.empty()) throw DataError("malformed header in '" + path + "'");
  return names;
}

Dataset load_csv(const std::string& path, const std::string& response_column) {
  const RawTable table = read_table(path, /*allow_missing=*/true);

  const auto it = std::find(table.names.begin(), table.names.end(), response_column);
  if (it == table.names.end())
    throw DataError("response column '" + response_column + "' not found in '" + path + "'");
  const size_t resp = static_cast<size_t>(it - table.names.begin());

  if (table.rows.empty()) throw DataError("empty data: no usable rows in '" + path + "'");

  Dataset ds;
  ds.response_name = response_column;
  ds.dropped_rows = table.dropped_rows;
  for (size_t j = 0; j < table.names.size(); ++j)
    if (j != resp) ds.names.push_back(table.names[j]);

  const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(table.names.size()) - 1;
  ds.X.resize(n, d);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<size_t>(i)];
    Eigen::Index col = 0;
    for (size_t j = 0; j < row.size(); ++j) {
      if (j == resp)
        ds.y(i) = row[j];
      else
        ds.X(i, col++) = row[j];
    }
  }
  return ds;
}

std::pair<std::vector<std::string>, Eigen::MatrixXd> load_csv_matrix(const std::string& path) {
  const RawTable table = read_table(path, /*allow_missing=*/false);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(table.names.size()));
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      values(i, j) = table.rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return {table.names, values};
}

Dataset standardize(const Dataset& ds) {
  if (ds.n_rows() < 2) throw DataError("standardize: need at least 2 rows");
  Dataset out = ds;
  out.x_center.resize(ds.n_cols());
  out.x_scale.resize(ds.n_cols());
  for (Eigen::Index j = 0; j < ds.n_cols(); ++j) {
    const double mean = ds.X.col(j).mean();
    const double sd = std::sqrt(sample_variance(ds.X.col(j)));
    if (sd <= 0.0 || sd < 1e-12 * std::max(1.0, std::abs(mean))) {
      const std::string name = j < static_cast<Eigen::Index>(ds.names.size())
                                   ? ds.names[static_cast<size_t>(j)]
                                   : ("#" + std::to_string(j));
      throw DataError("constant column '" + name + "' cannot be standardized");
    }
    out.x_center(j) = mean;
    out.x_scale(j) = sd;
    out.X.col(j) = (ds.X.col(j).array() - mean) / sd;
  }
  out.y_center = ds.y.mean();
  out.y = ds.y.array() - out.y_center;
  out.standardized = true;
  return out;
}

Dataset destandardize(const Dataset& ds) {
  if (!ds.standardized) throw std::invalid_argument("destandardize: dataset is not standardized");
  Dataset out = ds;
  for (Eigen::Index j = 0; j < ds.n_cols(); ++j)
    out.X.col(j) = ds.X.col(j).array() * ds.x_scale(j) + ds.x_center(j);
  out.y = ds.y.array() + ds.y_center;
  out.standardized = false;
  out.x_center.resize(0);
  out.x_scale.resize(0);
  out.y_center = 0.0;
  return out;
}

Dataset apply_standardization(const Dataset& ds, const Eigen::VectorXd& center,
                              const Eigen::VectorXd& scale, double y_center) {
  if (center.size() != ds.n_cols() || scale.size() != ds.n_cols())
    throw std::invalid_argument("apply_standardization: parameter length mismatch");
  Dataset out = ds;
  for (Eigen::Index j = 0; j < ds.n_cols(); ++j)
    out.X.col(j) = (ds.X.col(j).array() - center(j)) / scale(j);
  out.y = ds.y.array() - y_center;
  out.standardized = true;
  out.x_center = center;
  out.x_scale = scale;
  out.y_center = y_center;
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double train_frac,
                                             std::uint64_t seed) {
  if (!(train_frac > 0.0) || !(train_frac < 1.0))
    throw std::invalid_argument("train_test_split: train_frac must be in (0, 1)");
  const Eigen::Index n = ds.n_rows();
  Eigen::Index n_train = static_cast<Eigen::Index>(
      std::llround(train_frac * static_cast<double>(n)));
  n_train = std::clamp<Eigen::Index>(n_train, 1, n - 1);
  if (n_train < 2) throw DataError("train_test_split: split leaves fewer than 2 training rows");

  std::vector<Eigen::Index> perm(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  std::mt19937_64 gen(seed);
  std::shuffle(perm.begin(), perm.end(), gen);

  std::vector<Eigen::Index> train_rows(perm.begin(), perm.begin() + n_train);
  std::vector<Eigen::Index> test_rows(perm.begin() + n_train, perm.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  Dataset train = standardize(take_rows(ds, train_rows));
  Dataset test = apply_standardization(take_rows(ds, test_rows), train.x_center,
                                       train.x_scale, train.y_center);
  return {std::move(train), std::move(test)};
}

}  // namespace sbl
