#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sbl {

struct Dataset {
  Eigen::MatrixXd X;               // N x D
  Eigen::VectorXd y;               // N
  std::vector<std::string> names;  // D regressor labels
  std::string response_name;
  bool standardized = false;
  // Transform parameters, valid once standardized.
  Eigen::VectorXd x_center, x_scale;
  double y_center = 0.0;
  // 1-based data-row numbers dropped at load time (missing values).
  std::vector<int> dropped_rows;

  [[nodiscard]] Eigen::Index n_rows() const { return X.rows(); }
  [[nodiscard]] Eigen::Index n_cols() const { return X.cols(); }
};

// Header names of a CSV file, in order.
[[nodiscard]] std::vector<std::string> read_csv_header(const std::string& path);

// Strict numeric CSV with a header row. Rows containing empty/NA cells are
// dropped (row numbers recorded); non-numeric cells are errors.
[[nodiscard]] Dataset load_csv(const std::string& path, const std::string& response_column);

// Header + numeric matrix, zero rows allowed (predict-input reader).
[[nodiscard]] std::pair<std::vector<std::string>, Eigen::MatrixXd> load_csv_matrix(
    const std::string& path);

// Columns to mean 0 / unit N-1 variance, response mean-centred; transform
// parameters stored for the inverse. Errors name any constant column.
[[nodiscard]] Dataset standardize(const Dataset& ds);

// Inverse of standardize using the stored parameters.
[[nodiscard]] Dataset destandardize(const Dataset& ds);

// Apply existing transform parameters (e.g. a training split's) to ds.
[[nodiscard]] Dataset apply_standardization(const Dataset& ds, const Eigen::VectorXd& center,
                                            const Eigen::VectorXd& scale, double y_center);

// Seeded row partition into round(train_frac * N) training rows and the
// rest; the training split is standardized and its parameters applied to
// the test split (no leakage).
[[nodiscard]] std::pair<Dataset, Dataset> train_test_split(const Dataset& ds,
                                                           double train_frac,
                                                           std::uint64_t seed);

}  // namespace sbl
