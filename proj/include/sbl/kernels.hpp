#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sbl {

// Basis-construction rule for the design matrix. LinearSpline and Gaussian
// expand one kernel column per training input; IdentityDesign passes the
// (already standardized) regressor matrix through unchanged for variable
// selection.
enum class KernelKind { LinearSpline, Gaussian, IdentityDesign };

struct KernelSpec {
  KernelKind kind = KernelKind::LinearSpline;
  double width = 0.0;  // Gaussian only, > 0

  static KernelSpec linear_spline();
  static KernelSpec gaussian(double width);
  static KernelSpec identity();

  [[nodiscard]] std::string name() const;
};

struct DesignMatrix {
  Eigen::MatrixXd values;          // N x M
  std::vector<int> column_origin;  // kernel regime: training-row index; identity: regressor index
  bool kernel_regime = false;

  [[nodiscard]] Eigen::Index rows() const { return values.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return values.cols(); }
};

// Evaluate the kernel for a single pair of points. Multivariate linear
// spline is the per-dimension product of the univariate spline kernel.
[[nodiscard]] double kernel_eval(const KernelSpec& spec,
                                 Eigen::Ref<const Eigen::VectorXd> a,
                                 Eigen::Ref<const Eigen::VectorXd> b);

// N x N symmetric kernel expansion (kernel regime) or pass-through (identity).
[[nodiscard]] DesignMatrix build_design(const KernelSpec& spec, const Eigen::MatrixXd& X);

// Kernel responses of query rows against reference rows:
// result(i, j) = K(X_star.row(i), X_ref.row(j)). Kernel regimes only.
[[nodiscard]] Eigen::MatrixXd kernel_cross(const KernelSpec& spec,
                                           const Eigen::MatrixXd& X_star,
                                           const Eigen::MatrixXd& X_ref);

// Median of the pairwise Euclidean distances between rows; the default
// Gaussian width when none is given. Rows are subsampled past 1000 points.
[[nodiscard]] double median_pairwise_distance(const Eigen::MatrixXd& X);

}  // namespace sbl
