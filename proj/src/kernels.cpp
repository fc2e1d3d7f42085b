#include "sbl/kernels.hpp"

#include "sbl/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sbl {
namespace {

// Univariate linear spline kernel:
//   K(x, x') = 1 + x x' + x x' min(x,x')
//              - ((x + x')/2) min(x,x')^2 + ((x + x')/3) min(x,x')^3
double spline_1d(double x, double y) {
  const double m = std::min(x, y);
  return 1.0 + x * y + x * y * m - 0.5 * (x + y) * m * m + (x + y) * m * m * m / 3.0;
}

double eval_pair(const KernelSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  switch (spec.kind) {
    case KernelKind::LinearSpline: {
      double k = 1.0;
      for (Eigen::Index d = 0; d < a.size(); ++d) k *= spline_1d(a(d), b(d));
      return k;
    }
    case KernelKind::Gaussian: {
      const double d2 = (a - b).squaredNorm();
      return std::exp(-d2 / (2.0 * spec.width * spec.width));
    }
    case KernelKind::IdentityDesign:
      throw std::invalid_argument("identity design has no kernel function");
  }
  throw std::logic_error("unreachable kernel kind");
}

}  // namespace

KernelSpec KernelSpec::linear_spline() { return {KernelKind::LinearSpline, 0.0}; }

KernelSpec KernelSpec::gaussian(double width) {
  if (!(width > 0.0) || !std::isfinite(width))
    throw std::invalid_argument("gaussian kernel width must be positive");
  return {KernelKind::Gaussian, width};
}

KernelSpec KernelSpec::identity() { return {KernelKind::IdentityDesign, 0.0}; }

std::string KernelSpec::name() const {
  switch (kind) {
    case KernelKind::LinearSpline: return "spline";
    case KernelKind::Gaussian: return "gaussian:" + std::to_string(width);
    case KernelKind::IdentityDesign: return "identity";
  }
  return "?";
}

double kernel_eval(const KernelSpec& spec, Eigen::Ref<const Eigen::VectorXd> a,
                   Eigen::Ref<const Eigen::VectorXd> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
  if (!a.allFinite() || !b.allFinite())
    throw std::invalid_argument("kernel_eval: non-finite input");
  const double k = eval_pair(spec, a, b);
  if (!std::isfinite(k)) throw NumericalError("kernel_eval: non-finite kernel value");
  return k;
}

DesignMatrix build_design(const KernelSpec& spec, const Eigen::MatrixXd& X) {
  if (X.rows() < 1) throw std::invalid_argument("build_design: empty input");
  if (!X.allFinite()) throw std::invalid_argument("build_design: non-finite input");

  DesignMatrix phi;
  if (spec.kind == KernelKind::IdentityDesign) {
    phi.values = X;
    phi.kernel_regime = false;
    phi.column_origin.resize(static_cast<size_t>(X.cols()));
    for (int j = 0; j < X.cols(); ++j) phi.column_origin[static_cast<size_t>(j)] = j;
    return phi;
  }

  const Eigen::Index n = X.rows();
  phi.values.resize(n, n);
  // Fill the upper triangle and mirror so the Gram matrix is exactly symmetric.
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = X.row(i);
    for (Eigen::Index j = i; j < n; ++j) {
      const double k = eval_pair(spec, xi, X.row(j));
      phi.values(i, j) = k;
      phi.values(j, i) = k;
    }
  }
  if (!phi.values.allFinite()) throw NumericalError("build_design: non-finite kernel value");
  phi.kernel_regime = true;
  phi.column_origin.resize(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) phi.column_origin[static_cast<size_t>(j)] = j;
  return phi;
}

Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const Eigen::MatrixXd& X_star,
                             const Eigen::MatrixXd& X_ref) {
  if (spec.kind == KernelKind::IdentityDesign)
    throw std::invalid_argument("kernel_cross: identity design has no kernel function");
  if (X_star.cols() != X_ref.cols())
    throw std::invalid_argument("kernel_cross: dimension mismatch");
  Eigen::MatrixXd K(X_star.rows(), X_ref.rows());
  for (Eigen::Index i = 0; i < X_star.rows(); ++i)
    for (Eigen::Index j = 0; j < X_ref.rows(); ++j)
      K(i, j) = eval_pair(spec, X_star.row(i), X_ref.row(j));
  if (!K.allFinite()) throw NumericalError("kernel_cross: non-finite kernel value");
  return K;
}

double median_pairwise_distance(const Eigen::MatrixXd& X) {
  const Eigen::Index n_all = X.rows();
  if (n_all < 2) throw std::invalid_argument("median_pairwise_distance: need at least 2 rows");

  // Deterministic subsample keeps this O(10^6) for large inputs.
  constexpr Eigen::Index kMaxRows = 1000;
  std::vector<Eigen::Index> rows(static_cast<size_t>(n_all));
  for (Eigen::Index i = 0; i < n_all; ++i) rows[static_cast<size_t>(i)] = i;
  if (n_all > kMaxRows) {
    std::mt19937_64 gen(12345);
    std::shuffle(rows.begin(), rows.end(), gen);
    rows.resize(static_cast<size_t>(kMaxRows));
    std::sort(rows.begin(), rows.end());
  }

  std::vector<double> dists;
  dists.reserve(rows.size() * (rows.size() - 1) / 2);
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = i + 1; j < rows.size(); ++j)
      dists.push_back((X.row(rows[i]) - X.row(rows[j])).norm());

  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double med = *mid;
  if (dists.size() % 2 == 0) {
    // Lower-half maximum completes the even-count median.
    const double lower = *std::max_element(dists.begin(), mid);
    med = 0.5 * (med + lower);
  }
  if (!(med > 0.0)) throw DataError("median_pairwise_distance: duplicate rows give zero width");
  return med;
}

}  // namespace sbl
