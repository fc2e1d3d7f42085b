#include "sbl/predict.hpp"

#include <cmath>
#include <stdexcept>

namespace sbl {
namespace {

// Acklam's rational approximation to the probit function, accurate to
// ~1.15e-9; one Newton step with the exact CDF brings it to full precision.
double acklam_probit(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double u = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
           ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double u = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
           ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  const double u = p - 0.5;
  const double r = u * u;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

Eigen::VectorXd relevance_responses(const FitResult& fit, const KernelSpec& spec,
                                    const Eigen::MatrixXd& train_X,
                                    Eigen::Ref<const Eigen::VectorXd> x_star) {
  const Eigen::Index L = static_cast<Eigen::Index>(fit.relevance_indices.size());
  Eigen::VectorXd phi(L);
  if (spec.kind == KernelKind::IdentityDesign) {
    for (Eigen::Index k = 0; k < L; ++k) {
      const int j = fit.relevance_indices[static_cast<size_t>(k)];
      if (j < 0 || j >= x_star.size())
        throw std::invalid_argument("predict: input has fewer columns than the model");
      phi(k) = x_star(j);
    }
    return phi;
  }
  if (x_star.size() != train_X.cols())
    throw std::invalid_argument("predict: input dimension differs from training inputs");
  for (Eigen::Index k = 0; k < L; ++k) {
    const int j = fit.relevance_indices[static_cast<size_t>(k)];
    if (j < 0 || j >= train_X.rows())
      throw std::invalid_argument("predict: relevance index outside the training inputs");
    phi(k) = kernel_eval(spec, x_star, train_X.row(j));
  }
  return phi;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  double x = acklam_probit(p);
  x -= (normal_cdf(x) - p) / normal_pdf(x);
  return x;
}

Prediction predict_one(const FitResult& fit, const KernelSpec& spec,
                       const Eigen::MatrixXd& train_X,
                       Eigen::Ref<const Eigen::VectorXd> x_star, double coverage) {
  if (!x_star.allFinite()) throw std::invalid_argument("predict: non-finite input");
  if (!(coverage > 0.0) || !(coverage < 1.0))
    throw std::invalid_argument("predict: coverage must be in (0, 1)");

  Prediction out;
  out.variance = fit.sigma2_hat;
  if (!fit.relevance_indices.empty()) {
    const Eigen::VectorXd phi = relevance_responses(fit, spec, train_X, x_star);
    out.mean = phi.dot(fit.weights);
    out.variance += phi.dot(fit.Sigma * phi);
  }
  const double z = normal_quantile(0.5 * (1.0 + coverage));
  const double half = z * std::sqrt(out.variance);
  out.lo = out.mean - half;
  out.hi = out.mean + half;
  return out;
}

std::vector<Prediction> predict_batch(const FitResult& fit, const KernelSpec& spec,
                                      const Eigen::MatrixXd& train_X,
                                      const Eigen::MatrixXd& X_star, double coverage) {
  std::vector<Prediction> out;
  out.reserve(static_cast<size_t>(X_star.rows()));
  for (Eigen::Index i = 0; i < X_star.rows(); ++i)
    out.push_back(predict_one(fit, spec, train_X, X_star.row(i), coverage));
  return out;
}

}  // namespace sbl
