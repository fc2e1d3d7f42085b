#pragma once

#include "sbl/kernels.hpp"
#include "sbl/types.hpp"

#include <vector>

namespace sbl {

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // includes the noise floor sigma2_hat
  double lo = 0.0, hi = 0.0;
};

// Inverse standard normal CDF (Acklam's rational approximation plus one
// Newton step); p in (0, 1).
[[nodiscard]] double normal_quantile(double p);

// Predictive normal at one query point.
//   kernel regimes: phi_j = K(x_star, train_X.row(relevance_indices[j]))
//   identity:       phi_j = x_star(relevance_indices[j]), train_X unused
// mean = phi' mu, variance = sigma2_hat + phi' Sigma phi; interval at the
// requested two-sided coverage.
[[nodiscard]] Prediction predict_one(const FitResult& fit, const KernelSpec& spec,
                                     const Eigen::MatrixXd& train_X,
                                     Eigen::Ref<const Eigen::VectorXd> x_star,
                                     double coverage = 0.95);

// Row-wise predict_one, preserving order.
[[nodiscard]] std::vector<Prediction> predict_batch(const FitResult& fit,
                                                    const KernelSpec& spec,
                                                    const Eigen::MatrixXd& train_X,
                                                    const Eigen::MatrixXd& X_star,
                                                    double coverage = 0.95);

}  // namespace sbl
