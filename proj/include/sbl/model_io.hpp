#pragma once

#include "sbl/kernels.hpp"
#include "sbl/predict.hpp"
#include "sbl/types.hpp"

#include <string>
#include <vector>

namespace sbl {

// Self-contained serialized model: everything predict needs. Kernel regimes
// store the relevance input rows; identity models store standardization
// parameters so raw inputs can be transformed.
struct ModelFile {
  int version = 1;
  PriorRule rule = PriorRule::BLS;
  KernelSpec kernel;
  bool converged = false;
  int iterations = 0;
  std::int64_t seed = 0;
  double lambda_hat = 0.0;
  double sigma2_hat = 0.0;
  double final_logml = 0.0;
  std::vector<int> relevance_indices;  // original column indices
  Eigen::VectorXd weights;
  Eigen::VectorXd tau_active;
  Eigen::MatrixXd Sigma;
  Eigen::MatrixXd relevance_inputs;  // kernel regimes: L x D training rows
  // Header names, when known, let predict rearrange inputs and drop a stray
  // response column.
  std::vector<std::string> feature_names;
  std::string response_name;
  // Identity regime only:
  Eigen::VectorXd x_center, x_scale;
  double y_center = 0.0;
};

// Assemble a ModelFile from a fit. train_X: full training inputs (kernel
// regimes; relevance rows are extracted). For identity models pass the
// standardization parameters instead. Feature and response names may be
// given for either regime.
[[nodiscard]] ModelFile make_model_file(const FitResult& fit, const KernelSpec& kernel,
                                        const Eigen::MatrixXd& train_X,
                                        std::int64_t seed,
                                        const std::vector<std::string>& feature_names = {},
                                        const Eigen::VectorXd& x_center = {},
                                        const Eigen::VectorXd& x_scale = {},
                                        double y_center = 0.0,
                                        const std::string& response_name = "");

void save_model(const std::string& path, const ModelFile& model);
[[nodiscard]] ModelFile load_model(const std::string& path);

// Predict from a loaded model on raw-scale inputs. Identity models
// standardize internally and report means on the raw response scale.
[[nodiscard]] std::vector<Prediction> predict_from_model(const ModelFile& model,
                                                         const Eigen::MatrixXd& X_raw,
                                                         double coverage = 0.95);

}  // namespace sbl
