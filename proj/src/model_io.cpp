#include "sbl/model_io.hpp"

#include "sbl/dataio.hpp"

#include <json.hpp>

#include <fstream>

namespace sbl {
namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = arr[static_cast<size_t>(i)].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index expect_cols = -1) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) return Eigen::MatrixXd(0, std::max<Eigen::Index>(expect_cols, 0));
  const Eigen::Index d = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != d)
      throw DataError("model file: ragged matrix");
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = row[static_cast<size_t>(j)].get<double>();
  }
  return m;
}

json kernel_to_json(const KernelSpec& spec) {
  json out;
  switch (spec.kind) {
    case KernelKind::LinearSpline: out["kind"] = "spline"; break;
    case KernelKind::Gaussian: out["kind"] = "gaussian"; break;
    case KernelKind::IdentityDesign: out["kind"] = "identity"; break;
  }
  if (spec.kind == KernelKind::Gaussian) out["width"] = spec.width;
  return out;
}

KernelSpec kernel_from_json(const json& in) {
  const std::string kind = in.at("kind").get<std::string>();
  if (kind == "spline") return KernelSpec::linear_spline();
  if (kind == "gaussian") return KernelSpec::gaussian(in.at("width").get<double>());
  if (kind == "identity") return KernelSpec::identity();
  throw DataError("model file: unknown kernel kind '" + kind + "'");
}

}  // namespace

ModelFile make_model_file(const FitResult& fit, const KernelSpec& kernel,
                          const Eigen::MatrixXd& train_X, std::int64_t seed,
                          const std::vector<std::string>& feature_names,
                          const Eigen::VectorXd& x_center, const Eigen::VectorXd& x_scale,
                          double y_center, const std::string& response_name) {
  ModelFile model;
  model.rule = fit.rule;
  model.kernel = kernel;
  model.converged = fit.converged;
  model.iterations = fit.iterations;
  model.seed = seed;
  model.lambda_hat = fit.lambda_hat;
  model.sigma2_hat = fit.sigma2_hat;
  model.final_logml = fit.logml_trace.empty() ? 0.0 : fit.logml_trace.back();
  model.relevance_indices = fit.relevance_indices;
  model.weights = fit.weights;
  model.Sigma = fit.Sigma;
  model.tau_active.resize(static_cast<Eigen::Index>(fit.relevance_indices.size()));
  for (Eigen::Index k = 0; k < model.tau_active.size(); ++k)
    model.tau_active(k) = fit.tau_hat(fit.relevance_indices[static_cast<size_t>(k)]);

  if (kernel.kind != KernelKind::IdentityDesign) {
    model.relevance_inputs.resize(static_cast<Eigen::Index>(fit.relevance_indices.size()),
                                  train_X.cols());
    for (Eigen::Index k = 0; k < model.relevance_inputs.rows(); ++k)
      model.relevance_inputs.row(k) =
          train_X.row(fit.relevance_indices[static_cast<size_t>(k)]);
  }
  model.feature_names = feature_names;
  model.x_center = x_center;
  model.x_scale = x_scale;
  model.y_center = y_center;
  model.response_name = response_name;
  return model;
}

void save_model(const std::string& path, const ModelFile& model) {
  json out;
  out["format"] = "sbl-model";
  out["version"] = model.version;
  out["method"] = to_string(model.rule);
  out["kernel"] = kernel_to_json(model.kernel);
  out["converged"] = model.converged;
  out["iterations"] = model.iterations;
  out["seed"] = model.seed;
  out["lambda_hat"] = model.lambda_hat;
  out["sigma2_hat"] = model.sigma2_hat;
  out["final_logml"] = model.final_logml;
  out["relevance_indices"] = model.relevance_indices;
  out["weights"] = vector_to_json(model.weights);
  out["tau_active"] = vector_to_json(model.tau_active);
  out["Sigma"] = matrix_to_json(model.Sigma);
  if (model.kernel.kind != KernelKind::IdentityDesign)
    out["relevance_inputs"] = matrix_to_json(model.relevance_inputs);
  if (model.kernel.kind == KernelKind::IdentityDesign) {
    out["feature_names"] = model.feature_names;
    out["x_center"] = vector_to_json(model.x_center);
    out["x_scale"] = vector_to_json(model.x_scale);
    out["y_center"] = model.y_center;
  }
  if (!model.response_name.empty()) out["response"] = model.response_name;
  if (!model.feature_names.empty() && model.kernel.kind != KernelKind::IdentityDesign)
    out["feature_names"] = model.feature_names;

  std::ofstream file(path);
  if (!file) throw DataError("cannot write model file '" + path + "'");
  file << out.dump(2) << '\n';
  if (!file.good()) throw DataError("failed writing model file '" + path + "'");
}

ModelFile load_model(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DataError("cannot open model file '" + path + "'");
  json in;
  try {
    file >> in;
  } catch (const json::exception& e) {
    throw DataError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    if (in.at("format").get<std::string>() != "sbl-model")
      throw DataError("'" + path + "' is not a model file");
    ModelFile model;
    model.version = in.at("version").get<int>();
    if (model.version != 1)
      throw DataError("unsupported model file version " + std::to_string(model.version));
    model.rule = prior_rule_from_string(in.at("method").get<std::string>());
    model.kernel = kernel_from_json(in.at("kernel"));
    model.converged = in.at("converged").get<bool>();
    model.iterations = in.at("iterations").get<int>();
    model.seed = in.value("seed", std::int64_t{0});
    model.lambda_hat = in.at("lambda_hat").get<double>();
    model.sigma2_hat = in.at("sigma2_hat").get<double>();
    model.final_logml = in.value("final_logml", 0.0);
    model.relevance_indices = in.at("relevance_indices").get<std::vector<int>>();
    model.weights = vector_from_json(in.at("weights"));
    model.tau_active = vector_from_json(in.at("tau_active"));
    model.Sigma = matrix_from_json(in.at("Sigma"));
    if (in.contains("relevance_inputs"))
      model.relevance_inputs = matrix_from_json(in.at("relevance_inputs"));
    if (in.contains("feature_names"))
      model.feature_names = in.at("feature_names").get<std::vector<std::string>>();
    if (in.contains("x_center")) model.x_center = vector_from_json(in.at("x_center"));
    if (in.contains("x_scale")) model.x_scale = vector_from_json(in.at("x_scale"));
    model.y_center = in.value("y_center", 0.0);
    model.response_name = in.value("response", std::string{});
    if (model.weights.size() != static_cast<Eigen::Index>(model.relevance_indices.size()))
      throw DataError("model file: weights and relevance_indices lengths differ");
    if (model.Sigma.rows() != model.weights.size() ||
        model.Sigma.cols() != model.weights.size())
      throw DataError("model file: Sigma shape mismatch");
    return model;
  } catch (const json::exception& e) {
    throw DataError("model file '" + path + "' is malformed: " + e.what());
  }
}

std::vector<Prediction> predict_from_model(const ModelFile& model,
                                           const Eigen::MatrixXd& X_raw, double coverage) {
  FitResult fit;
  fit.rule = model.rule;
  fit.weights = model.weights;
  fit.Sigma = model.Sigma;
  fit.sigma2_hat = model.sigma2_hat;
  fit.lambda_hat = model.lambda_hat;
  fit.converged = model.converged;

  if (model.kernel.kind == KernelKind::IdentityDesign) {
    // Standardize raw inputs with the stored training parameters; report
    // means back on the raw response scale.
    if (X_raw.cols() != model.x_center.size())
      throw std::invalid_argument("predict: input dimension differs from the model's");
    fit.relevance_indices = model.relevance_indices;  // original column indices
    Dataset ds;
    ds.X = X_raw;
    ds.y = Eigen::VectorXd::Zero(X_raw.rows());
    const Dataset std_ds = apply_standardization(ds, model.x_center, model.x_scale, 0.0);
    auto preds = predict_batch(fit, model.kernel, Eigen::MatrixXd(), std_ds.X, coverage);
    for (auto& p : preds) {
      p.mean += model.y_center;
      p.lo += model.y_center;
      p.hi += model.y_center;
    }
    return preds;
  }

  // Kernel regime: the stored relevance rows are the reference inputs, in
  // relevance order, so indices remap to 0..L-1.
  fit.relevance_indices.resize(model.relevance_indices.size());
  for (size_t k = 0; k < fit.relevance_indices.size(); ++k)
    fit.relevance_indices[k] = static_cast<int>(k);
  return predict_batch(fit, model.kernel, model.relevance_inputs, X_raw, coverage);
}

}  // namespace sbl
