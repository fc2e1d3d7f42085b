// Command-line front end: fit, predict, the Sinc benchmarks, and the
// repeated-split variable-selection study.

#include "sbl/dataio.hpp"
#include "sbl/engine.hpp"
#include "sbl/kernels.hpp"
#include "sbl/model_io.hpp"
#include "sbl/predict.hpp"
#include "sbl/select.hpp"
#include "sbl/simbench.hpp"
#include "sbl/types.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace sbl;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<PriorRule> parse_methods(const std::string& text) {
  std::vector<PriorRule> methods;
  for (const std::string& name : split_list(text)) methods.push_back(prior_rule_from_string(name));
  if (methods.empty()) throw std::invalid_argument("no methods given");
  return methods;
}

std::vector<double> parse_sigmas(const std::string& text) {
  std::vector<double> sigmas;
  for (const std::string& item : split_list(text)) {
    size_t used = 0;
    const double value = std::stod(item, &used);
    if (used != item.size() || !(value >= 0.0))
      throw std::invalid_argument("bad noise level '" + item + "'");
    sigmas.push_back(value);
  }
  if (sigmas.empty()) throw std::invalid_argument("no noise levels given");
  return sigmas;
}

// "spline", "identity", "gaussian" (width from the data), or "gaussian:W".
// Returns the spec and whether a Gaussian width still has to be derived.
std::pair<KernelSpec, bool> parse_kernel(const std::string& text) {
  if (text == "spline") return {KernelSpec::linear_spline(), false};
  if (text == "identity") return {KernelSpec::identity(), false};
  if (text == "gaussian") return {KernelSpec::gaussian(1.0), true};
  const std::string prefix = "gaussian:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    size_t used = 0;
    const double width = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("bad kernel width '" + rest + "'");
    return {KernelSpec::gaussian(width), false};
  }
  throw std::invalid_argument("unknown kernel '" + text +
                              "' (expected spline, gaussian, gaussian:W or identity)");
}

void write_text(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file '" + path + "'");
  out << content;
}

std::string default_response(const std::string& data_path) {
  const auto names = read_csv_header(data_path);
  return names.back();
}

// ---- fit ----

struct FitArgs {
  std::string data_path;
  std::string response;
  std::string method = "bls";
  std::string kernel = "spline";
  std::string out_path;
  double fix_sigma2 = 0.0;
  bool has_fix_sigma2 = false;
  int max_iters = 2000;
  std::int64_t seed = 0;
};

void print_coefficients(const FitResult& result, const Dataset& train) {
  std::cout << "\ncoefficients (standardized scale, 95% interval):\n";
  const double z = normal_quantile(0.975);
  std::cout << std::left << std::setw(16) << "  variable" << std::right << std::setw(12)
            << "weight" << std::setw(12) << "lo" << std::setw(12) << "hi" << "\n";
  for (size_t k = 0; k < result.relevance_indices.size(); ++k) {
    const int j = result.relevance_indices[k];
    const double w = result.weights(static_cast<Eigen::Index>(k));
    const double sd = std::sqrt(result.Sigma(static_cast<Eigen::Index>(k),
                                             static_cast<Eigen::Index>(k)));
    std::cout << "  " << std::left << std::setw(14) << train.names[static_cast<size_t>(j)]
              << std::right << std::fixed << std::setprecision(4) << std::setw(12) << w
              << std::setw(12) << w - z * sd << std::setw(12) << w + z * sd << "\n";
    std::cout.unsetf(std::ios::fixed);
    std::cout << std::setprecision(6);
  }
  std::vector<std::string> pruned;
  for (size_t j = 0; j < train.names.size(); ++j) {
    const bool active = std::find(result.relevance_indices.begin(),
                                  result.relevance_indices.end(),
                                  static_cast<int>(j)) != result.relevance_indices.end();
    if (!active) pruned.push_back(train.names[j]);
  }
  std::cout << "pruned (" << pruned.size() << "):";
  for (const std::string& name : pruned) std::cout << " " << name;
  std::cout << "\n";
}

int cmd_fit(const FitArgs& args) {
  const PriorRule rule = prior_rule_from_string(args.method);
  auto [kernel, derive_width] = parse_kernel(args.kernel);
  const std::string response =
      args.response.empty() ? default_response(args.data_path) : args.response;
  const Dataset raw = load_csv(args.data_path, response);

  FitConfig cfg;
  cfg.max_iters = args.max_iters;
  cfg.seed = args.seed;
  if (args.has_fix_sigma2) cfg.fix_sigma2 = args.fix_sigma2;

  const bool identity = kernel.kind == KernelKind::IdentityDesign;
  const Dataset train = identity ? standardize(raw) : raw;
  if (derive_width) kernel = KernelSpec::gaussian(median_pairwise_distance(train.X));

  const DesignMatrix phi = build_design(kernel, train.X);
  const FitResult result = fit(phi, train.y, rule, cfg);

  std::cout << "method: " << to_string(result.rule) << "  kernel: " << kernel.name() << "\n"
            << "rows: " << train.n_rows() << "  columns: " << phi.cols() << "\n"
            << "iterations: " << result.iterations
            << "  converged: " << (result.converged ? "yes" : "no") << "\n"
            << "relevance vectors: " << result.relevance_indices.size() << "\n"
            << "sigma_hat: " << std::sqrt(result.sigma2_hat)
            << "  lambda_hat: " << result.lambda_hat << "\n";
  if (!result.logml_trace.empty())
    std::cout << "final objective: " << result.logml_trace.back() << "\n";
  if (!raw.dropped_rows.empty())
    std::cout << "dropped " << raw.dropped_rows.size() << " rows with missing values\n";
  if (identity) print_coefficients(result, train);

  if (!args.out_path.empty()) {
    const ModelFile model =
        identity ? make_model_file(result, kernel, Eigen::MatrixXd(), args.seed, train.names,
                                   train.x_center, train.x_scale, train.y_center,
                                   train.response_name)
                 : make_model_file(result, kernel, train.X, args.seed, train.names, {}, {},
                                   0.0, train.response_name);
    save_model(args.out_path, model);
    std::cout << "model written to " << args.out_path << "\n";
  }
  return 0;
}

// ---- predict ----

struct PredictArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path = "-";
  double coverage = 0.95;
};

// Reorder the input columns to the model's training layout, matching by
// name when the model recorded header names (a stray response column is
// simply not selected); otherwise the column count must match.
Eigen::MatrixXd arrange_columns(const ModelFile& model, const std::vector<std::string>& names,
                                const Eigen::MatrixXd& X) {
  if (!model.feature_names.empty()) {
    bool all_found = true;
    std::vector<Eigen::Index> where(model.feature_names.size());
    for (size_t k = 0; k < model.feature_names.size(); ++k) {
      const auto it = std::find(names.begin(), names.end(), model.feature_names[k]);
      if (it == names.end()) {
        all_found = false;
        break;
      }
      where[k] = static_cast<Eigen::Index>(it - names.begin());
    }
    if (all_found) {
      Eigen::MatrixXd arranged(X.rows(), static_cast<Eigen::Index>(where.size()));
      for (size_t k = 0; k < where.size(); ++k)
        arranged.col(static_cast<Eigen::Index>(k)) = X.col(where[k]);
      return arranged;
    }
  }
  if (model.kernel.kind != KernelKind::IdentityDesign && model.relevance_inputs.rows() == 0)
    return X;  // empty nameless model: any width predicts the prior mean
  const Eigen::Index want = model.kernel.kind == KernelKind::IdentityDesign
                                ? static_cast<Eigen::Index>(model.feature_names.size())
                                : model.relevance_inputs.cols();
  if (X.cols() == want) return X;
  std::ostringstream msg;
  msg << "prediction input has " << X.cols() << " feature columns, model expects " << want;
  throw DataError(msg.str());
}

int cmd_predict(const PredictArgs& args) {
  const ModelFile model = load_model(args.model_path);
  auto [names, X] = load_csv_matrix(args.data_path);

  // Drop the response column when the input is a full dataset.
  if (!model.response_name.empty()) {
    const auto it = std::find(names.begin(), names.end(), model.response_name);
    if (it != names.end()) {
      const Eigen::Index drop = static_cast<Eigen::Index>(it - names.begin());
      Eigen::MatrixXd trimmed(X.rows(), X.cols() - 1);
      Eigen::Index t = 0;
      for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (j != drop) trimmed.col(t++) = X.col(j);
      X = trimmed;
      names.erase(it);
    }
  }

  const Eigen::MatrixXd arranged = arrange_columns(model, names, X);
  const auto preds = predict_from_model(model, arranged, args.coverage);

  std::ostringstream out;
  out << std::setprecision(17) << "mean,variance,lo,hi\n";
  for (const Prediction& p : preds)
    out << p.mean << "," << p.variance << "," << p.lo << "," << p.hi << "\n";
  write_text(args.out_path, out.str());
  return 0;
}

// ---- benchmarks ----

struct BenchArgs {
  std::string methods = "bls,frvm,flap";
  std::string sigmas = "0.1";
  std::string kernel = "spline";
  int reps = 100;
  int n_points = 200;
  double grid_step = 0.3;
  bool fixed_sigma2 = false;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_csv;
  std::string out_md;
};

int cmd_bench(const BenchArgs& args, int dim) {
  StudyConfig cfg;
  cfg.methods = parse_methods(args.methods);
  cfg.sigmas = parse_sigmas(args.sigmas);
  cfg.reps = args.reps;
  cfg.sinc = dim == 1 ? SincSpec::one_dim(0.1, args.n_points)
                      : SincSpec::two_dim(0.1, args.grid_step);
  cfg.sinc.seed = args.seed;
  const auto [kernel, derive_width] = parse_kernel(args.kernel);
  if (kernel.kind == KernelKind::IdentityDesign)
    throw std::invalid_argument("the Sinc benchmarks need a kernel design");
  if (derive_width) {
    SincSpec probe = cfg.sinc;
    probe.sigma = 0.0;
    cfg.kernel = KernelSpec::gaussian(median_pairwise_distance(gen_sinc(probe).X));
  } else {
    cfg.kernel = kernel;
  }
  cfg.fixed_sigma2 = args.fixed_sigma2;
  cfg.n_threads = args.threads;

  const StudyReport report = run_study(cfg);
  std::cout << report_markdown(report);
  if (!args.out_csv.empty()) write_text(args.out_csv, report_csv(report));
  if (!args.out_md.empty()) write_text(args.out_md, report_markdown(report));
  return 0;
}

// ---- variable-selection study ----

struct SelectArgs {
  std::string data_path;
  std::string response;
  std::string methods = "bls,frvm,flap";
  int reps = 100;
  double train_frac = 0.8;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_csv;
  std::string out_md;
};

int cmd_select(const SelectArgs& args) {
  SelectConfig cfg;
  cfg.methods = parse_methods(args.methods);
  if (!(args.train_frac > 0.0) || !(args.train_frac < 1.0))
    throw std::invalid_argument("--train-frac must lie strictly between 0 and 1");

  const std::string response =
      args.response.empty() ? default_response(args.data_path) : args.response;
  const Dataset raw = load_csv(args.data_path, response);
  cfg.reps = args.reps;
  cfg.train_frac = args.train_frac;
  cfg.seed = args.seed;
  cfg.n_threads = args.threads;

  const SelectReport report = run_select_study(raw, cfg);
  std::cout << select_markdown(report);
  if (!args.out_csv.empty()) write_text(args.out_csv, select_csv(report));
  if (!args.out_md.empty()) write_text(args.out_md, select_markdown(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse Bayesian regression toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sbl 0.1.0");

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model to a CSV dataset");
  fit_cmd->add_option("--data", fit_args.data_path, "input CSV with a header row")->required();
  fit_cmd->add_option("--response", fit_args.response,
                      "response column name (default: last column)");
  fit_cmd->add_option("--method", fit_args.method, "bls, frvm or flap")
      ->default_val("bls");
  fit_cmd->add_option("--kernel", fit_args.kernel,
                      "spline, gaussian, gaussian:W or identity")
      ->default_val("spline");
  fit_cmd->add_option("--fix-sigma2", fit_args.fix_sigma2,
                      "hold the noise variance at this value");
  fit_cmd->add_option("--max-iters", fit_args.max_iters, "iteration cap")->default_val(2000);
  fit_cmd->add_option("--seed", fit_args.seed, "seed recorded in the model file")
      ->default_val(0);
  fit_cmd->add_option("--out", fit_args.out_path, "write the fitted model (JSON)");

  PredictArgs predict_args;
  CLI::App* predict_cmd = app.add_subcommand("predict", "predict from a saved model");
  predict_cmd->add_option("--model", predict_args.model_path, "model JSON from 'fit --out'")
      ->required();
  predict_cmd->add_option("--data", predict_args.data_path, "CSV of query rows")->required();
  predict_cmd->add_option("--out", predict_args.out_path, "output CSV path or - for stdout")
      ->default_val("-");
  predict_cmd->add_option("--coverage", predict_args.coverage, "two-sided interval coverage")
      ->default_val(0.95);

  BenchArgs bench1_args, bench2_args;
  CLI::App* bench1_cmd =
      app.add_subcommand("bench-sinc1d", "repetition study on the 1D Sinc problem");
  CLI::App* bench2_cmd =
      app.add_subcommand("bench-sinc2d", "repetition study on the 2D Sinc problem");
  for (auto [cmd, args] : {std::pair{bench1_cmd, &bench1_args}, {bench2_cmd, &bench2_args}}) {
    cmd->add_option("--methods", args->methods, "comma-separated method list")
        ->default_val("bls,frvm,flap");
    cmd->add_option("--sigmas", args->sigmas, "comma-separated true noise SDs")
        ->default_val("0.1");
    cmd->add_option("--kernel", args->kernel, "spline, gaussian or gaussian:W")
        ->default_val("spline");
    cmd->add_option("--reps", args->reps, "repetitions per cell")->default_val(100);
    cmd->add_option("--seed", args->seed, "base seed")->default_val(0);
    cmd->add_option("--threads", args->threads, "worker threads (0: auto)")->default_val(0);
    cmd->add_option("--out-csv", args->out_csv, "write the long-format CSV here");
    cmd->add_option("--out-md", args->out_md, "write the markdown table here");
    cmd->add_flag("--fixed-sigma2", args->fixed_sigma2,
                  "fix sigma2 at 0.1 * var(y) per dataset instead of estimating");
  }
  bench1_cmd->add_option("--n-points", bench1_args.n_points, "grid size")->default_val(200);
  bench2_cmd->add_option("--grid-step", bench2_args.grid_step, "per-axis grid step")
      ->default_val(0.3);

  SelectArgs select_args;
  CLI::App* select_cmd =
      app.add_subcommand("select", "repeated-split variable-selection study");
  select_cmd->add_option("--data", select_args.data_path, "input CSV with a header row")
      ->required();
  select_cmd->add_option("--response", select_args.response,
                         "response column name (default: last column)");
  select_cmd->add_option("--methods", select_args.methods, "comma-separated method list")
      ->default_val("bls,frvm,flap");
  select_cmd->add_option("--reps", select_args.reps, "number of random splits")
      ->default_val(100);
  select_cmd->add_option("--train-frac", select_args.train_frac, "training fraction")
      ->default_val(0.8);
  select_cmd->add_option("--seed", select_args.seed, "base seed")->default_val(0);
  select_cmd->add_option("--threads", select_args.threads, "worker threads (0: auto)")
      ->default_val(0);
  select_cmd->add_option("--out-csv", select_args.out_csv, "write the summary CSV here");
  select_cmd->add_option("--out-md", select_args.out_md, "write the markdown table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    fit_args.has_fix_sigma2 = fit_cmd->count("--fix-sigma2") > 0;
    if (fit_cmd->parsed()) return cmd_fit(fit_args);
    if (predict_cmd->parsed()) return cmd_predict(predict_args);
    if (bench1_cmd->parsed()) return cmd_bench(bench1_args, 1);
    if (bench2_cmd->parsed()) return cmd_bench(bench2_args, 2);
    if (select_cmd->parsed()) return cmd_select(select_args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
