#include "sbl/dataio.hpp"
#include "sbl/engine.hpp"
#include "sbl/kernels.hpp"
#include "sbl/model_io.hpp"
#include "sbl/predict.hpp"
#include "sbl/select.hpp"
#include "sbl/simbench.hpp"
#include "sbl/types.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sbl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse Bayesian regression: fast marginal-likelihood fits with "
            "Laplace and Gaussian priors.";
  m.attr("__version__") = "0.1.0";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::enum_<PriorRule>(m, "PriorRule")
      .value("BLS", PriorRule::BLS)
      .value("FRVM", PriorRule::FRVM)
      .value("FLAP", PriorRule::FLAP);
  m.def("prior_rule_from_string", &prior_rule_from_string, py::arg("name"));

  py::enum_<Action>(m, "Action")
      .value("Add", Action::Add)
      .value("Reestimate", Action::Reestimate)
      .value("Delete", Action::Delete);

  py::enum_<KernelKind>(m, "KernelKind")
      .value("LinearSpline", KernelKind::LinearSpline)
      .value("Gaussian", KernelKind::Gaussian)
      .value("IdentityDesign", KernelKind::IdentityDesign);

  py::class_<KernelSpec>(m, "KernelSpec")
      .def(py::init<>())
      .def_static("linear_spline", &KernelSpec::linear_spline)
      .def_static("gaussian", &KernelSpec::gaussian, py::arg("width"))
      .def_static("identity", &KernelSpec::identity)
      .def_readonly("kind", &KernelSpec::kind)
      .def_readonly("width", &KernelSpec::width)
      .def("name", &KernelSpec::name);

  py::class_<DesignMatrix>(m, "DesignMatrix")
      .def(py::init<>())
      .def_readwrite("values", &DesignMatrix::values)
      .def_readwrite("column_origin", &DesignMatrix::column_origin)
      .def_readwrite("kernel_regime", &DesignMatrix::kernel_regime);

  m.def("kernel_eval", &kernel_eval, py::arg("spec"), py::arg("a"), py::arg("b"));
  m.def("build_design", &build_design, py::arg("spec"), py::arg("X"),
        py::call_guard<py::gil_scoped_release>());
  m.def("kernel_cross", &kernel_cross, py::arg("spec"), py::arg("X_star"), py::arg("X_ref"),
        py::call_guard<py::gil_scoped_release>());
  m.def("median_pairwise_distance", &median_pairwise_distance, py::arg("X"));

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &FitConfig::max_iters)
      .def_readwrite("tol_logml", &FitConfig::tol_logml)
      .def_readwrite("tol_tau", &FitConfig::tol_tau)
      .def_readwrite("sigma2_update_period", &FitConfig::sigma2_update_period)
      .def_readwrite("sigma2_raise_tol", &FitConfig::sigma2_raise_tol)
      .def_readwrite("fix_sigma2", &FitConfig::fix_sigma2)
      .def_readwrite("seed", &FitConfig::seed)
      .def_readwrite("a", &FitConfig::a)
      .def_readwrite("b", &FitConfig::b)
      .def_readwrite("c", &FitConfig::c)
      .def_readwrite("d", &FitConfig::d)
      .def_readwrite("trace_actions", &FitConfig::trace_actions);

  py::class_<ActionRecord>(m, "ActionRecord")
      .def_readonly("iteration", &ActionRecord::iteration)
      .def_readonly("index", &ActionRecord::index)
      .def_readonly("action", &ActionRecord::action)
      .def_readonly("predicted_gain", &ActionRecord::predicted_gain)
      .def_readonly("realized_gain", &ActionRecord::realized_gain);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("relevance_indices", &FitResult::relevance_indices)
      .def_readonly("weights", &FitResult::weights)
      .def_readonly("Sigma", &FitResult::Sigma)
      .def_readonly("tau_hat", &FitResult::tau_hat)
      .def_readonly("lambda_hat", &FitResult::lambda_hat)
      .def_readonly("sigma2_hat", &FitResult::sigma2_hat)
      .def_readonly("logml_trace", &FitResult::logml_trace)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("rule", &FitResult::rule)
      .def_readonly("action_trace", &FitResult::action_trace);

  m.def("fit", &fit, py::arg("phi"), py::arg("y"), py::arg("rule"),
        py::arg("config") = FitConfig{}, py::call_guard<py::gil_scoped_release>());

  m.def("bls_tau_stationary", &bls_tau_stationary, py::arg("s"), py::arg("q"),
        py::arg("lambda_"), py::arg("sigma2"));
  m.def("frvm_tau_stationary", &frvm_tau_stationary, py::arg("s"), py::arg("q"));
  m.def("flap_tau_stationary", &flap_tau_stationary, py::arg("s"), py::arg("q"),
        py::arg("lambda_"));
  m.def("little_sq", &little_sq, py::arg("S"), py::arg("Q"), py::arg("tau_i"),
        py::arg("sigma2"));
  m.def("update_lambda", &update_lambda, py::arg("tau"), py::arg("n_params"), py::arg("a"),
        py::arg("b"), py::arg("prev_lambda"));
  m.def("normal_quantile", &normal_quantile, py::arg("p"));

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("mean", &Prediction::mean)
      .def_readonly("variance", &Prediction::variance)
      .def_readonly("lo", &Prediction::lo)
      .def_readonly("hi", &Prediction::hi);

  m.def("predict_batch", &predict_batch, py::arg("fit"), py::arg("spec"),
        py::arg("train_X"), py::arg("X_star"), py::arg("coverage") = 0.95,
        py::call_guard<py::gil_scoped_release>());

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("X", &Dataset::X)
      .def_readwrite("y", &Dataset::y)
      .def_readwrite("names", &Dataset::names)
      .def_readwrite("response_name", &Dataset::response_name)
      .def_readonly("standardized", &Dataset::standardized)
      .def_readonly("x_center", &Dataset::x_center)
      .def_readonly("x_scale", &Dataset::x_scale)
      .def_readonly("y_center", &Dataset::y_center)
      .def_readonly("dropped_rows", &Dataset::dropped_rows);

  m.def("load_csv", &load_csv, py::arg("path"), py::arg("response_column"));
  m.def("standardize", &standardize, py::arg("dataset"));
  m.def("destandardize", &destandardize, py::arg("dataset"));
  m.def("apply_standardization", &apply_standardization, py::arg("dataset"),
        py::arg("center"), py::arg("scale"), py::arg("y_center"));
  m.def("train_test_split", &train_test_split, py::arg("dataset"), py::arg("train_frac"),
        py::arg("seed"));

  py::class_<SincSpec>(m, "SincSpec")
      .def(py::init<>())
      .def_static("one_dim", &SincSpec::one_dim, py::arg("sigma"), py::arg("n_points") = 200)
      .def_static("two_dim", &SincSpec::two_dim, py::arg("sigma"),
                  py::arg("grid_step") = 0.3)
      .def_readwrite("dim", &SincSpec::dim)
      .def_readwrite("sigma", &SincSpec::sigma)
      .def_readwrite("n_points", &SincSpec::n_points)
      .def_readwrite("grid_step", &SincSpec::grid_step)
      .def_readwrite("x_min", &SincSpec::x_min)
      .def_readwrite("x_max", &SincSpec::x_max)
      .def_readwrite("seed", &SincSpec::seed);

  py::class_<SincData>(m, "SincData")
      .def_readonly("X", &SincData::X)
      .def_readonly("y", &SincData::y)
      .def_readonly("f_true", &SincData::f_true);

  m.def("sinc", &sinc, py::arg("x"));
  m.def("gen_sinc", &gen_sinc, py::arg("spec"));
  m.def("mse_vs_truth", &mse_vs_truth, py::arg("y_star"), py::arg("f_true"));

  py::class_<StudyConfig>(m, "StudyConfig")
      .def(py::init<>())
      .def_readwrite("methods", &StudyConfig::methods)
      .def_readwrite("sigmas", &StudyConfig::sigmas)
      .def_readwrite("reps", &StudyConfig::reps)
      .def_readwrite("sinc", &StudyConfig::sinc)
      .def_readwrite("kernel", &StudyConfig::kernel)
      .def_readwrite("fit", &StudyConfig::fit)
      .def_readwrite("fixed_sigma2", &StudyConfig::fixed_sigma2)
      .def_readwrite("n_threads", &StudyConfig::n_threads);

  py::class_<StudyCell>(m, "StudyCell")
      .def_readonly("method", &StudyCell::method)
      .def_readonly("sigma", &StudyCell::sigma)
      .def_readonly("n_reps", &StudyCell::n_reps)
      .def_readonly("n_failed", &StudyCell::n_failed)
      .def_readonly("nov_mean", &StudyCell::nov_mean)
      .def_readonly("nov_sd", &StudyCell::nov_sd)
      .def_readonly("mse_mean", &StudyCell::mse_mean)
      .def_readonly("mse_sd", &StudyCell::mse_sd)
      .def_readonly("sigma_hat_mean", &StudyCell::sigma_hat_mean)
      .def_readonly("sigma_hat_sd", &StudyCell::sigma_hat_sd);

  py::class_<StudyReport>(m, "StudyReport")
      .def_readonly("cells", &StudyReport::cells)
      .def_readonly("fixed_sigma2", &StudyReport::fixed_sigma2);

  m.def("run_study", &run_study, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("report_csv", &report_csv, py::arg("report"));
  m.def("report_markdown", &report_markdown, py::arg("report"));
  m.def("resolve_threads", &resolve_threads, py::arg("requested"), py::arg("n_tasks"));

  py::class_<SelectConfig>(m, "SelectConfig")
      .def(py::init<>())
      .def_readwrite("methods", &SelectConfig::methods)
      .def_readwrite("reps", &SelectConfig::reps)
      .def_readwrite("train_frac", &SelectConfig::train_frac)
      .def_readwrite("seed", &SelectConfig::seed)
      .def_readwrite("fit", &SelectConfig::fit)
      .def_readwrite("n_threads", &SelectConfig::n_threads);

  py::class_<SelectCell>(m, "SelectCell")
      .def_readonly("method", &SelectCell::method)
      .def_readonly("n_reps", &SelectCell::n_reps)
      .def_readonly("n_failed", &SelectCell::n_failed)
      .def_readonly("mse_mean", &SelectCell::mse_mean)
      .def_readonly("mse_sd", &SelectCell::mse_sd)
      .def_readonly("nvar_mean", &SelectCell::nvar_mean)
      .def_readonly("nvar_sd", &SelectCell::nvar_sd);

  py::class_<SelectReport>(m, "SelectReport").def_readonly("rows", &SelectReport::rows);

  m.def("run_select_study", &run_select_study, py::arg("raw"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("select_csv", &select_csv, py::arg("report"));
  m.def("select_markdown", &select_markdown, py::arg("report"));

  py::class_<SparseLinearSpec>(m, "SparseLinearSpec")
      .def(py::init<>())
      .def_readwrite("n", &SparseLinearSpec::n)
      .def_readwrite("d", &SparseLinearSpec::d)
      .def_readwrite("k_nonzero", &SparseLinearSpec::k_nonzero)
      .def_readwrite("snr", &SparseLinearSpec::snr)
      .def_readwrite("seed", &SparseLinearSpec::seed);

  py::class_<SparseLinearData>(m, "SparseLinearData")
      .def_readonly("data", &SparseLinearData::data)
      .def_readonly("support", &SparseLinearData::support)
      .def_readonly("beta", &SparseLinearData::beta)
      .def_readonly("noise_sd", &SparseLinearData::noise_sd);

  m.def("gen_sparse_linear", &gen_sparse_linear, py::arg("spec"));

  py::class_<ModelFile>(m, "ModelFile")
      .def(py::init<>())
      .def_readonly("version", &ModelFile::version)
      .def_readonly("rule", &ModelFile::rule)
      .def_readonly("kernel", &ModelFile::kernel)
      .def_readonly("converged", &ModelFile::converged)
      .def_readonly("iterations", &ModelFile::iterations)
      .def_readonly("seed", &ModelFile::seed)
      .def_readonly("lambda_hat", &ModelFile::lambda_hat)
      .def_readonly("sigma2_hat", &ModelFile::sigma2_hat)
      .def_readonly("final_logml", &ModelFile::final_logml)
      .def_readonly("relevance_indices", &ModelFile::relevance_indices)
      .def_readonly("weights", &ModelFile::weights)
      .def_readonly("tau_active", &ModelFile::tau_active)
      .def_readonly("Sigma", &ModelFile::Sigma)
      .def_readonly("relevance_inputs", &ModelFile::relevance_inputs)
      .def_readonly("feature_names", &ModelFile::feature_names)
      .def_readonly("x_center", &ModelFile::x_center)
      .def_readonly("x_scale", &ModelFile::x_scale)
      .def_readonly("y_center", &ModelFile::y_center)
      .def_readonly("response_name", &ModelFile::response_name);

  m.def("make_model_file", &make_model_file, py::arg("fit"), py::arg("kernel"),
        py::arg("train_X"), py::arg("seed"),
        py::arg("feature_names") = std::vector<std::string>{},
        py::arg("x_center") = Eigen::VectorXd(), py::arg("x_scale") = Eigen::VectorXd(),
        py::arg("y_center") = 0.0, py::arg("response_name") = std::string{});
  m.def("save_model", &save_model, py::arg("path"), py::arg("model"));
  m.def("load_model", &load_model, py::arg("path"));
  m.def("predict_from_model", &predict_from_model, py::arg("model"), py::arg("X_raw"),
        py::arg("coverage") = 0.95);
}
