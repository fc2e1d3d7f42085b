"""Sparse Bayesian regression: fast marginal-likelihood fits with Laplace
and Gaussian priors, kernel and identity designs, and repetition benchmarks."""

from ._core import (
    Action,
    ActionRecord,
    DataError,
    Dataset,
    DesignMatrix,
    FitConfig,
    FitResult,
    KernelKind,
    KernelSpec,
    ModelFile,
    NumericalError,
    Prediction,
    PriorRule,
    SelectCell,
    SelectConfig,
    SelectReport,
    SincData,
    SincSpec,
    SparseLinearData,
    SparseLinearSpec,
    StudyCell,
    StudyConfig,
    StudyReport,
    __version__,
    apply_standardization,
    bls_tau_stationary,
    build_design,
    destandardize,
    fit,
    flap_tau_stationary,
    frvm_tau_stationary,
    gen_sinc,
    gen_sparse_linear,
    kernel_cross,
    kernel_eval,
    little_sq,
    load_csv,
    load_model,
    make_model_file,
    median_pairwise_distance,
    mse_vs_truth,
    normal_quantile,
    predict_batch,
    predict_from_model,
    prior_rule_from_string,
    report_csv,
    report_markdown,
    resolve_threads,
    run_select_study,
    run_study,
    save_model,
    select_csv,
    select_markdown,
    sinc,
    standardize,
    train_test_split,
    update_lambda,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
