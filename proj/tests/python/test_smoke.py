import math

import numpy as np
import pytest

import sblkit


def test_version():
    assert sblkit.__version__ == "0.1.0"


def test_kernel_frozen_value():
    spec = sblkit.KernelSpec.linear_spline()
    value = sblkit.kernel_eval(spec, np.array([1.0]), np.array([1.0]))
    assert value == pytest.approx(8.0 / 3.0, rel=1e-12)


def test_stationary_point_frozen_value():
    # s = 1, q = 2, lambda = 1, sigma2 = 1: root of tau^2 + 3 tau - 2.
    tau = sblkit.bls_tau_stationary(1.0, 2.0, 1.0, 1.0)
    assert tau == pytest.approx((-3.0 + math.sqrt(17.0)) / 2.0, rel=1e-12)
    assert sblkit.bls_tau_stationary(1.0, 1.0, 1.0, 1.0) == 0.0


def test_sinc_fit_and_predict():
    spec = sblkit.SincSpec.one_dim(0.05, 60)
    spec.seed = 123
    data = sblkit.gen_sinc(spec)
    kernel = sblkit.KernelSpec.linear_spline()
    phi = sblkit.build_design(kernel, data.X)

    result = sblkit.fit(phi, data.y, sblkit.PriorRule.BLS, sblkit.FitConfig())
    assert result.converged
    assert len(result.relevance_indices) > 0
    assert result.sigma2_hat > 0.0

    preds = sblkit.predict_batch(result, kernel, data.X, data.X)
    means = np.array([p.mean for p in preds])
    assert sblkit.mse_vs_truth(means, data.f_true) < 0.01
    for p in preds:
        assert p.variance >= result.sigma2_hat - 1e-12
        assert p.lo <= p.mean <= p.hi


def test_fit_deterministic():
    spec = sblkit.SincSpec.one_dim(0.1, 40)
    spec.seed = 5
    data = sblkit.gen_sinc(spec)
    phi = sblkit.build_design(sblkit.KernelSpec.linear_spline(), data.X)
    r1 = sblkit.fit(phi, data.y, sblkit.PriorRule.FRVM, sblkit.FitConfig())
    r2 = sblkit.fit(phi, data.y, sblkit.PriorRule.FRVM, sblkit.FitConfig())
    assert r1.relevance_indices == r2.relevance_indices
    assert np.array_equal(r1.weights, r2.weights)


def test_data_error_is_raised():
    with pytest.raises(sblkit.DataError):
        sblkit.load_csv("/nonexistent/sbl_missing.csv", "y")
