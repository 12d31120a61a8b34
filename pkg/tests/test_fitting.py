import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from floquet_qi import fitting
from floquet_qi.errors import FitError, ValidationError
from floquet_qi.fitting import (
    ATS,
    QI,
    FitResult,
    FitWindow,
    aic_weights,
    canonical,
    default_init,
    fit_arrays,
    fit_model,
    weights_from_aic,
)
from floquet_qi.lineshape import AtsParams, ats_value, qi_value
from floquet_qi.scans import Spectrum

X = np.round(np.arange(-40, 41) * 0.1, 12)


def synthetic(fn, theta, x=X):
    return Spectrum(x, np.zeros_like(x), fn(x, *theta), {})


def test_ats_self_consistency():
    theta = (5.4, 0.5, 0.9)
    fit = fit_model(synthetic(ats_value, theta), ATS, FitWindow(-4, 4, 0.1),
                    init=(6.0, 0.6, 1.0))
    assert fit.rss < 1e-20
    np.testing.assert_allclose([fit.params.omega_c, fit.params.omega_p, fit.params.gamma_big],
                               theta, atol=1e-8)
    assert fit.n == 81 and fit.k == 3


def test_qi_self_consistency():
    theta = (1.8, 0.9, 1.7, 1.2)
    fit = fit_model(synthetic(qi_value, theta), QI, FitWindow(-4, 4, 0.1),
                    init=(1.6, 1.0, 1.5, 1.0))
    assert fit.rss < 1e-18
    np.testing.assert_allclose(
        [fit.params.omega_c, fit.params.omega_p, fit.params.gamma_big, fit.params.lam],
        theta, atol=1e-6)


def test_extra_parameter_is_not_rewarded():
    for theta in ((5.4, 0.5, 0.9), (3.0, 1.0, 1.2)):
        data = synthetic(ats_value, theta)
        window = FitWindow(-4, 4, 0.1)
        fit_a = fit_model(data, ATS, window, init=np.array(theta) * 1.1)
        fit_q = fit_model(data, QI, window, init=tuple(np.array(theta) * 1.1) + (0.1,))
        assert abs(fit_q.params.lam) < 1e-6
        assert aic_weights(fit_q, fit_a).w_qi <= 0.53


def test_fit_is_local_minimum():
    rng = np.random.default_rng(5)
    theta = (3.0, 1.0, 1.2, 0.4)
    y = qi_value(X, *theta) + 1e-4 * rng.standard_normal(X.size)
    best, rss = fit_arrays(X, y, QI, (2.8, 0.9, 1.1, 0.3))
    for i in range(4):
        for step in (0.99, 1.01):
            trial = best.copy()
            trial[i] *= step
            assert np.sum((qi_value(X, *trial) - y) ** 2) > rss


def test_fit_is_deterministic():
    rng = np.random.default_rng(6)
    y = ats_value(X, 4.0, 0.7, 1.0) + 1e-3 * rng.standard_normal(X.size)
    a = fit_arrays(X, y, ATS, (3.0, 0.5, 0.8))
    b = fit_arrays(X, y, ATS, (3.0, 0.5, 0.8))
    assert np.array_equal(a[0], b[0]) and a[1] == b[1]


def test_canonical_sign_choice():
    np.testing.assert_array_equal(canonical(QI, [-2.0, -1.0, -0.5, 0.3]), [2.0, 1.0, 0.5, -0.3])
    np.testing.assert_array_equal(canonical(ATS, [2.0, 1.0, 0.5]), [2.0, 1.0, 0.5])
    t = np.array([-2.0, -1.0, -0.5, 0.3])
    np.testing.assert_allclose(qi_value(X, *t), qi_value(X, *canonical(QI, t)), rtol=1e-13)


def test_too_few_points():
    data = synthetic(ats_value, (5.4, 0.5, 0.9), x=np.linspace(-1, 1, 10))
    with pytest.raises(ValidationError):
        fit_model(data, ATS, FitWindow(-4, 4, 0.1), init=(5, 0.5, 1))


def test_model_validation():
    with pytest.raises(ValidationError):
        fit_arrays(X, X, "GAUSS", (1, 1, 1))
    with pytest.raises(ValidationError):
        fit_arrays(X, X, QI, (1, 1, 1))


def test_non_finite_data_rejected():
    with pytest.raises(ValidationError):
        fit_arrays(X, np.full(X.size, np.nan), ATS, (1.0, 1.0, 1.0))


def test_exhausted_budget_reports_best_so_far(monkeypatch):
    monkeypatch.setattr(fitting, "MAX_EVALS", 2)
    with pytest.raises(FitError) as info:
        fit_arrays(X, ats_value(X, 5.4, 0.5, 0.9), ATS, (1.0, 3.0, 0.2))
    theta, rss = info.value.best
    assert len(theta) == 3 and rss > 0


def test_default_init_from_provenance():
    prov = {"omega_c": 10.8, "omega_p": 1.0, "gamma10": 1.0, "gamma21": 1.4,
            "gamma1_phi": 0.4, "gamma2_phi": 0.2}
    assert default_init(QI, prov) == pytest.approx((5.4, 0.5, 0.9, 0.0))
    assert default_init(ATS, prov) == pytest.approx((5.4, 0.5, 0.9))
    with pytest.raises(ValidationError):
        default_init(QI, {"omega_c": 1.0})


def test_weights_examples():
    assert weights_from_aic(1.3, 1.3).w_qi == 0.5
    w = weights_from_aic(-2.0, 0.0)
    assert w.w_qi == pytest.approx(1 / (1 + math.exp(-1)), abs=1e-12)
    assert w.w_qi == pytest.approx(0.7311, abs=1e-4)


def test_weights_survive_extreme_values():
    w = weights_from_aic(-5000.0, 3000.0)
    assert (w.w_qi, w.w_ats) == (1.0, 0.0)
    assert weights_from_aic(-math.inf, -3.0).w_qi == 1.0
    assert weights_from_aic(-math.inf, -math.inf).w_qi == 0.5


@given(a=st.floats(-1e6, 1e6), b=st.floats(-1e6, 1e6))
def test_weights_normalised(a, b):
    w = weights_from_aic(a, b)
    assert w.w_qi + w.w_ats == 1.0
    assert 0 <= w.w_qi <= 1 and 0 <= w.w_ats <= 1


def test_weights_need_matching_windows():
    p = AtsParams(1, 1, 1)
    qi = FitResult(QI, None, 1.0, 81, 4, X)
    assert aic_weights(qi, FitResult(ATS, p, 1.0, 81, 3, X)).w_qi < 0.5
    with pytest.raises(ValidationError):
        aic_weights(qi, FitResult(ATS, p, 1.0, 80, 3, X[:-1]))
    with pytest.raises(ValidationError):
        aic_weights(qi, FitResult(ATS, p, 1.0, 81, 3, X + 0.01))
    with pytest.raises(ValidationError):
        aic_weights(FitResult(ATS, p, 1.0, 81, 3, X), qi)


def test_aic_per_point():
    fit = FitResult(ATS, AtsParams(1, 1, 1), 2.0, 100, 3)
    assert fit.aic_per_point == pytest.approx((100 * math.log(0.02) + 6) / 100)
    assert FitResult(ATS, AtsParams(1, 1, 1), 0.0, 100, 3).aic_per_point == -math.inf


def test_result_serialises():
    fit = fit_model(synthetic(ats_value, (5.4, 0.5, 0.9)), ATS, FitWindow(-4, 4, 0.1),
                    init=(5, 0.6, 1))
    d = json.loads(json.dumps(fit.as_dict()))
    assert set(d) == {"model", "params", "rss", "n", "k", "aic_per_point"}
    assert set(d["params"]) == {"omega_c", "omega_p", "gamma_big"}


def test_window_default_and_grid():
    w = FitWindow.default(0.05)
    assert w.delta_max == pytest.approx(8.0) and w.spacing == 0.05
    assert FitWindow.default(1.0, "literal").delta_max == pytest.approx(math.pi)
    g = FitWindow(-4, 4, 0.1).grid()
    assert len(g) == 81 and g[40] == 0.0
    with pytest.raises(ValidationError):
        FitWindow(1, 4, 0.1)
    with pytest.raises(ValidationError):
        FitWindow(-1, 1, 0)


def test_window_sideband_warning():
    assert FitWindow(-4, 4, 0.1).check_sidebands(0.1)
    with pytest.warns(UserWarning):
        assert not FitWindow(-4, 4, 0.1).check_sidebands(2 * math.pi * 0.15)
