import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jv

from floquet_qi.analytic import (
    BesselSumConfig,
    bessel_j,
    bessel_j_orders,
    bessel_omega_n,
    cdt_locus,
    fourier_components,
    integrate_bloch_resonant,
    omega_n_closed_form,
    omega_n_table,
    reduced_resonant_rho11,
    resonant_steady,
    weak_drive_rho11,
)
from floquet_qi.errors import DomainError, TruncationError, ValidationError
from floquet_qi.propagation import (
    PERIOD_END,
    build_monodromy,
    evolve_stroboscopic,
    ground_state,
    observables,
    period_average,
    steady_state_fixed_point,
)
from floquet_qi.scans import local_maxima, local_minima, spectrum
from floquet_qi.systems import TwoLevelParams
from oracles import besselj_mp, nested_omega_n_loops, omega_n_fft

FIG1 = TwoLevelParams(omega_p=1.0, tau=0.05)


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


# --- Bessel functions ---------------------------------------------------

def test_bessel_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(-1, 1.7) == -bessel_j(1, 1.7)
    assert abs(bessel_j(0, 2.404826)) < 1e-6


@settings(max_examples=200, deadline=None)
@given(k=st.integers(-40, 40), x=st.floats(-200, 200))
def test_bessel_against_mpmath(k, x):
    assert abs(bessel_j(k, x) - besselj_mp(k, x)) <= 1e-13


def test_bessel_large_argument():
    for k, x in ((0, 9000.0), (5, 1234.5), (300, 500.0)):
        assert abs(bessel_j(k, x) - jv(k, x)) <= 1e-13


def test_bessel_orders_vector():
    x = 7.3
    np.testing.assert_allclose(bessel_j_orders(x, 20), jv(np.arange(-20, 21), x), atol=1e-14)
    np.testing.assert_allclose(bessel_j_orders(-0.2, 5), jv(np.arange(-5, 6), -0.2), atol=1e-15)


def test_bessel_range_error():
    with pytest.raises(DomainError):
        bessel_j(0, 1e4)
    with pytest.raises(DomainError):
        bessel_j(0, float("nan"))


# --- Fourier comb -------------------------------------------------------

def test_fourier_components_values():
    comb = fourier_components(1.0, 20.0, 5)
    assert comb.dc == 0.5
    assert comb.harmonics[0] == pytest.approx((1 / math.pi, 20.0))
    amps = [a for a, _ in comb.harmonics]
    freqs = [f for _, f in comb.harmonics]
    assert all(a > b for a, b in zip(amps, amps[1:]))
    assert all(b - a == 40.0 for a, b in zip(freqs, freqs[1:]))


def test_fourier_partial_sum_rebuilds_square_wave():
    comb = fourier_components(1.0, 20.0, 200)
    period = 2 * math.pi / 20.0
    assert comb.partial_sum(period / 4) == pytest.approx(1.0, abs=1e-3)
    assert comb.partial_sum(3 * period / 4) == pytest.approx(0.0, abs=1e-3)
    ts = np.linspace(0.05, 0.45, 9) * period
    np.testing.assert_allclose(comb.partial_sum(ts), 1.0, atol=0.02)


def test_fourier_validation():
    with pytest.raises(ValidationError):
        fourier_components(1.0, 0.0, 3)


# --- weak-drive formula -------------------------------------------------

def test_weak_drive_central_line():
    # single saturated Lorentzian: (0.9/2)(1/4) / (0.81 + 0.9/4)
    p = TwoLevelParams(omega_p=1.0, tau=1e-4)
    assert weak_drive_rho11(0.0, p) == pytest.approx(0.1125 / 1.035, abs=1e-6)
    assert weak_drive_rho11(0.0, p) == pytest.approx(0.108696, abs=1e-6)


def test_weak_drive_with_sidebands():
    assert weak_drive_rho11(0.0, FIG1) == pytest.approx(0.108926, abs=1e-6)


def test_weak_drive_vanishes_without_drive():
    assert weak_drive_rho11(3.0, TwoLevelParams(omega_p=0.0)) == 0.0


def test_weak_drive_symmetry_modes():
    d = np.array([-20.0, 20.0])
    sym = weak_drive_rho11(d, FIG1)
    lit = weak_drive_rho11(d, FIG1, symmetric=False)
    assert sym[0] == pytest.approx(sym[1], rel=1e-14)
    assert lit[0] > lit[1]


def test_weak_drive_warns_for_strong_drive():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(UserWarning):
            weak_drive_rho11(0.0, TwoLevelParams(omega_p=30.0, tau=0.05))


def test_weak_drive_peaks_match_lindblad_scan():
    deltas = np.arange(-70, 70.01, 0.5)
    formula_peaks, _ = local_maxima(deltas, weak_drive_rho11(deltas, FIG1))
    spec = spectrum(FIG1, deltas, mode="average")
    lindblad_peaks, _ = local_maxima(deltas, spec.rho11)
    for target in (0.0, 20.0, -20.0, 60.0, -60.0):
        assert np.min(np.abs(formula_peaks - target)) <= 0.5
        assert np.min(np.abs(lindblad_peaks - target)) <= 0.5


# --- nested Bessel sums -------------------------------------------------

def test_single_factor_reduces_to_bessel():
    cfg = BesselSumConfig(q_max=1)
    for n in range(-6, 7):
        assert bessel_omega_n(n, 13.0, 20.0, cfg) == pytest.approx(jv(n, -2 * 13.0 / (20.0 * math.pi)),
                                                                   abs=1e-14)


def test_convolution_matches_nested_loops():
    for q in (2, 3):
        cfg = BesselSumConfig(q_max=q)
        for n in (-3, 0, 1, 4):
            ref = nested_omega_n_loops(n, 40.0, 20.0, q)
            assert bessel_omega_n(n, 40.0, 20.0, cfg) == pytest.approx(ref, abs=1e-13)


def test_closed_form_matches_fourier_analysis():
    for omega_p, omega in ((1.0, 20.0), (40.0, 20.0), (13.0, 3.0)):
        for n in (-2, 0, 1, 3):
            assert omega_n_closed_form(n, omega_p, omega) == pytest.approx(
                omega_n_fft(n, omega_p, omega).real, abs=1e-4)


def test_nested_series_approaches_closed_form():
    n = np.arange(-5, 6)
    errs = []
    for q in (1, 2, 4, 8, 16):
        errs.append(np.max(np.abs(bessel_omega_n(n, 40.0, 20.0, BesselSumConfig(q_max=q))
                                  - omega_n_closed_form(n, 40.0, 20.0))))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 2e-3


def test_omega_n_unit_norm():
    _, coeffs = omega_n_table(40.0, 20.0)
    assert np.sum(coeffs**2) == pytest.approx(1.0, abs=1e-12)


def test_small_tau_limit():
    orders, coeffs = omega_n_table(1.0, 1e4)
    assert coeffs[orders == 0][0] ** 2 >= 0.999
    assert np.sum(coeffs[orders != 0] ** 2) <= 1e-3


def test_omega_n_shape_against_tau():
    taus = np.linspace(0.01, 1.0, 50)
    w0 = [bessel_omega_n(0, 1.0, 1 / t) ** 2 for t in taus]
    w1 = [bessel_omega_n(1, 1.0, 1 / t) ** 2 for t in taus]
    assert w0[0] > 0.999 and all(b < a for a, b in zip(w0, w0[1:]))
    assert w1[-1] > w1[0]


def test_truncation_self_check_raises():
    cfg = BesselSumConfig(q_max=1, extra_orders=1)
    with pytest.raises(TruncationError):
        omega_n_table(400.0, 1.0, cfg)


# --- resonant steady state ----------------------------------------------

def test_reduced_formula_value():
    p = TwoLevelParams(omega_p=1.0, tau=1e-4)
    assert reduced_resonant_rho11(1.0, p) == pytest.approx(0.5 - 0.475 / 1.1525, abs=1e-12)
    assert resonant_steady(1.0, p)[0] == pytest.approx(0.08785, abs=1e-3)


def test_resonant_rejects_detuning():
    with pytest.raises(DomainError):
        resonant_steady(40.0, TwoLevelParams(delta=1.0))


def test_resonant_warns_for_weak_drive():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(UserWarning):
            resonant_steady(1.0, FIG1)


def test_resonant_matches_cycle_average():
    for amp in (20.0, 40.0, 60.0):
        p = TwoLevelParams(omega_p=amp, tau=0.05)
        mono = build_monodromy(p)
        avg = period_average(mono, steady_state_fixed_point(mono).rho)
        rho11, im = resonant_steady(amp, p)
        assert abs(rho11 - observables(avg)[0]) <= 0.02
        assert abs(im - observables(avg)[1]) <= 0.02


def test_resonant_minimum_near_twice_omega():
    amps = np.arange(30, 50.01, 0.5)
    vals = [resonant_steady(a, TwoLevelParams(omega_p=a, tau=0.05))[0] for a in amps]
    mins, _ = local_minima(amps, vals)
    assert np.min(np.abs(mins - 40.0)) <= 0.5


def test_truncation_stability():
    for amp in (20.0, 40.0, 60.0):
        p = TwoLevelParams(omega_p=amp, tau=0.05)
        base = resonant_steady(amp, p)
        wide = resonant_steady(amp, p, BesselSumConfig(extra_orders=60))
        narrow = resonant_steady(amp, p, BesselSumConfig(n_max=60))
        assert max(abs(a - b) for a, b in zip(base, wide)) < 1e-8
        assert max(abs(a - b) for a, b in zip(base, narrow)) < 1e-8


@settings(max_examples=30, deadline=None)
@given(amp=st.floats(5.0, 200), tau=st.floats(1e-3, 1.0))
def test_resonant_population_bounds(amp, tau):
    # bounds hold inside the strong-drive domain the formula is built for
    rho11, _ = resonant_steady(amp, TwoLevelParams(omega_p=amp, tau=tau))
    assert -1e-12 <= rho11 <= 0.5


# --- CDT loci -----------------------------------------------------------

def test_cdt_locus():
    assert cdt_locus(20.0, 1, 0.0) == 40.0
    assert cdt_locus(20.0, 1, 40.0) == 0.0
    assert cdt_locus(20.0, 1, 41.0) is None
    with pytest.raises(ValidationError):
        cdt_locus(20.0, 0)


# --- Bloch equations ----------------------------------------------------

def test_bloch_pure_decay():
    p = TwoLevelParams(omega_p=0.0, tau=0.5)
    tr = integrate_bloch_resonant(p, t_end=30.0, rho0=np.diag([0.0, 1.0]))
    assert tr.u[-1] == pytest.approx(-0.5, abs=1e-9)
    assert tr.rho11[-1] == pytest.approx(0.0, abs=1e-9)


def test_bloch_matches_monodromy():
    p = TwoLevelParams(omega_p=1.0, tau=0.05)
    tr = integrate_bloch_resonant(p, t_end=20 * p.period)
    ref = evolve_stroboscopic(build_monodromy(p, PERIOD_END), ground_state(2), 20)
    assert np.max(np.abs(tr.rho11 - ref.populations(1))) <= 1e-8
    for k in (0, 7, 20):
        np.testing.assert_allclose(tr.density_matrix(k), ref.states[k], atol=1e-8)


def test_bloch_long_time_average():
    p = TwoLevelParams(omega_p=40.0, tau=0.05)
    tr = integrate_bloch_resonant(p, t_end=30 * p.period, samples_per_period=200)
    late = tr.times >= 20 * p.period
    assert abs(np.mean(tr.rho11[late]) - resonant_steady(40.0, p)[0]) <= 0.02


def test_bloch_reconstruction_is_valid_state():
    p = TwoLevelParams(omega_p=7.0, tau=0.1)
    tr = integrate_bloch_resonant(p, t_end=5 * p.period)
    for k in range(len(tr.times)):
        rho = tr.density_matrix(k)
        assert abs(np.trace(rho) - 1) < 1e-12
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-9)


def test_bloch_validation():
    with pytest.raises(DomainError):
        integrate_bloch_resonant(TwoLevelParams(delta=1.0), 1.0)
    with pytest.raises(ValidationError):
        integrate_bloch_resonant(FIG1, 1.0, reltol=0.1)
