import math
from dataclasses import replace

import numpy as np
import pytest

from floquet_qi.core import vectorize
from floquet_qi.errors import AmbiguityError, ConvergenceError, ValidationError
from floquet_qi.propagation import (
    AFTER_PROBE,
    PERIOD_END,
    build_monodromy,
    check_trace_invariants,
    evolve_stroboscopic,
    ground_state,
    integrate_lab_frame,
    observables,
    period_average,
    steady_state,
    steady_state_by_evolution,
    steady_state_fixed_point,
)
from floquet_qi.systems import LabFrameParams, ThreeLevelParams, TwoLevelParams, dissipators, hamiltonian
from oracles import rk4_one_period, two_level_hamiltonian

FIG1 = TwoLevelParams(delta=0.0, omega_p=1.0, tau=0.05)


def _rk4_for(params):
    damping, dephasing = dissipators(params)
    halves = [hamiltonian(params, 0.25 * params.period), hamiltonian(params, 0.75 * params.period)]
    return rk4_one_period(halves, damping, dephasing, params.period, steps=1500)


def test_monodromy_matches_rk4_fig1():
    exact = build_monodromy(FIG1, PERIOD_END).matrix
    assert np.max(np.abs(exact - _rk4_for(FIG1))) <= 1e-9


def test_monodromy_matches_rk4_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        if rng.random() < 0.5:
            p = TwoLevelParams(delta=rng.uniform(-30, 30), omega_p=rng.uniform(0, 60),
                               tau=rng.uniform(0.005, 0.1), gamma1_phi=rng.uniform(0, 1))
        else:
            p = ThreeLevelParams(delta=rng.uniform(-10, 10), omega_p=rng.uniform(0, 3),
                                 omega_c=rng.uniform(0, 12), tau=rng.uniform(0.005, 0.1),
                                 gamma21=rng.uniform(0, 2), gamma2_phi=rng.uniform(0, 1))
        assert np.max(np.abs(build_monodromy(p, PERIOD_END).matrix - _rk4_for(p))) <= 1e-9


def test_strobe_orders_are_conjugate():
    a = build_monodromy(FIG1, AFTER_PROBE)
    b = build_monodromy(FIG1, PERIOD_END)

    def spectrum(m):
        ev = np.linalg.eigvals(m)
        return sorted((round(e.real, 10), round(abs(e.imag), 10)) for e in ev)

    assert spectrum(a.matrix) == spectrum(b.matrix)


def test_trace_preserving_and_contractive():
    rng = np.random.default_rng(8)
    mono = build_monodromy(ThreeLevelParams(delta=1.0, tau=0.1))
    for _ in range(5):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        assert abs(np.trace(mono.apply(rho)) - 1) <= 1e-12
    assert mono.spectral_radius <= 1 + 1e-9


def test_pure_detuning_rotates_coherences():
    p = TwoLevelParams(delta=3.0, omega_p=0.0, tau=0.2, gamma10=0.0, gamma1_phi=0.0)
    mono = build_monodromy(p)
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = mono.apply(rho)
    assert out[1, 1].real == pytest.approx(0.5)
    assert out[1, 0] == pytest.approx(0.5 * np.exp(-1j * 3.0 * p.period))


def test_free_decay():
    p = TwoLevelParams(omega_p=0.0, tau=0.1)
    out = build_monodromy(p).apply(np.diag([0.0, 1.0]).astype(complex))
    assert out[1, 1].real == pytest.approx(math.exp(-p.period), rel=1e-12)


def test_undriven_steady_state_is_ground():
    res = steady_state_fixed_point(build_monodromy(TwoLevelParams(omega_p=0.0)))
    np.testing.assert_allclose(res.rho, ground_state(2), atol=1e-12)
    assert res.residual <= 1e-10


def test_constant_drive_steady_state():
    p = TwoLevelParams(omega_p=1.0, modulated=False)
    rho11, _ = observables(steady_state(p))
    assert rho11 == pytest.approx(0.5 - 0.5 * 0.9 / (0.9 + 1.0), abs=1e-12)
    assert rho11 == pytest.approx(0.26316, abs=1e-5)


def test_fixed_point_and_evolution_agree():
    rng = np.random.default_rng(9)
    cases = [replace(FIG1, delta=rng.uniform(-300, 300), omega_p=rng.uniform(0.1, 150))
             for _ in range(25)]
    cases += [ThreeLevelParams(delta=rng.uniform(-300, 300), tau=math.exp(rng.uniform(-4, -0.2)))
              for _ in range(25)]
    for p in cases:
        mono = build_monodromy(p)
        a = steady_state_fixed_point(mono).rho
        b = steady_state_by_evolution(mono).rho
        assert np.linalg.norm(a - b) <= 1e-9


def test_initial_state_independence():
    mono = build_monodromy(FIG1)
    a = steady_state_by_evolution(mono, ground_state(2)).rho
    b = steady_state_by_evolution(mono, np.eye(2) / 2).rho
    assert np.linalg.norm(a - b) <= 1e-9


def test_evolution_from_steady_state_stops_at_once():
    mono = build_monodromy(FIG1)
    rho = steady_state_fixed_point(mono).rho
    assert steady_state_by_evolution(mono, rho).iterations == 1


def test_evolution_convergence_error():
    mono = build_monodromy(FIG1)
    with pytest.raises(ConvergenceError):
        steady_state_by_evolution(mono, max_periods=3)
    with pytest.raises(ValidationError):
        steady_state_by_evolution(mono, tol=0)


def test_degenerate_fixed_point_is_ambiguous():
    p = TwoLevelParams(omega_p=0.0, gamma10=0.0, gamma1_phi=0.0)
    with pytest.raises(AmbiguityError):
        steady_state_fixed_point(build_monodromy(p))


def test_stroboscopic_trace():
    mono = build_monodromy(FIG1, PERIOD_END)
    trace = evolve_stroboscopic(mono, ground_state(2), 400)
    assert len(evolve_stroboscopic(mono, ground_state(2), 0)) == 1
    np.testing.assert_allclose(np.diff(trace.times), mono.period)
    check_trace_invariants(trace.states)
    pops = trace.populations(1)
    assert pops[0] == 0
    tail = pops[50:]
    assert np.all(np.diff(tail) >= -1e-3)
    assert abs(pops[-1] - pops[-2]) < 1e-6


def test_period_average_of_constant_generator():
    # with no drive the populations decay and the average is the integral
    p = TwoLevelParams(omega_p=0.0, tau=0.1, gamma1_phi=0.0)
    mono = build_monodromy(p)
    avg = period_average(mono, np.diag([0.0, 1.0]).astype(complex))
    t = p.period
    assert avg[1, 1].real == pytest.approx((1 - math.exp(-t)) / t, rel=1e-12)


def test_observables_sign_convention():
    assert observables(ground_state(2)) == (0.0, 0.0)
    rho = np.array([[0.5, -0.5j], [0.5j, 0.5]])
    assert observables(rho) == (0.5, 0.5)
    _, im = observables(steady_state(TwoLevelParams(omega_p=0.5)))
    assert im > 0


def test_lab_frame_without_drive_equals_rwa():
    lab = LabFrameParams(omega_p=0.0, tau=0.05)
    rho0 = np.diag([0.2, 0.8]).astype(complex)
    exact = integrate_lab_frame(lab, rho0, t_end=5 * lab.period)
    rwa = evolve_stroboscopic(build_monodromy(lab.rwa, PERIOD_END), rho0, 5)
    for a, b in zip(exact.states, rwa.states):
        np.testing.assert_allclose(a, b, atol=1e-13)


def test_lab_frame_short_run_tracks_rwa():
    lab = LabFrameParams(tau=0.001)
    exact = integrate_lab_frame(lab, t_end=40 * lab.period)
    rwa = evolve_stroboscopic(build_monodromy(lab.rwa, PERIOD_END), ground_state(2), 40)
    assert np.max(np.abs(exact.populations(1) - rwa.populations(1))) < 1e-6
    check_trace_invariants(exact.states, trace_tol=1e-9, hermitian_tol=1e-9)


def test_lab_frame_validation():
    with pytest.raises(ValidationError):
        integrate_lab_frame(LabFrameParams(), reltol=1e-2)
    with pytest.raises(ValidationError):
        integrate_lab_frame(TwoLevelParams())


def test_monodromy_needs_rwa_params():
    with pytest.raises(ValidationError):
        build_monodromy(LabFrameParams())
    with pytest.raises(ValidationError):
        build_monodromy(FIG1, "midway")


def test_two_level_rhs_oracle_consistency():
    # the oracle's Hamiltonian agrees with the package's during the probe half
    np.testing.assert_array_equal(two_level_hamiltonian(0.0, 1.0), hamiltonian(FIG1, 0.0))
    assert vectorize(ground_state(2))[0] == 1
