"""Stroboscopic Floquet-Lindblad propagation.

The drives are piecewise constant, so one modulation cycle is the product
of two superoperator exponentials (the monodromy map). Its fixed point is
the periodic steady state seen at the stroboscopic sampling instant.

Sampling instants (``strobe``):

``"after_probe"`` (default)
    the instant the probe switches off; one cycle is then control-half
    followed by probe-half, ``E = E_probe @ E_control``.
``"period_end"``
    the end of the cycle as labelled by the pulse trains,
    ``E = E_control @ E_probe``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import (
    devectorize,
    hamiltonian_superop,
    lindblad_generator,
    matexp,
    matexp_integral,
    projector,
    trace_vector,
    validate_density_matrix,
    vectorize,
)
from .errors import (
    AmbiguityError,
    ConvergenceError,
    NumericError,
    StiffnessError,
    ValidationError,
)
from .systems import (
    LabFrameParams,
    ThreeLevelParams,
    TwoLevelParams,
    dimension,
    dissipators,
    hamiltonian,
)

log = logging.getLogger(__name__)

AFTER_PROBE = "after_probe"
PERIOD_END = "period_end"
STROBES = (AFTER_PROBE, PERIOD_END)

FIXED_POINT_RESIDUAL = 1e-10
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MonodromyMap:
    """One-cycle propagator ``E`` on column-stacked density matrices.

    ``halves`` lists ``(generator, duration)`` in the order they act starting
    from the sampling instant.
    """

    matrix: np.ndarray
    halves: tuple
    period: float
    dim: int
    strobe: str = AFTER_PROBE

    def apply(self, rho):
        return devectorize(self.matrix @ vectorize(rho))

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(np.linalg.eigvals(self.matrix))))


@dataclass(frozen=True, eq=False)
class SteadyStateResult:
    rho: np.ndarray
    method: str
    iterations: int
    residual: float


@dataclass(frozen=True, eq=False)
class StroboscopicTrace:
    times: np.ndarray
    states: list = field(default_factory=list)

    def __len__(self):
        return len(self.states)

    def populations(self, level=1):
        return np.array([s[level, level].real for s in self.states])


def half_generators(params):
    """Liouvillians of the probe half and of the second (control/off) half."""
    damping, dephasing = dissipators(params)
    period = params.period
    l_probe = lindblad_generator(hamiltonian(params, 0.25 * period), damping, dephasing)
    l_second = lindblad_generator(hamiltonian(params, 0.75 * period), damping, dephasing)
    return l_probe, l_second


def build_monodromy(params, strobe=AFTER_PROBE):
    """Compose the two half-cycle exponentials into the monodromy map."""
    if strobe not in STROBES:
        raise ValidationError(f"unknown strobe {strobe!r}; expected one of {STROBES}")
    if not isinstance(params, (TwoLevelParams, ThreeLevelParams)):
        raise ValidationError("monodromy maps need piecewise-constant (RWA) parameters")
    l_probe, l_second = half_generators(params)
    half = 0.5 * params.period
    e_probe = matexp(l_probe, half)
    e_second = matexp(l_second, half)
    if strobe == PERIOD_END:
        matrix = e_second @ e_probe
        halves = ((l_probe, half), (l_second, half))
    else:
        matrix = e_probe @ e_second
        halves = ((l_second, half), (l_probe, half))
    return MonodromyMap(matrix=matrix, halves=halves, period=params.period,
                        dim=dimension(params), strobe=strobe)


def _residual(mono, v):
    return float(np.linalg.norm(mono.matrix @ v - v))


def _finish(mono, v, method, iterations):
    rho = devectorize(v)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    try:
        validate_density_matrix(rho)
    except ValidationError as exc:
        raise NumericError(f"steady state is not a valid density matrix: {exc}") from exc
    return SteadyStateResult(rho=rho, method=method, iterations=iterations,
                             residual=_residual(mono, vectorize(rho)))


def steady_state_fixed_point(mono):
    """Solve ``(E - I) v = 0`` with ``trace(v) = 1``.

    Raises
    ------
    AmbiguityError
        If eigenvalue 1 of ``E`` is degenerate (non-unique periodic state).
    """
    n = mono.matrix.shape[0]
    eig = np.linalg.eigvals(mono.matrix)
    if np.count_nonzero(np.abs(eig - 1.0) < DEGENERACY_TOL) > 1:
        raise AmbiguityError("fixed-point space of the monodromy map is degenerate")
    a = mono.matrix - np.eye(n)
    a[0, :] = trace_vector(mono.dim)
    b = np.zeros(n, dtype=complex)
    b[0] = 1.0
    v = np.linalg.solve(a, b)
    if _residual(mono, v) > FIXED_POINT_RESIDUAL:
        v = v + np.linalg.solve(a, b - a @ v)
    result = _finish(mono, v, "fixed-point", 1)
    if result.residual > FIXED_POINT_RESIDUAL:
        raise NumericError(f"fixed-point residual {result.residual:.2e} above {FIXED_POINT_RESIDUAL}")
    return result


def ground_state(dim):
    return projector(0, 0, dim)


def steady_state_by_evolution(mono, rho0=None, tol=1e-12, max_periods=10**6):
    """Iterate ``rho <- E(rho)`` until successive states differ by < ``tol``."""
    if not tol > 0:
        raise ValidationError("tol must be positive")
    v = vectorize(ground_state(mono.dim) if rho0 is None else rho0)
    e = mono.matrix
    diff = np.inf
    for k in range(1, max_periods + 1):
        nxt = e @ v
        diff = np.linalg.norm(nxt - v)
        v = nxt
        if diff < tol:
            return _finish(mono, v, "evolution", k)
    raise ConvergenceError(f"no convergence after {max_periods} periods (last step {diff:.3e})",
                           residual=float(diff))


def steady_state(params, strobe=AFTER_PROBE):
    return steady_state_fixed_point(build_monodromy(params, strobe)).rho


def evolve_stroboscopic(mono, rho0, n):
    if n < 0:
        raise ValidationError("n must be >= 0")
    v = vectorize(rho0)
    states = [devectorize(v)]
    for _ in range(n):
        v = mono.matrix @ v
        states.append(devectorize(v))
    return StroboscopicTrace(times=mono.period * np.arange(n + 1), states=states)


def period_average(mono, rho):
    """Time average of ``rho(t)`` over one cycle starting from the sampling instant."""
    v = vectorize(rho)
    acc = np.zeros_like(v)
    for gen, duration in mono.halves:
        prop, integral = matexp_integral(gen, duration)
        acc = acc + integral @ v
        v = prop @ v
    return devectorize(acc / mono.period)


def observables(rho):
    """Return ``(rho11, Im rho10)``; ``rho10`` is row 1, column 0."""
    rho = np.asarray(rho)
    return float(rho[1, 1].real), float(rho[1, 0].imag)


def _lab_frame_pieces(params):
    damping, dephasing = dissipators(params)
    h0 = np.diag([-params.delta / 2, params.delta / 2]).astype(complex)
    static = lindblad_generator(h0, damping, dephasing)
    # -i[H, .] is linear in H; H = H0 - c(t)|0><1| - conj(c(t))|1><0|
    s_up = -hamiltonian_superop(projector(0, 1, 2))
    s_down = -hamiltonian_superop(projector(1, 0, 2))
    return static, s_up, s_down


def integrate_lab_frame(params, rho0=None, t_end=1.0, reltol=1e-9):
    """Integrate the non-RWA two-level master equation; sample at cycle ends.

    Drive-on halves use an adaptive Dormand-Prince 8(5,3) integrator with the
    step capped at 1/20 of the carrier period. Drive-off halves have a
    constant generator and are propagated exactly.
    """
    if not isinstance(params, LabFrameParams):
        raise ValidationError("integrate_lab_frame needs LabFrameParams")
    if not (1e-12 < reltol < 1e-3):
        raise ValidationError("reltol must lie in (1e-12, 1e-3)")
    period = params.period
    n = int(np.floor(t_end / period + 1e-9))
    static, s_up, s_down = _lab_frame_pieces(params)
    half = 0.5 * period
    off_prop = matexp(static, half)
    max_step = 2 * np.pi / (20 * params.omega_probe)
    wp2 = 2 * params.omega_probe
    amp = params.omega_p

    def rhs(t, v):
        c = amp * (1 + np.exp(1j * wp2 * t)) / 2
        return static @ v + (c * s_up + np.conj(c) * s_down) @ v

    v = vectorize(ground_state(2) if rho0 is None else rho0)
    states = [devectorize(v)]
    for k in range(n):
        t0 = k * period
        if amp == 0:
            v = off_prop @ v
        else:
            sol = solve_ivp(rhs, (t0, t0 + half), v, method="DOP853", rtol=reltol,
                            atol=reltol * 1e-3, max_step=max_step)
            if sol.status != 0:
                raise StiffnessError(f"lab-frame integration failed at t={t0}: {sol.message}")
            v = sol.y[:, -1]
        v = off_prop @ v
        states.append(devectorize(v))
    return StroboscopicTrace(times=period * np.arange(n + 1), states=states)


def check_trace_invariants(states, trace_tol=1e-12, positivity_tol=1e-10, hermitian_tol=1e-12):
    """Validate every state of a trace; returns the worst (trace, eig, herm) deviations."""
    worst = [0.0, 0.0, 0.0]
    for rho in states:
        worst[0] = max(worst[0], abs(np.trace(rho) - 1))
        worst[1] = max(worst[1], -np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        worst[2] = max(worst[2], np.max(np.abs(rho - rho.conj().T)))
    if worst[0] > trace_tol or worst[1] > positivity_tol or worst[2] > hermitian_tol:
        raise NumericError(f"state invariants violated: {worst}")
    return tuple(worst)
