"""Parameter-grid scans, spectra and RWA comparisons.

Every grid point is independent: it builds its own monodromy map and solves
for the periodic steady state. Points are farmed out to a process pool when
more than one worker is requested (``FLOQUET_QI_THREADS`` caps the count).
Failed points become NaN and are logged instead of aborting the scan.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, FloquetError, ValidationError
from .propagation import (
    AFTER_PROBE,
    PERIOD_END,
    build_monodromy,
    evolve_stroboscopic,
    ground_state,
    integrate_lab_frame,
    observables,
    period_average,
    steady_state_fixed_point,
)
from .systems import LabFrameParams, ThreeLevelParams, TwoLevelParams

log = logging.getLogger(__name__)

DBM_CALIBRATION = 1.38e-4
STROBE = "strobe"
AVERAGE = "average"
OBSERVABLE_MODES = (STROBE, AVERAGE)


def dbm_from_rabi(omega_p, calibration=DBM_CALIBRATION):
    omega_p = np.asarray(omega_p, dtype=float)
    if np.any(omega_p <= 0):
        raise DomainError("Rabi frequency must be positive to express in dBm")
    out = 10 * np.log10(calibration * omega_p**2)
    return out if out.ndim else float(out)


def rabi_from_dbm(power, calibration=DBM_CALIBRATION):
    out = np.sqrt(10 ** (np.asarray(power, dtype=float) / 10) / calibration)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class ScanGrid:
    """``values[i, j]`` is the observable at ``axis1_values[i]``, ``axis2_values[j]``."""

    axis1_name: str
    axis1_values: np.ndarray
    axis2_name: str
    axis2_values: np.ndarray
    observable: str
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.axis1_values), len(self.axis2_values))
        if self.values.shape != shape:
            raise ValidationError(f"values shape {self.values.shape} != axes {shape}")

    @property
    def invalid_count(self):
        return int(np.count_nonzero(~np.isfinite(self.values)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    delta: np.ndarray
    rho11: np.ndarray
    im_rho10: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.delta) > 1 and not np.all(np.diff(self.delta) > 0):
            raise ValidationError("spectrum detunings must be strictly increasing")

    def window(self, lo, hi):
        keep = (self.delta >= lo - 1e-12) & (self.delta <= hi + 1e-12)
        return Spectrum(self.delta[keep], self.rho11[keep], self.im_rho10[keep], self.provenance)


def _params_dict(params):
    out = {k: getattr(params, k) for k in params.__dataclass_fields__}
    out["system"] = type(params).__name__
    return out


def point_observables(params, strobe=AFTER_PROBE, mode=STROBE):
    """``(rho11, Im rho10)`` of the periodic steady state for one parameter set."""
    mono = build_monodromy(params, strobe)
    rho = steady_state_fixed_point(mono).rho
    if mode == AVERAGE:
        rho = period_average(mono, rho)
    elif mode != STROBE:
        raise ValidationError(f"unknown observable mode {mode!r}")
    return observables(rho)


def _safe_point(job):
    params, strobe, mode = job
    try:
        return point_observables(params, strobe, mode)
    except FloquetError as exc:
        log.warning("grid point failed (%s): %s", params, exc)
        return (math.nan, math.nan)


def worker_count(requested=None):
    cap = os.environ.get("FLOQUET_QI_THREADS")
    n = requested if requested is not None else 1
    if cap:
        try:
            n = min(n, int(cap)) if requested is not None else int(cap)
        except ValueError:
            raise ValidationError(f"FLOQUET_QI_THREADS must be an integer, got {cap!r}")
    return max(1, int(n))


def run_points(param_list, strobe=AFTER_PROBE, mode=STROBE, workers=None):
    """Evaluate many parameter sets; returns an ``(n, 2)`` array in input order."""
    jobs = [(p, strobe, mode) for p in param_list]
    n = worker_count(workers)
    if n == 1 or len(jobs) < 64:
        results = [_safe_point(j) for j in jobs]
    else:
        chunk = max(1, len(jobs) // (4 * n))
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_safe_point, jobs, chunksize=chunk))
    return np.array(results, dtype=float).reshape(len(jobs), 2)


def scan_two_level(deltas, powers_dbm, tau=0.05, gamma10=1.0, gamma1_phi=0.4,
                   convention="angular", strobe=AFTER_PROBE, mode=STROBE, workers=None):
    """rho11 over (detuning, probe power in dBm)."""
    deltas = np.asarray(deltas, dtype=float)
    powers = np.asarray(powers_dbm, dtype=float)
    if deltas.size == 0 or powers.size == 0:
        raise ValidationError("scan grids must be nonempty")
    plist = [TwoLevelParams(delta=d, omega_p=rabi_from_dbm(p), tau=tau, gamma10=gamma10,
                            gamma1_phi=gamma1_phi, convention=convention)
             for d in deltas for p in powers]
    vals = run_points(plist, strobe, mode, workers)[:, 0].reshape(deltas.size, powers.size)
    prov = {"system": "TwoLevelParams", "tau": tau, "gamma10": gamma10, "gamma1_phi": gamma1_phi,
            "convention": convention, "strobe": strobe, "mode": mode}
    return ScanGrid("delta", deltas, "power_dbm", powers, "rho11", vals, prov)


def scan_three_level_tau(deltas, taus, params, strobe=AFTER_PROBE, mode=STROBE, workers=None):
    """rho11 over (detuning, tau) for a three-level parameter template."""
    deltas = np.asarray(deltas, dtype=float)
    taus = np.asarray(taus, dtype=float)
    if deltas.size == 0 or taus.size == 0:
        raise ValidationError("scan grids must be nonempty")
    plist = [replace(params, delta=d, tau=t) for d in deltas for t in taus]
    vals = run_points(plist, strobe, mode, workers)[:, 0].reshape(deltas.size, taus.size)
    prov = _params_dict(params)
    prov.update(strobe=strobe, mode=mode)
    return ScanGrid("delta", deltas, "tau", taus, "rho11", vals, prov)


def spectrum(params, deltas, strobe=AFTER_PROBE, mode=STROBE, workers=None):
    """Steady-state ``rho11`` and ``Im rho10`` against detuning for any RWA system."""
    deltas = np.asarray(deltas, dtype=float)
    plist = [replace(params, delta=float(d)) for d in deltas]
    res = run_points(plist, strobe, mode, workers)
    prov = _params_dict(params)
    prov.pop("delta", None)
    prov.update(strobe=strobe, mode=mode)
    return Spectrum(deltas, res[:, 0], res[:, 1], prov)


def spectrum_three_level(tau, deltas, params, strobe=AFTER_PROBE, mode=STROBE, workers=None):
    if not isinstance(params, ThreeLevelParams):
        raise ValidationError("spectrum_three_level needs ThreeLevelParams")
    return spectrum(replace(params, tau=tau), deltas, strobe, mode, workers)


def symmetric_grid(half_width, spacing):
    """Grid ``-half_width .. half_width`` with exact multiples of ``spacing``."""
    n = int(round(half_width / spacing))
    return np.arange(-n, n + 1) * spacing


def local_maxima(x, y, min_height=None):
    """Interior strict-or-plateau local maxima of a sampled curve."""
    y = np.asarray(y)
    idx = [i for i in range(1, len(y) - 1) if y[i] >= y[i - 1] and y[i] > y[i + 1]]
    if min_height is not None:
        idx = [i for i in idx if y[i] >= min_height]
    return np.asarray(x)[idx], y[idx]


def local_minima(x, y):
    xs, ys = local_maxima(x, -np.asarray(y))
    return xs, -ys


@dataclass(frozen=True, eq=False)
class RwaComparison:
    times: np.ndarray
    rho11_exact: np.ndarray
    rho11_rwa: np.ndarray

    @property
    def max_deviation(self):
        return float(np.max(np.abs(self.rho11_exact - self.rho11_rwa)))


def rwa_comparison(lab, n_periods, reltol=1e-9):
    """Lab-frame and RWA stroboscopic ``rho11`` from ``|0>`` at cycle ends."""
    if not isinstance(lab, LabFrameParams):
        raise ValidationError("rwa_comparison needs LabFrameParams")
    if n_periods < 1:
        raise ValidationError("n_periods must be >= 1")
    exact = integrate_lab_frame(lab, t_end=n_periods * lab.period, reltol=reltol)
    mono = build_monodromy(lab.rwa, PERIOD_END)
    approx = evolve_stroboscopic(mono, ground_state(2), n_periods)
    return RwaComparison(times=exact.times, rho11_exact=exact.populations(1),
                         rho11_rwa=approx.populations(1))
