"""Probe-absorption lineshapes of the three-level ladder.

``QI`` is the first-order probe coherence with dressed-state cross coupling
``lambda``; ``ATS`` is the plain two-Lorentzian sum it reduces to at
``lambda = 0``. All quantities are in units of ``gamma10``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError, ValidationError
from .systems import LITERAL, physical_period

SINGULAR_TOL = 1e-14


def gamma_lambda(params):
    """Dressed-coherence decay ``gamma_big`` and cross-coupling ``lambda``."""
    g = (params.gamma10 + params.gamma21) / 4 + (params.gamma1_phi + params.gamma2_phi) / 2
    lam = (params.gamma10 - params.gamma21) / 4 + (params.gamma1_phi - params.gamma2_phi) / 2
    return g, lam


@dataclass(frozen=True)
class QiParams:
    omega_c: float
    omega_p: float
    gamma_big: float
    lam: float

    def __post_init__(self):
        if not self.gamma_big > 0:
            raise ValidationError(f"gamma_big must be positive, got {self.gamma_big}")
        if abs(self.lam) > self.gamma_big:
            warnings.warn(f"|lambda|={abs(self.lam)} exceeds gamma_big={self.gamma_big}",
                          stacklevel=2)

    def as_tuple(self):
        return (self.omega_c, self.omega_p, self.gamma_big, self.lam)


@dataclass(frozen=True)
class AtsParams:
    omega_c: float
    omega_p: float
    gamma_big: float

    def __post_init__(self):
        if not self.gamma_big > 0:
            raise ValidationError(f"gamma_big must be positive, got {self.gamma_big}")

    def as_tuple(self):
        return (self.omega_c, self.omega_p, self.gamma_big)


@dataclass(frozen=True, eq=False)
class QiEvaluation:
    numerator_shift: np.ndarray
    denominator: np.ndarray
    value: np.ndarray

    # short aliases matching the usual names of the two polynomials
    @property
    def a(self):
        return self.numerator_shift

    @property
    def b(self):
        return self.denominator


def _qi_terms(delta, omega_c, omega_p, g, lam):
    half = omega_c / 2
    a = -(half**2 - delta**2) * lam + (g - lam) ** 2 * (g + lam)
    b = (((delta + half) ** 2 + g**2) * ((delta - half) ** 2 + g**2)
         - 2 * (half**2 - delta**2 + g**2) * lam**2 + lam**4)
    return a, b


def qi_absorption(delta, p):
    """Evaluate the QI lineshape and its two polynomials at ``delta``.

    Raises
    ------
    SingularityError
        If the denominator polynomial is below 1e-14 in magnitude.
    """
    delta = np.asarray(delta, dtype=float)
    a, b = _qi_terms(delta, p.omega_c, p.omega_p, p.gamma_big, p.lam)
    if np.any(np.abs(b) < SINGULAR_TOL):
        raise SingularityError("QI denominator vanishes")
    half = p.omega_c / 2
    g = p.gamma_big
    value = (p.omega_p / (4 * b)) * ((delta - half) ** 2 * g + (delta + half) ** 2 * g + 2 * a)
    return QiEvaluation(numerator_shift=a, denominator=b, value=value)


def qi_value(delta, omega_c, omega_p, gamma_big, lam):
    """Plain-array QI lineshape, used as the fitting model."""
    half = omega_c / 2
    a, b = _qi_terms(delta, omega_c, omega_p, gamma_big, lam)
    return (omega_p / (4 * b)) * (((delta - half) ** 2 + (delta + half) ** 2) * gamma_big + 2 * a)


def ats_value(delta, omega_c, omega_p, gamma_big):
    half = omega_c / 2
    w = gamma_big * omega_p / 4
    return w / ((delta - half) ** 2 + gamma_big**2) + w / ((delta + half) ** 2 + gamma_big**2)


def ats_absorption(delta, p):
    return ats_value(np.asarray(delta, dtype=float), p.omega_c, p.omega_p, p.gamma_big)


def dip_threshold(gamma_big, lam):
    if 3 * gamma_big - lam <= 0:
        raise DomainError("dip criterion needs 3*gamma_big - lambda > 0")
    return 2 * math.sqrt((gamma_big - lam) ** 3 / (3 * gamma_big - lam))


def dip_visible(p):
    """True when the QI lineshape has a local minimum at ``delta = 0``."""
    return p.omega_c > dip_threshold(p.gamma_big, p.lam)


@dataclass(frozen=True, eq=False)
class DressedSolution:
    """First-order coherences ``rho_{+0}``, ``rho_{-0}`` and ``Im rho10``."""

    rho_plus: complex
    rho_minus: complex
    im_rho10: float


def dressed_matrix(delta, omega_c, gamma_big, lam):
    """Coupling matrix, ``|->`` row first."""
    half = omega_c / 2
    return np.array([[1j * (delta + half) + gamma_big, lam],
                     [lam, 1j * (delta - half) + gamma_big]], dtype=complex)


def dressed_first_order(delta, params=None, *, omega_c=None, omega_p=None, gamma_big=None, lam=None):
    """Solve the dressed-basis first-order equations for the probe coherence.

    Parameters may come from a :class:`ThreeLevelParams` (rates are turned into
    ``gamma_big``/``lambda``) or be given explicitly as keywords.
    """
    if params is not None:
        gamma_big, lam = gamma_lambda(params)
        omega_c, omega_p = params.omega_c, params.omega_p
    if None in (omega_c, omega_p, gamma_big, lam):
        raise ValidationError("need params or all of omega_c, omega_p, gamma_big, lam")
    m = dressed_matrix(delta, omega_c, gamma_big, lam)
    if abs(np.linalg.det(m)) < SINGULAR_TOL:
        raise SingularityError("dressed coupling matrix is singular")
    drive = 1j * omega_p / (2 * math.sqrt(2)) * np.ones(2)
    rho_minus, rho_plus = np.linalg.solve(m, drive)
    return DressedSolution(rho_plus=complex(rho_plus), rho_minus=complex(rho_minus),
                           im_rho10=float(((rho_plus + rho_minus) / math.sqrt(2)).imag))


def dressed_closed_form(delta, omega_c, omega_p, gamma_big, lam):
    """Return ``(rho_minus, rho_plus)`` from Cramer's rule on the 2x2 system."""
    half = omega_c / 2
    den = (1j * (-delta - half) - gamma_big) * (1j * (-delta + half) - gamma_big) - lam**2
    pref = 1j * omega_p / (2 * math.sqrt(2))
    rho_minus = pref * (1j * (delta - half) + gamma_big - lam) / den
    rho_plus = pref * (1j * (delta + half) + gamma_big - lam) / den
    return rho_minus, rho_plus


@dataclass(frozen=True)
class PeakPrediction:
    """Accumulated relative phases of the two dressed transitions over one cycle."""

    period: float
    omega_c: float

    def phases(self, delta):
        """Return ``(first_half, second_half, total)`` for the + and - branches."""
        half_c = self.omega_c / 2
        first = ((delta + half_c) * self.period / 2, (delta - half_c) * self.period / 2)
        second = delta * self.period / 2
        total = ((delta + self.omega_c / 4) * self.period, (delta - self.omega_c / 4) * self.period)
        return first, second, total

    def detunings(self, n_range):
        step = 2 * math.pi / self.period
        out = []
        for n in n_range:
            out.extend([n * step - self.omega_c / 4, n * step + self.omega_c / 4])
        return sorted(out)


def peak_positions(tau, omega_c, n_range, convention=LITERAL):
    """Detunings where the cycle phase ``(delta +/- omega_c/4) T`` is a multiple of ``2 pi``.

    ``T`` is the cycle length for ``tau`` under ``convention``; with the
    literal convention this is ``2 n pi / tau +/- omega_c/4``.
    """
    return PeakPrediction(physical_period(tau, convention), omega_c).detunings(n_range)


def fit_initial_guess(omega_c, omega_p, gamma_big, lam=None):
    """Half-duty-cycle starting point: splitting and probe at half their physical values."""
    if lam is None:
        return (omega_c / 2, omega_p / 2, gamma_big)
    return (omega_c / 2, omega_p / 2, gamma_big, lam)
