"""Pulse trains, Hamiltonians and dissipator sets of the modulated systems.

Two time conventions are supported for the modulation parameter ``tau``:

``"angular"`` (default)
    ``omega = 1/tau`` is the *angular* modulation frequency, so one square-wave
    cycle lasts ``2*pi*tau``. Sidebands sit at ``Delta = +/-(2n-1)/tau`` and the
    closed-form two-level results (Fourier comb, Bessel sums, CDT loci at
    ``Omega_p = 2n/tau``) hold as written. The three-level reference fits of the
    ATS/EIT regimes are recovered in this convention.
``"literal"``
    One cycle lasts exactly ``tau``. Three-level absorption peaks then sit at
    ``Delta = 2 n pi / tau +/- Omega_c/4``.

Within a cycle the first half has the probe on (control off) and the second
half the probe off (control on). ``t mod period == period/2`` belongs to the
second half.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import projector
from .errors import ValidationError

ANGULAR = "angular"
LITERAL = "literal"
CONVENTIONS = (ANGULAR, LITERAL)


def physical_period(tau, convention=ANGULAR):
    """Duration of one square-wave cycle for modulation parameter ``tau``."""
    if convention not in CONVENTIONS:
        raise ValidationError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    if not (tau > 0 and math.isfinite(tau)):
        raise ValidationError(f"tau must be positive and finite, got {tau}")
    return 2.0 * math.pi * tau if convention == ANGULAR else float(tau)


def _check_rate(name, value):
    if not (math.isfinite(value) and value >= 0):
        raise ValidationError(f"{name} must be finite and >= 0, got {value}")


def _check_amp(name, value):
    if not (math.isfinite(value) and value >= 0):
        raise ValidationError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class PulseTrain:
    """Square wave with independent amplitudes on each half of the cycle."""

    amp_first_half: float
    amp_second_half: float
    period: float

    def __post_init__(self):
        _check_amp("amp_first_half", self.amp_first_half)
        _check_amp("amp_second_half", self.amp_second_half)
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValidationError(f"period must be positive and finite, got {self.period}")

    @property
    def omega(self):
        return 1.0 / self.period

    def value(self, t):
        return pulse_value(self, t)

    @classmethod
    def probe(cls, amplitude, period):
        return cls(amplitude, 0.0, period)

    @classmethod
    def control(cls, amplitude, period):
        return cls(0.0, amplitude, period)

    @classmethod
    def constant(cls, amplitude, period):
        return cls(amplitude, amplitude, period)


def pulse_value(train, t):
    phase = math.fmod(t, train.period)
    if phase < 0:
        phase += train.period
    return train.amp_first_half if phase < 0.5 * train.period else train.amp_second_half


@dataclass(frozen=True)
class TwoLevelParams:
    delta: float = 0.0
    omega_p: float = 1.0
    tau: float = 0.05
    gamma10: float = 1.0
    gamma1_phi: float = 0.4
    convention: str = ANGULAR
    modulated: bool = True

    def __post_init__(self):
        _check_amp("omega_p", self.omega_p)
        _check_rate("gamma10", self.gamma10)
        _check_rate("gamma1_phi", self.gamma1_phi)
        if not math.isfinite(self.delta):
            raise ValidationError("delta must be finite")
        physical_period(self.tau, self.convention)

    @property
    def period(self):
        return physical_period(self.tau, self.convention)

    @property
    def omega(self):
        """The modulation frequency ``1/tau``."""
        return 1.0 / self.tau

    @property
    def gamma1_prime(self):
        return self.gamma10 / 2 + self.gamma1_phi

    @property
    def gamma1(self):
        return 3 * self.gamma10 / 4 + self.gamma1_phi / 2

    @property
    def probe_train(self):
        if self.modulated:
            return PulseTrain.probe(self.omega_p, self.period)
        return PulseTrain.constant(self.omega_p, self.period)


@dataclass(frozen=True)
class ThreeLevelParams:
    delta: float = 0.0
    omega_p: float = 1.0
    omega_c: float = 10.8
    tau: float = 0.05
    gamma10: float = 1.0
    gamma21: float = 1.4
    gamma1_phi: float = 0.4
    gamma2_phi: float = 0.2
    convention: str = ANGULAR
    modulated: bool = True

    def __post_init__(self):
        _check_amp("omega_p", self.omega_p)
        _check_amp("omega_c", self.omega_c)
        for name in ("gamma10", "gamma21", "gamma1_phi", "gamma2_phi"):
            _check_rate(name, getattr(self, name))
        if not math.isfinite(self.delta):
            raise ValidationError("delta must be finite")
        physical_period(self.tau, self.convention)

    @property
    def period(self):
        return physical_period(self.tau, self.convention)

    @property
    def omega(self):
        return 1.0 / self.tau

    @property
    def big_gamma(self):
        return (self.gamma10 + self.gamma21) / 4 + (self.gamma1_phi + self.gamma2_phi) / 2

    @property
    def big_lambda(self):
        return (self.gamma10 - self.gamma21) / 4 + (self.gamma1_phi - self.gamma2_phi) / 2

    @property
    def probe_train(self):
        if self.modulated:
            return PulseTrain.probe(self.omega_p, self.period)
        return PulseTrain.constant(self.omega_p, self.period)

    @property
    def control_train(self):
        if self.modulated:
            return PulseTrain.control(self.omega_c, self.period)
        return PulseTrain.constant(self.omega_c, self.period)


@dataclass(frozen=True)
class LabFrameParams:
    """Two-level system without the rotating-wave approximation."""

    omega_probe: float = 6000.0
    delta: float = 0.0
    omega_p: float = 1.0
    tau: float = 0.001
    gamma10: float = 1.0
    gamma1_phi: float = 0.4
    convention: str = ANGULAR

    def __post_init__(self):
        if not (self.omega_probe > 0 and math.isfinite(self.omega_probe)):
            raise ValidationError("omega_probe must be positive")
        _check_amp("omega_p", self.omega_p)
        _check_rate("gamma10", self.gamma10)
        _check_rate("gamma1_phi", self.gamma1_phi)
        physical_period(self.tau, self.convention)
        if self.omega_p / abs(self.omega10) > 0.1:
            warnings.warn(
                f"omega_p/omega10 = {self.omega_p / abs(self.omega10):.3g} > 0.1: "
                "far outside the rotating-wave regime", stacklevel=2)

    @property
    def omega10(self):
        return self.delta + self.omega_probe

    @property
    def rwa(self):
        return TwoLevelParams(delta=self.delta, omega_p=self.omega_p, tau=self.tau,
                              gamma10=self.gamma10, gamma1_phi=self.gamma1_phi,
                              convention=self.convention)

    @property
    def period(self):
        return physical_period(self.tau, self.convention)


def _bare_two_level(delta):
    return np.diag([-delta / 2, delta / 2]).astype(complex)


def hamiltonian_two_level(params, t):
    """``Delta(-|0><0| + |1><1|)/2 - [Omega_p(t)|0><1| + h.c.]/2``."""
    h = _bare_two_level(params.delta)
    amp = pulse_value(params.probe_train, t)
    h[0, 1] -= amp / 2
    h[1, 0] -= amp / 2
    return h


def hamiltonian_three_level(params, t):
    """Ladder Hamiltonian with asynchronous probe and control trains.

    Diagonal ``(Delta/2)(-1, 1, 1)``; couplings ``-Omega_p(t)/2`` on 0-1 and
    ``-Omega_c(t)/2`` on 1-2.
    """
    d = params.delta / 2
    h = np.diag([-d, d, d]).astype(complex)
    wp = pulse_value(params.probe_train, t)
    wc = pulse_value(params.control_train, t)
    h[0, 1] = h[1, 0] = -wp / 2
    h[1, 2] = h[2, 1] = -wc / 2
    return h


def hamiltonian_lab_frame(params, t):
    """``H0 - [Omega_p(t)(1 + exp(2i w_p t))/2 |0><1| + h.c.]``."""
    h = _bare_two_level(params.delta)
    amp = pulse_value(PulseTrain.probe(params.omega_p, params.period), t)
    coupling = amp * (1 + np.exp(2j * params.omega_probe * t)) / 2
    h[0, 1] -= coupling
    h[1, 0] -= np.conj(coupling)
    return h


def dissipators(params):
    """Return ``(damping, dephasing)`` lists for :func:`lindblad_generator`."""
    if isinstance(params, ThreeLevelParams):
        damping = [(params.gamma10, projector(0, 1, 3)), (params.gamma21, projector(1, 2, 3))]
        dephasing = [(params.gamma1_phi, projector(1, 1, 3)), (params.gamma2_phi, projector(2, 2, 3))]
        return damping, dephasing
    if isinstance(params, (TwoLevelParams, LabFrameParams)):
        return [(params.gamma10, projector(0, 1, 2))], [(params.gamma1_phi, projector(1, 1, 2))]
    raise ValidationError(f"unsupported parameter type {type(params).__name__}")


def hamiltonian(params, t):
    if isinstance(params, ThreeLevelParams):
        return hamiltonian_three_level(params, t)
    if isinstance(params, LabFrameParams):
        return hamiltonian_lab_frame(params, t)
    return hamiltonian_two_level(params, t)


def dimension(params):
    return 3 if isinstance(params, ThreeLevelParams) else 2
