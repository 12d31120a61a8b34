"""Closed-form results for the square-wave-modulated two-level system.

Frequencies follow the ``"angular"`` convention of :mod:`floquet_qi.systems`:
``omega = 1/tau`` and the harmonics of the square wave sit at odd multiples
of ``omega``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericError, StiffnessError, TruncationError, ValidationError

BESSEL_ABS_TOL = 1e-13
_SERIES_LIMIT = 0.5


# --------------------------------------------------------------------------
# Bessel functions of the first kind
# --------------------------------------------------------------------------

def _bessel_series(k, x):
    half = 0.5 * x
    term = half**k / math.factorial(k)
    total = term
    m = 0
    while abs(term) > 1e-18 * max(abs(total), 1e-300):
        m += 1
        term *= -half * half / (m * (m + k))
        total += term
        if m > 200:
            break
    return total


def _bessel_miller(kmax, x):
    """J_0..J_kmax at ``x > 0`` by normalised backward recurrence."""
    start = max(kmax, int(x)) + 20 + int(math.sqrt(40.0 * max(kmax, x, 1.0)))
    start += start % 2
    values = np.zeros(kmax + 1)
    nxt, cur = 0.0, 1e-300
    norm = 0.0
    for n in range(start, 0, -1):
        prev = 2.0 * n / x * cur - nxt
        nxt, cur = cur, prev
        # cur now holds J_{n-1}
        if abs(cur) > 1e250:
            cur *= 1e-250
            nxt *= 1e-250
            values *= 1e-250
            norm *= 1e-250
        if n - 1 <= kmax:
            values[n - 1] = cur
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * cur
    norm += cur
    return values / norm


def bessel_j(k, x):
    """Bessel function of the first kind ``J_k(x)`` for integer ``k``.

    Power series for ``|x| < 0.5``, normalised backward (Miller) recurrence
    otherwise; absolute accuracy about 1e-13 for ``|x| < 1e4``.
    """
    k = int(k)
    if not math.isfinite(x) or abs(x) >= 1e4:
        raise DomainError(f"bessel_j argument out of range: {x}")
    sign = 1.0
    if k < 0:
        k = -k
        sign = -1.0 if k % 2 else 1.0
    if x < 0:
        x = -x
        sign *= -1.0 if k % 2 else 1.0
    if x == 0.0:
        return sign * (1.0 if k == 0 else 0.0)
    if x < _SERIES_LIMIT:
        return sign * _bessel_series(k, x)
    return sign * float(_bessel_miller(k, x)[k])


def bessel_j_orders(x, kmax):
    """Array ``[J_{-kmax}(x), ..., J_{kmax}(x)]``."""
    if not math.isfinite(x) or abs(x) >= 1e4:
        raise DomainError(f"bessel_j argument out of range: {x}")
    ax = abs(x)
    if ax == 0.0:
        pos = np.zeros(kmax + 1)
        pos[0] = 1.0
    elif ax < _SERIES_LIMIT:
        pos = np.array([_bessel_series(k, ax) for k in range(kmax + 1)])
    else:
        pos = _bessel_miller(kmax, ax)
    ks = np.arange(kmax + 1)
    if x < 0:
        pos = pos * np.where(ks % 2, -1.0, 1.0)
    neg = pos[:0:-1] * np.where(ks[:0:-1] % 2, -1.0, 1.0)
    return np.concatenate([neg, pos])


# --------------------------------------------------------------------------
# Fourier comb of the square wave
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FourierComponents:
    """``dc = Omega_p/2``; ``harmonics[n-1] = (Omega_pn, omega_n)``.

    ``Omega_pn = Omega_p/((2n-1) pi)`` is the Rabi frequency of each of the two
    sidebands at ``+/-omega_n``; the cosine amplitude of harmonic n is
    ``2 Omega_pn``.
    """

    dc: float
    harmonics: tuple

    def partial_sum(self, t):
        """Rebuild the square wave (probe-on half first) from the comb."""
        t = np.asarray(t, dtype=float)
        total = np.full(t.shape, self.dc)
        for amp, freq in self.harmonics:
            total = total + 2 * amp * np.sin(freq * t)
        return total


def fourier_components(omega_p, omega, n_max):
    if omega_p < 0 or not omega > 0 or n_max < 1:
        raise ValidationError("need omega_p >= 0, omega > 0, n_max >= 1")
    harmonics = tuple((omega_p / ((2 * n - 1) * math.pi), (2 * n - 1) * omega)
                      for n in range(1, n_max + 1))
    return FourierComponents(dc=omega_p / 2, harmonics=harmonics)


def weak_drive_rho11(delta, params, n_max=200, symmetric=True):
    """Sum of independent saturated Lorentzians for weak modulated drive.

    Central line at ``Delta = 0`` with Rabi frequency ``Omega_p/2`` plus one
    line per comb tooth. With ``symmetric=True`` teeth at both ``-omega_n``
    and ``+omega_n`` are included; ``symmetric=False`` keeps only the
    ``(Delta + omega_n)`` terms.
    """
    omega = params.omega
    if params.omega_p >= omega:
        warnings.warn(f"weak-drive formula used with omega_p={params.omega_p} >= omega={omega}",
                      stacklevel=2)
    g10 = params.gamma10
    gp = params.gamma1_prime
    delta = np.asarray(delta, dtype=float)

    def line(rabi, detuning):
        return (gp / (2 * g10)) * rabi**2 / (gp**2 + detuning**2 + (gp / g10) * rabi**2)

    total = line(params.omega_p / 2, delta)
    comb = fourier_components(params.omega_p, omega, n_max)
    for rabi, freq in comb.harmonics:
        total = total + line(rabi, delta + freq)
        if symmetric:
            total = total + line(rabi, delta - freq)
    return total if total.ndim else float(total)


# --------------------------------------------------------------------------
# Nested Bessel sums for the resonant steady state
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BesselSumConfig:
    """Truncation of the nested Bessel series.

    ``q_max`` harmonic factors are kept; factor ``j`` has argument
    ``(-1)^j 2 Omega_p / ((2j-1)^2 omega pi)`` and orders
    ``|k| <= ceil(|x|) + extra_orders * max(1, |x|^(1/3))``; the cube root
    tracks the width of the turning-point region past which ``J_k(x)``
    decays. ``q_max=None`` uses the exact
    infinite-product limit (closed form). ``n_max`` limits the outer sum;
    ``None`` keeps the whole support.
    """

    q_max: int = 4
    extra_orders: int = 30
    n_max: int = None
    self_check: bool = True

    def __post_init__(self):
        if self.q_max is not None and self.q_max < 1:
            raise ValidationError("q_max must be >= 1")
        if self.extra_orders < 1:
            raise ValidationError("extra_orders must be >= 1")

    def order_cutoff(self, x):
        return _order_cutoff(x, self.extra_orders)


def _order_cutoff(x, extra_orders):
    return int(math.ceil(abs(x))) + int(math.ceil(extra_orders * max(1.0, abs(x) ** (1 / 3))))


def harmonic_arguments(omega_p, omega, q_max):
    return [(-1) ** j * 2 * omega_p / ((2 * j - 1) ** 2 * omega * math.pi)
            for j in range(1, q_max + 1)]


def _nested_coefficients(omega_p, omega, q_max, extra_orders):
    # Jacobi-Anger: prod_j exp(i a_j sin((2j-1) t)) = sum_n Omega_n exp(i n t)
    coeffs = np.array([1.0])
    offset = 0
    for j, arg in enumerate(harmonic_arguments(omega_p, omega, q_max), start=1):
        kmax = _order_cutoff(arg, extra_orders)
        js = bessel_j_orders(arg, kmax)
        js[np.abs(js) < 1e-300] = 0.0
        stride = 2 * j - 1
        spread = np.zeros(2 * kmax * stride + 1)
        spread[::stride] = js
        coeffs = np.convolve(coeffs, spread)
        offset += kmax * stride
    return coeffs, offset


def omega_n_closed_form(n, omega_p, omega):
    """Exact ``q_max -> infinity`` limit of the nested Bessel sum.

    The infinite product is the Fourier series of ``exp(-i b tri(t))`` with a
    unit triangle wave and ``b = Omega_p/(2 omega)``, which integrates to
    ``[sinc((b+n)/2) + (-1)^n sinc((b-n)/2)]/2``.
    """
    n = np.asarray(n)
    b = omega_p / (2.0 * omega)
    return 0.5 * (np.sinc((b + n) / 2) + np.where(n % 2, -1.0, 1.0) * np.sinc((b - n) / 2))


def omega_n_table(omega_p, omega, cfg=None):
    """Return ``(orders, Omega_n)`` over the retained support."""
    cfg = cfg or BesselSumConfig()
    if not omega > 0:
        raise ValidationError("omega must be positive")
    if cfg.q_max is None:
        b = omega_p / (2.0 * omega)
        span = cfg.n_max if cfg.n_max is not None else int(math.ceil(b)) + 4000
        orders = np.arange(-span, span + 1)
        return orders, omega_n_closed_form(orders, omega_p, omega)
    coeffs, offset = _nested_coefficients(omega_p, omega, cfg.q_max, cfg.extra_orders)
    if cfg.self_check:
        wide, wide_off = _nested_coefficients(omega_p, omega, cfg.q_max, 2 * cfg.extra_orders)
        core = wide[wide_off - offset: wide_off + offset + 1]
        err = float(np.max(np.abs(core - coeffs)))
        if err > 1e-10:
            raise TruncationError(f"doubling the Bessel order cutoff changed Omega_n by {err:.2e}")
        # the full product is unitary, so any lost tail shows up as a norm deficit
        deficit = abs(1.0 - float(np.sum(coeffs**2)))
        if deficit > 1e-12:
            raise TruncationError(f"retained Omega_n miss {deficit:.2e} of the unit norm")
    orders = np.arange(-offset, offset + 1)
    if cfg.n_max is not None:
        keep = np.abs(orders) <= cfg.n_max
        orders, coeffs = orders[keep], coeffs[keep]
    return orders, coeffs


def bessel_omega_n(n, omega_p, omega, cfg=None):
    """``Omega_n`` from the nested Bessel series (0 outside the support)."""
    orders, coeffs = omega_n_table(omega_p, omega, cfg)
    lookup = dict(zip(orders.tolist(), coeffs.tolist()))
    if np.ndim(n) == 0:
        return lookup.get(int(n), 0.0)
    return np.array([lookup.get(int(k), 0.0) for k in np.asarray(n).ravel()]).reshape(np.shape(n))


def resonant_steady(omega_p, params, cfg=None):
    """Resonant (``Delta = 0``) secular steady state as ``(rho11, Im rho10)``.

    ``rho11 = 1/2 - (g10 g1 / 2) sum_n Omega_n^2 / (g1^2 + (Omega_p/2 - n w)^2)``
    and ``Im rho10 = (g10/2) sum_n Omega_n^2 (Omega_p/2 - n w) / (...)``
    with ``g1 = 3 g10/4 + g1phi/2``. These describe the cycle-averaged state.
    """
    if params.delta != 0:
        raise DomainError("resonant_steady is only defined for delta = 0")
    g1 = params.gamma1
    if omega_p < 5 * g1:
        warnings.warn(f"omega_p={omega_p} < 5*gamma1={5 * g1}: outside the strong-drive regime",
                      stacklevel=2)
    omega = params.omega
    orders, coeffs = omega_n_table(omega_p, omega, cfg)
    detune = omega_p / 2 - orders * omega
    weights = coeffs**2 / (g1**2 + detune**2)
    rho11 = 0.5 - 0.5 * params.gamma10 * g1 * float(np.sum(weights))
    im_rho10 = 0.5 * params.gamma10 * float(np.sum(weights * detune))
    return rho11, im_rho10


def reduced_resonant_rho11(omega_p, params):
    """Fast-modulation limit ``1/2 - (g10/2) g1 / (g1^2 + (Omega_p/2)^2)``."""
    g1 = params.gamma1
    return 0.5 - 0.5 * params.gamma10 * g1 / (g1**2 + (omega_p / 2) ** 2)


def unmodulated_resonant_rho11(omega_p, params):
    gp = params.gamma1_prime
    return 0.5 - 0.5 * params.gamma10 * gp / (gp * params.gamma10 + omega_p**2)


def cdt_locus(omega, n, delta=0.0):
    """Drive strength of the n-th excitation minimum, ``sqrt((2 n w)^2 - Delta^2)``."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    reach = (2 * n * omega) ** 2 - delta**2
    if reach < 0:
        return None
    return math.sqrt(reach)


# --------------------------------------------------------------------------
# Resonant optical Bloch equations
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlochComponents:
    """``U = (r11 - r00 + r01 - r10)/2``, ``V = (r10 + r01)/2``,
    ``W = (r11 - r00 - r01 + r10)/2`` sampled at ``times``."""

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @property
    def rho11(self):
        return 0.5 + self.u.real

    @property
    def im_rho10(self):
        return -self.u.imag

    def density_matrix(self, k):
        z = self.u[k] + self.w[k]
        x = self.u[k] - self.w[k]
        r10 = self.v[k] - x / 2
        r01 = self.v[k] + x / 2
        r11 = (1 + z) / 2
        return np.array([[1 - r11, r01], [r10, r11]], dtype=complex)


def bloch_from_rho(rho):
    rho = np.asarray(rho)
    r00, r11, r01, r10 = rho[0, 0], rho[1, 1], rho[0, 1], rho[1, 0]
    return (r11 - r00 + r01 - r10) / 2, (r10 + r01) / 2, (r11 - r00 - r01 + r10) / 2


def integrate_bloch_resonant(params, t_end, reltol=1e-10, rho0=None, samples_per_period=1):
    """Integrate the resonant Bloch equations for U, V, W.

    ``dV/dt = -g' V``,
    ``dU/dt = -g10/2 - (g10 + g')U/2 + i Omega_p(t) U - (g10 - g')W/2``,
    ``dW/dt = -g10/2 - (g10 + g')W/2 - i Omega_p(t) W - (g10 - g')U/2``.

    Samples are taken ``samples_per_period`` times per cycle starting at
    ``t = 0`` (start of a probe-on half).
    """
    if params.delta != 0:
        raise DomainError("the resonant Bloch equations need delta = 0")
    if not (1e-13 < reltol < 1e-3):
        raise ValidationError("reltol must lie in (1e-13, 1e-3)")
    g10 = params.gamma10
    gp = params.gamma1_prime
    period = params.period
    half = period / 2

    def rhs_factory(amp):
        def rhs(t, y):
            u, v, w = y
            return [
                -g10 / 2 - (g10 + gp) * u / 2 + 1j * amp * u - (g10 - gp) * w / 2,
                -gp * v,
                -g10 / 2 - (g10 + gp) * w / 2 - 1j * amp * w - (g10 - gp) * u / 2,
            ]
        return rhs

    rho0 = np.diag([1.0, 0.0]).astype(complex) if rho0 is None else rho0
    y = np.array(bloch_from_rho(rho0), dtype=complex)
    n_cycles = int(np.floor(t_end / period + 1e-9))
    sub = int(samples_per_period)
    if sub < 1 or (sub > 1 and sub % 2):
        raise ValidationError("samples_per_period must be 1 or an even integer")
    times, rows = [0.0], [y.copy()]
    on_rhs, off_rhs = rhs_factory(params.omega_p), rhs_factory(0.0)
    for k in range(n_cycles):
        for j, rhs in enumerate((on_rhs, off_rhs)):
            t0 = k * period + j * half
            t_eval = None
            if sub > 1:
                t_eval = t0 + half * np.arange(1, sub // 2 + 1) / (sub // 2)
            sol = solve_ivp(rhs, (t0, t0 + half), y, method="DOP853", rtol=reltol,
                            atol=reltol * 1e-2, t_eval=t_eval)
            if sol.status != 0:
                raise StiffnessError(f"Bloch integration failed at t={t0}: {sol.message}")
            y = sol.y[:, -1]
            if sub > 1:
                times.extend(sol.t.tolist())
                rows.extend(sol.y.T)
        if sub == 1:
            times.append((k + 1) * period)
            rows.append(y.copy())
    arr = np.array(rows)
    if not np.all(np.isfinite(arr)):
        raise NumericError("non-finite Bloch components")
    return BlochComponents(times=np.array(times), u=arr[:, 0], v=arr[:, 1], w=arr[:, 2])
