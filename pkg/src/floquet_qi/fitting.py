"""Least-squares fits of ``Im rho10`` spectra to the QI and ATS lineshapes.

Model selection uses per-point AIC values
``I = (N ln(R/N) + 2k)/N`` turned into normalised weights
``w_m = exp(-I_m/2) / sum exp(-I/2)``.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np
from scipy.optimize import least_squares, minimize

from .errors import FitError, ValidationError
from .lineshape import AtsParams, QiParams, ats_value, gamma_lambda, qi_value
from .systems import physical_period

log = logging.getLogger(__name__)

QI = "QI"
ATS = "ATS"
MODELS = (QI, ATS)
N_PARAMS = {QI: 4, ATS: 3}
MIN_POINTS = 20
MAX_EVALS = 10_000
N_STARTS = 5
SEED = 20240117


@dataclass(frozen=True)
class FitWindow:
    delta_min: float
    delta_max: float
    spacing: float

    def __post_init__(self):
        if not self.delta_min < 0 < self.delta_max:
            raise ValidationError("fit window must straddle delta = 0")
        if not self.spacing > 0:
            raise ValidationError("fit window spacing must be positive")

    @classmethod
    def default(cls, tau, convention="angular"):
        """``|delta| <= min(8, pi/T)`` at spacing 0.05 for cycle length ``T``."""
        half = min(8.0, math.pi / physical_period(tau, convention))
        return cls(-half, half, 0.05)

    def grid(self):
        lo = int(math.ceil(self.delta_min / self.spacing - 1e-9))
        hi = int(math.floor(self.delta_max / self.spacing + 1e-9))
        return np.arange(lo, hi + 1) * self.spacing

    def check_sidebands(self, period):
        """Warn when the window reaches past half the first-sideband spacing."""
        limit = math.pi / period
        if max(-self.delta_min, self.delta_max) > limit:
            warnings.warn(f"fit window reaches |delta| = {max(-self.delta_min, self.delta_max)} "
                          f"beyond pi/T = {limit:.3g}; side windows may leak in", stacklevel=2)
            return False
        return True


@dataclass(frozen=True, eq=False)
class FitResult:
    model: str
    params: object
    rss: float
    n: int
    k: int
    deltas: np.ndarray = None

    @property
    def aic_per_point(self):
        if self.rss == 0:
            return -math.inf
        return (self.n * math.log(self.rss / self.n) + 2 * self.k) / self.n

    def as_dict(self):
        p = self.params
        params = {"omega_c": p.omega_c, "omega_p": p.omega_p, "gamma_big": p.gamma_big}
        if self.model == QI:
            params["lambda"] = p.lam
        return {"model": self.model, "params": params, "rss": self.rss, "n": self.n,
                "k": self.k, "aic_per_point": self.aic_per_point}


@dataclass(frozen=True)
class AicWeights:
    w_qi: float
    w_ats: float

    def as_dict(self):
        return {"w_qi": self.w_qi, "w_ats": self.w_ats}


def _model_fn(model):
    return qi_value if model == QI else ats_value


def canonical(model, theta):
    """Pick the representative of the sign symmetries of the lineshapes.

    Both lineshapes are even in ``omega_c`` and invariant under flipping the
    signs of ``(omega_p, gamma_big[, lambda])`` together.
    """
    theta = np.array(theta, dtype=float)
    theta[0] = abs(theta[0])
    if theta[2] < 0:
        theta[1:] = -theta[1:]
    return theta


def default_init(model, provenance):
    """Half-duty-cycle guess from the simulated parameters."""
    try:
        omega_c = provenance["omega_c"]
        omega_p = provenance["omega_p"]
        rates = SimpleNamespace(**{k: provenance[k] for k in ("gamma10", "gamma21", "gamma1_phi", "gamma2_phi")})
    except KeyError as exc:
        raise ValidationError(f"spectrum provenance lacks {exc}; pass init explicitly") from None
    g, lam = gamma_lambda(rates)
    if model == QI:
        return (omega_c / 2, omega_p / 2, g, lam)
    return (omega_c / 2, omega_p / 2, g)


def _starts(model, init):
    rng = np.random.default_rng(SEED)
    init = np.asarray(init, dtype=float)
    out = [init]
    for _ in range(N_STARTS):
        trial = init * rng.uniform(0.7, 1.3, size=init.size)
        if model == QI:
            trial[3] = init[3] + rng.uniform(-0.3, 0.3) * abs(init[2])
        out.append(trial)
    return out


def _solve_one(fn, x, y, start):
    def resid(theta):
        return fn(x, *theta) - y

    with np.errstate(all="ignore"):
        try:
            sol = least_squares(resid, start, method="lm", xtol=1e-10, ftol=1e-12,
                                max_nfev=MAX_EVALS)
            if sol.status > 0 and np.all(np.isfinite(sol.fun)):
                return sol.x, float(np.sum(sol.fun**2)), True
        except (ValueError, np.linalg.LinAlgError):
            pass
        # derivative-free fallback for ill-conditioned Jacobians
        nm = minimize(lambda t: float(np.sum(resid(t) ** 2)), start, method="Nelder-Mead",
                      options={"maxiter": MAX_EVALS, "xatol": 1e-10, "fatol": 1e-16})
    rss = float(nm.fun) if np.isfinite(nm.fun) else math.inf
    return nm.x, rss, bool(nm.success)


def fit_arrays(x, y, model, init):
    """Fit sampled data; returns ``(theta, rss)`` of the best start."""
    if model not in MODELS:
        raise ValidationError(f"unknown model {model!r}; expected one of {MODELS}")
    if len(init) != N_PARAMS[model]:
        raise ValidationError(f"{model} needs {N_PARAMS[model]} initial values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("fit data contain non-finite values")
    fn = _model_fn(model)
    best = None
    any_ok = False
    for start in _starts(model, init):
        theta, rss, ok = _solve_one(fn, x, y, start)
        any_ok = any_ok or ok
        if best is None or rss < best[1]:
            best = (theta, rss)
    if not any_ok or not math.isfinite(best[1]):
        raise FitError(f"{model} fit did not converge", best=best)
    return canonical(model, best[0]), best[1]


def fit_model(spectrum, model, window, init=None):
    """Fit ``Im rho10`` inside ``window`` with the QI or ATS lineshape.

    Raises
    ------
    ValidationError
        Fewer than 20 spectrum points fall inside the window.
    FitError
        No start converged; ``best`` holds the best-so-far ``(theta, rss)``.
    """
    sub = spectrum.window(window.delta_min, window.delta_max)
    if len(sub.delta) < MIN_POINTS:
        raise ValidationError(f"only {len(sub.delta)} points in fit window; need {MIN_POINTS}")
    if init is None:
        init = default_init(model, spectrum.provenance)
    theta, rss = fit_arrays(sub.delta, sub.im_rho10, model, init)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        params = QiParams(*theta) if model == QI else AtsParams(*theta)
    return FitResult(model=model, params=params, rss=rss, n=len(sub.delta), k=N_PARAMS[model],
                     deltas=sub.delta)


def weights_from_aic(aic_qi, aic_ats):
    """Normalised AIC weights, shifted by the smaller value to avoid overflow."""
    if math.isinf(aic_qi) or math.isinf(aic_ats):
        if aic_qi == aic_ats:
            return AicWeights(0.5, 0.5)
        return AicWeights(1.0, 0.0) if aic_qi < aic_ats else AicWeights(0.0, 1.0)
    ref = min(aic_qi, aic_ats)
    e_qi = math.exp(-(aic_qi - ref) / 2)
    e_ats = math.exp(-(aic_ats - ref) / 2)
    w_qi = e_qi / (e_qi + e_ats)
    return AicWeights(w_qi, 1.0 - w_qi)


def aic_weights(fit_qi, fit_ats):
    if fit_qi.model != QI or fit_ats.model != ATS:
        raise ValidationError("aic_weights expects a QI fit and an ATS fit")
    if fit_qi.n != fit_ats.n:
        raise ValidationError("fits use different numbers of points")
    a, b = fit_qi.deltas, fit_ats.deltas
    if (a is None) != (b is None) or (a is not None and not np.array_equal(a, b)):
        raise ValidationError("fits use different detuning samples")
    return weights_from_aic(fit_qi.aic_per_point, fit_ats.aic_per_point)
