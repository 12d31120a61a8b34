"""Named parameter sets and fit windows for the two three-level regimes."""

from .fitting import FitWindow
from .systems import ThreeLevelParams, TwoLevelParams

TWO_LEVEL = TwoLevelParams(delta=0.0, omega_p=1.0, tau=0.05, gamma10=1.0, gamma1_phi=0.4)

# gamma_big = 0.9, lambda = 0: no cross coupling, two-Lorentzian window
ATS_REGIME = ThreeLevelParams(omega_p=1.0, omega_c=10.8, gamma10=1.0, gamma21=1.4,
                              gamma1_phi=0.4, gamma2_phi=0.2)

# gamma_big = 1.775, lambda = 1.725: strong destructive interference
EIT_REGIME = ThreeLevelParams(omega_p=1.0, omega_c=3.55, gamma10=1.0, gamma21=0.1,
                              gamma1_phi=3.0, gamma2_phi=0.0)

ATS_TAUS = (0.001, 0.05, 0.1, 0.15)
EIT_TAUS = (0.001, 0.05, 0.1, 0.2)

# fit windows under which the reference QI fit values are recovered
ATS_WINDOW = FitWindow(-4.0, 4.0, 0.1)
EIT_WINDOW = FitWindow(-3.5, 3.5, 0.1)

REGIMES = {
    "ats": (ATS_REGIME, ATS_WINDOW, ATS_TAUS),
    "eit": (EIT_REGIME, EIT_WINDOW, EIT_TAUS),
}


def regime(name):
    try:
        return REGIMES[name.lower()]
    except KeyError:
        raise KeyError(f"unknown regime {name!r}; expected one of {sorted(REGIMES)}") from None
