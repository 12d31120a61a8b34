"""Run configuration: a flat ``key = value`` schema shared by files and flags.

Config files hold one ``key = value`` pair per line; ``#`` starts a comment.
Unknown keys are rejected. Every key is also a command-line flag
(``gamma1_phi`` becomes ``--gamma1-phi``) and flags take precedence.
"""

from dataclasses import dataclass

from .errors import ValidationError


class ConfigError(ValidationError):
    pass


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Key:
    kind: object
    default: object
    help: str
    choices: tuple = None


SCHEMA = {
    "system": Key(str, "two-level", "model system", ("two-level", "three-level", "lab-frame")),
    "regime": Key(str, None, "three-level preset filling unset rates", ("ats", "eit")),
    "delta": Key(float, 0.0, "probe detuning"),
    "omega_p": Key(float, 1.0, "probe Rabi frequency"),
    "omega_c": Key(float, 10.8, "control Rabi frequency"),
    "tau": Key(float, None, "modulation parameter"),
    "gamma10": Key(float, 1.0, "decay rate 1 -> 0"),
    "gamma21": Key(float, 1.4, "decay rate 2 -> 1"),
    "gamma1_phi": Key(float, 0.4, "dephasing rate of level 1"),
    "gamma2_phi": Key(float, 0.2, "dephasing rate of level 2"),
    "omega_probe": Key(float, 6000.0, "probe carrier frequency (lab frame)"),
    "convention": Key(str, "angular", "cycle length 2*pi*tau (angular) or tau (literal)",
                      ("angular", "literal")),
    "strobe": Key(str, "after_probe", "stroboscopic sampling instant", ("after_probe", "period_end")),
    "observable": Key(str, "strobe", "stroboscopic state or cycle average", ("strobe", "average")),
    "delta_min": Key(float, -300.0, "detuning grid start"),
    "delta_max": Key(float, 300.0, "detuning grid end"),
    "delta_step": Key(float, 2.0, "detuning grid step"),
    "power_min": Key(float, -45.0, "probe power grid start (dBm)"),
    "power_max": Key(float, 0.0, "probe power grid end (dBm)"),
    "power_step": Key(float, 0.5, "probe power grid step (dBm)"),
    "tau_min": Key(float, 0.02, "tau grid start (log spaced)"),
    "tau_max": Key(float, 0.8, "tau grid end"),
    "tau_count": Key(int, 100, "number of tau grid points"),
    "window_min": Key(float, None, "fit window lower edge"),
    "window_max": Key(float, None, "fit window upper edge"),
    "window_step": Key(float, None, "fit window spacing"),
    "op": Key(str, None, "analytic operation",
              ("resonant-steady", "weak-drive", "omega-n", "cdt-locus", "gamma-lambda",
               "qi", "ats", "peak-positions")),
    "gamma_big": Key(float, None, "dressed decay rate for lineshape ops"),
    "lam": Key(float, 0.0, "dressed cross-coupling for the qi op"),
    "symmetric": Key(_bool, True, "weak-drive formula with sidebands on both sides"),
    "q_max": Key(int, 4, "harmonic factors in the nested Bessel series"),
    "n_max": Key(int, 40, "order range for omega-n and peak-positions"),
    "n_periods": Key(int, None, "cycles to propagate (rwa)"),
    "t_end": Key(float, 6.0, "propagation time when n_periods is unset (rwa)"),
    "workers": Key(int, 1, "worker processes for scans"),
    "output": Key(str, "-", "output path, '-' for stdout"),
    "format": Key(str, None, "csv or json (default per command)", ("csv", "json")),
}


def coerce(key, value):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    spec = SCHEMA[key]
    if value is None:
        return None
    try:
        out = spec.kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from None
    if spec.choices and out not in spec.choices:
        raise ConfigError(f"{key!r} must be one of {spec.choices}, got {out!r}")
    return out


def parse_config_text(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = coerce(key, value)
    return out


def load_config_file(path):
    with open(path) as fh:
        return parse_config_text(fh.read())


class RunConfig(dict):
    """Resolved configuration: schema defaults, then file values, then flags."""

    @classmethod
    def build(cls, file_values=None, flag_values=None):
        cfg = cls({k: s.default for k, s in SCHEMA.items()})
        explicit = {**(file_values or {}), **{k: v for k, v in (flag_values or {}).items()
                                              if v is not None}}
        if explicit.get("regime"):
            cfg.update(regime_values(coerce("regime", explicit["regime"])))
        for source in (file_values or {}, flag_values or {}):
            for k, v in source.items():
                if v is not None:
                    cfg[k] = coerce(k, v)
        return cfg

    def require(self, *keys):
        for k in keys:
            if self.get(k) is None:
                raise ConfigError(f"missing required key {k!r}")

    def provenance_lines(self):
        return [f"{k} = {format_value(v)}" for k, v in sorted(self.items()) if v is not None]

    def provenance_dict(self):
        return {k: v for k, v in sorted(self.items()) if v is not None}


def regime_values(name):
    from .presets import regime

    params, window, _ = regime(name)
    out = {k: getattr(params, k) for k in ("omega_p", "omega_c", "gamma10", "gamma21",
                                           "gamma1_phi", "gamma2_phi")}
    out.update(system="three-level", window_min=window.delta_min, window_max=window.delta_max,
               window_step=window.spacing)
    return out


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)
