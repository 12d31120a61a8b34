"""Command-line front end (``floquet-qi``)."""

import argparse
import json
import logging
import math
import os
import sys
import warnings

import numpy as np

from . import acceptance, analytic, lineshape, scans
from .config import SCHEMA, ConfigError, RunConfig, load_config_file, parse_config_text
from .errors import FitError, FloquetError, ValidationError
from .fitting import ATS, QI, FitWindow, aic_weights, fit_model
from .systems import LabFrameParams, ThreeLevelParams, TwoLevelParams

log = logging.getLogger("floquet_qi")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_CLOBBER = 3
EXIT_FIT = 4
EXIT_NUMERIC = 5

COMMAND_KEYS = {
    "scan": ("system", "tau", "tau_min", "tau_max", "tau_count", "delta_min", "delta_max",
             "delta_step", "power_min", "power_max", "power_step", "omega_p", "omega_c",
             "regime", "gamma10", "gamma21", "gamma1_phi", "gamma2_phi", "convention", "strobe",
             "observable", "workers", "output", "format"),
    "spectrum": ("system", "regime", "tau", "omega_p", "omega_c", "gamma10", "gamma21",
                 "gamma1_phi", "gamma2_phi", "delta_min", "delta_max", "delta_step",
                 "convention", "strobe", "observable", "workers", "output", "format"),
    "fit": ("regime", "tau", "omega_p", "omega_c", "gamma10", "gamma21", "gamma1_phi",
            "gamma2_phi", "window_min", "window_max", "window_step", "convention", "strobe",
            "observable", "output", "format"),
    "rwa": ("tau", "delta", "omega_p", "omega_probe", "gamma10", "gamma1_phi", "convention",
            "n_periods", "t_end", "output", "format"),
    "analytic": ("op", "regime", "tau", "delta", "omega_p", "omega_c", "gamma10", "gamma21", "gamma1_phi",
                 "gamma2_phi", "gamma_big", "lam", "delta_min", "delta_max", "delta_step",
                 "symmetric", "q_max", "n_max", "convention", "output", "format"),
}


class ClobberError(Exception):
    pass


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _num(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _fmt_cell(v):
    if isinstance(v, (float, np.floating)):
        return "nan" if not math.isfinite(v) else format(float(v), ".17g")
    return str(v)


def _round_trip(o):
    if isinstance(o, dict):
        return {k: _round_trip(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_round_trip(v) for v in o]
    # json writes the shortest repr that round-trips, at most 17 significant digits
    return _num(o)


def _open_output(cfg, force):
    path = cfg["output"]
    if path == "-":
        return sys.stdout, False
    if os.path.exists(path) and not force:
        raise ClobberError(f"{path} exists; pass --force to overwrite")
    return open(path, "w", newline=""), True


def write_csv(cfg, header, rows, force):
    fh, close = _open_output(cfg, force)
    try:
        for line in cfg.provenance_lines():
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(v) for v in row) + "\n")
    finally:
        if close:
            fh.close()


def write_json(cfg, payload, force):
    payload = {"provenance": cfg.provenance_dict(), **payload}
    fh, close = _open_output(cfg, force)
    try:
        json.dump(_round_trip(payload), fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def read_provenance(path):
    """Rebuild the RunConfig recorded in a CSV or JSON output file."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return RunConfig.build(json.loads(text)["provenance"])
    lines = [ln[1:].strip() for ln in text.splitlines() if ln.startswith("#")]
    return RunConfig.build(parse_config_text("\n".join(lines)))


# --------------------------------------------------------------------------
# parameter assembly
# --------------------------------------------------------------------------

def _two_level(cfg, **over):
    vals = dict(delta=cfg["delta"], omega_p=cfg["omega_p"], tau=cfg["tau"], gamma10=cfg["gamma10"],
                gamma1_phi=cfg["gamma1_phi"], convention=cfg["convention"])
    vals.update(over)
    return TwoLevelParams(**vals)


def _three_level(cfg, **over):
    vals = dict(delta=cfg["delta"], omega_p=cfg["omega_p"], omega_c=cfg["omega_c"], tau=cfg["tau"],
                gamma10=cfg["gamma10"], gamma21=cfg["gamma21"], gamma1_phi=cfg["gamma1_phi"],
                gamma2_phi=cfg["gamma2_phi"], convention=cfg["convention"])
    vals.update(over)
    return ThreeLevelParams(**vals)


def _delta_grid(cfg):
    lo, hi, step = cfg["delta_min"], cfg["delta_max"], cfg["delta_step"]
    if not (step > 0 and hi > lo):
        raise ConfigError("need delta_max > delta_min and delta_step > 0")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def _sidecar(cfg, values):
    bad = int(np.count_nonzero(~np.isfinite(values)))
    if bad and cfg["output"] != "-":
        path = cfg["output"] + ".log"
        with open(path, "w") as fh:
            fh.write(f"{bad} grid points failed and are written as nan\n")
        log.warning("%d invalid grid points; see %s", bad, path)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_scan(cfg, force=False):
    cfg.require("system")
    strobe, mode, workers = cfg["strobe"], cfg["observable"], cfg["workers"]
    deltas = _delta_grid(cfg)
    if cfg["system"] == "two-level":
        cfg.require("tau")
        lo, hi, step = cfg["power_min"], cfg["power_max"], cfg["power_step"]
        powers = lo + step * np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1)
        grid = scans.scan_two_level(deltas, powers, cfg["tau"], cfg["gamma10"], cfg["gamma1_phi"],
                                    cfg["convention"], strobe, mode, workers)
    elif cfg["system"] == "three-level":
        taus = np.geomspace(cfg["tau_min"], cfg["tau_max"], cfg["tau_count"])
        template = _three_level(cfg, tau=taus[0])
        grid = scans.scan_three_level_tau(deltas, taus, template, strobe, mode, workers)
    else:
        raise ConfigError("scan supports system two-level or three-level")
    rows = [(a, b, grid.values[i, j]) for i, a in enumerate(grid.axis1_values)
            for j, b in enumerate(grid.axis2_values)]
    if cfg["format"] == "json":
        write_json(cfg, {grid.axis1_name: grid.axis1_values.tolist(),
                         grid.axis2_name: grid.axis2_values.tolist(),
                         grid.observable: grid.values.tolist()}, force)
    else:
        write_csv(cfg, (grid.axis1_name, grid.axis2_name, grid.observable), rows, force)
    _sidecar(cfg, grid.values)
    return EXIT_OK


def cmd_spectrum(cfg, force=False):
    cfg.require("system", "tau")
    if cfg["system"] == "three-level":
        params = _three_level(cfg)
    elif cfg["system"] == "two-level":
        params = _two_level(cfg)
    else:
        raise ConfigError("spectrum supports system two-level or three-level")
    spec = scans.spectrum(params, _delta_grid(cfg), cfg["strobe"], cfg["observable"], cfg["workers"])
    if cfg["format"] == "json":
        write_json(cfg, {"delta": spec.delta.tolist(), "rho11": spec.rho11.tolist(),
                         "im_rho10": spec.im_rho10.tolist()}, force)
    else:
        write_csv(cfg, ("delta", "rho11", "im_rho10"),
                  zip(spec.delta, spec.rho11, spec.im_rho10), force)
    _sidecar(cfg, spec.rho11)
    return EXIT_OK


def _fit_window(cfg):
    if None in (cfg["window_min"], cfg["window_max"], cfg["window_step"]):
        default = FitWindow.default(cfg["tau"], cfg["convention"])
        return FitWindow(cfg["window_min"] if cfg["window_min"] is not None else default.delta_min,
                         cfg["window_max"] if cfg["window_max"] is not None else default.delta_max,
                         cfg["window_step"] or default.spacing)
    return FitWindow(cfg["window_min"], cfg["window_max"], cfg["window_step"])


def cmd_fit(cfg, force=False):
    cfg.require("tau")
    window = _fit_window(cfg)
    params = _three_level(cfg)
    spec = scans.spectrum(params, window.grid(), cfg["strobe"], cfg["observable"])
    out = {}
    status = EXIT_OK
    fits = {}
    for model in (QI, ATS):
        try:
            fits[model] = fit_model(spec, model, window)
            out[model.lower()] = fits[model].as_dict()
        except FitError as exc:
            status = EXIT_FIT
            theta, rss = exc.best if exc.best else (None, None)
            out[model.lower()] = {"model": model, "error": str(exc),
                                  "best": None if theta is None else list(theta), "rss": rss}
    if status == EXIT_OK:
        out["weights"] = aic_weights(fits[QI], fits[ATS]).as_dict()
    write_json(cfg, out, force)
    return status


def cmd_rwa(cfg, force=False):
    cfg.require("tau")
    lab = LabFrameParams(omega_probe=cfg["omega_probe"], delta=cfg["delta"], omega_p=cfg["omega_p"],
                         tau=cfg["tau"], gamma10=cfg["gamma10"], gamma1_phi=cfg["gamma1_phi"],
                         convention=cfg["convention"])
    n = cfg["n_periods"] or max(1, int(cfg["t_end"] / lab.period))
    cmp = scans.rwa_comparison(lab, n)
    print(f"max |rho11_exact - rho11_rwa| = {cmp.max_deviation:.3e}", file=sys.stderr)
    if cfg["format"] == "json":
        write_json(cfg, {"time": cmp.times.tolist(), "rho11_exact": cmp.rho11_exact.tolist(),
                         "rho11_rwa": cmp.rho11_rwa.tolist(),
                         "max_deviation": cmp.max_deviation}, force)
    else:
        write_csv(cfg, ("time", "rho11_exact", "rho11_rwa"),
                  zip(cmp.times, cmp.rho11_exact, cmp.rho11_rwa), force)
    return EXIT_OK


def cmd_analytic(cfg, force=False):
    cfg.require("op")
    op = cfg["op"]
    table = None
    scalar = None
    if op == "resonant-steady":
        cfg.require("tau")
        p = _two_level(cfg, delta=0.0)
        rho11, im = analytic.resonant_steady(cfg["omega_p"], p, analytic.BesselSumConfig(q_max=cfg["q_max"]))
        scalar = {"rho11": rho11, "im_rho10": im}
    elif op == "weak-drive":
        cfg.require("tau")
        d = _delta_grid(cfg)
        vals = analytic.weak_drive_rho11(d, _two_level(cfg), symmetric=cfg["symmetric"])
        table = (("delta", "rho11"), list(zip(d, np.atleast_1d(vals))))
    elif op == "omega-n":
        cfg.require("tau")
        orders = np.arange(-cfg["n_max"], cfg["n_max"] + 1)
        cfg_b = analytic.BesselSumConfig(q_max=cfg["q_max"])
        vals = analytic.bessel_omega_n(orders, cfg["omega_p"], 1.0 / cfg["tau"], cfg_b)
        table = (("n", "omega_n"), list(zip(orders.tolist(), vals)))
    elif op == "cdt-locus":
        cfg.require("tau")
        rows = [(n, analytic.cdt_locus(1.0 / cfg["tau"], n, cfg["delta"]))
                for n in range(1, cfg["n_max"] + 1)]
        table = (("n", "omega_p"), [(n, math.nan if v is None else v) for n, v in rows])
    elif op == "gamma-lambda":
        g, lam = lineshape.gamma_lambda(_three_level(cfg, tau=cfg["tau"] or 1.0))
        scalar = {"gamma_big": g, "lambda": lam}
    elif op in ("qi", "ats"):
        cfg.require("gamma_big")
        d = _delta_grid(cfg)
        if op == "qi":
            vals = lineshape.qi_value(d, cfg["omega_c"], cfg["omega_p"], cfg["gamma_big"], cfg["lam"])
        else:
            vals = lineshape.ats_value(d, cfg["omega_c"], cfg["omega_p"], cfg["gamma_big"])
        table = (("delta", "im_rho10"), list(zip(d, vals)))
    elif op == "peak-positions":
        cfg.require("tau")
        vals = lineshape.peak_positions(cfg["tau"], cfg["omega_c"], range(-cfg["n_max"], cfg["n_max"] + 1),
                                        cfg["convention"])
        table = (("delta",), [(v,) for v in vals])
    if scalar is not None:
        if cfg["format"] == "csv":
            write_csv(cfg, tuple(scalar), [tuple(scalar.values())], force)
        else:
            write_json(cfg, scalar, force)
    else:
        header, rows = table
        if cfg["format"] == "json":
            write_json(cfg, {h: [r[i] for r in rows] for i, h in enumerate(header)}, force)
        else:
            write_csv(cfg, header, rows, force)
    return EXIT_OK


def cmd_repro(args):
    select = None
    if args.only:
        try:
            select = {int(s) for s in args.only.split(",")}
        except ValueError:
            raise ConfigError("--only takes a comma-separated list of criterion numbers")
    results = acceptance.run_all(select, stream=sys.stdout)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_FAILED


COMMANDS = {"scan": cmd_scan, "spectrum": cmd_spectrum, "fit": cmd_fit, "rwa": cmd_rwa,
            "analytic": cmd_analytic}

HELP = {
    "scan": "2D grid of steady-state rho11 (detuning x power, or detuning x tau)",
    "spectrum": "steady-state rho11 and Im rho10 against detuning",
    "fit": "fit a simulated Im rho10 window with both lineshapes and report AIC weights",
    "rwa": "lab-frame vs rotating-wave stroboscopic rho11 from the ground state",
    "analytic": "evaluate a closed-form result",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="floquet-qi", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, keys in COMMAND_KEYS.items():
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--force", action="store_true", help="overwrite an existing output file")
        for key in keys:
            spec = SCHEMA[key]
            kw = {"dest": key, "default": None, "help": spec.help}
            if spec.choices:
                kw["choices"] = spec.choices
            p.add_argument("--" + key.replace("_", "-"), **kw)
    rep = sub.add_parser("repro", help="run the acceptance criteria and report pass/fail",
                         description="run the acceptance criteria and report pass/fail")
    rep.add_argument("--only", help="comma-separated criterion numbers, e.g. 4,5")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "repro":
            return cmd_repro(args)
        file_values = load_config_file(args.config) if args.config else {}
        flags = {k: getattr(args, k) for k in COMMAND_KEYS[args.command]}
        cfg = RunConfig.build(file_values, flags)
        if cfg["format"] is None:
            cfg["format"] = "json" if args.command == "fit" else "csv"
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore")
            return COMMANDS[args.command](cfg, force=args.force)
    except ClobberError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CLOBBER
    except (ConfigError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloquetError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
