"""Command-line front end.

Examples
--------
    cpgraphene f0 --gap-ev 0.2 --mu-ev 0.15 --sep-um 5 --temp-k 300
    cpgraphene ideal --sep-um 5 --temp-k 300 --alpha0-um3 1e-12
    cpgraphene scan-a0 --temp-k 300 --format json --out a0.json
    cpgraphene force --config a0.json --sep-um 4

Exit status: 0 success, 2 invalid input, 3 numerical nonconvergence.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (ScanSpec, default_gap_grid, find_a0, scan_a0_vs_gap,
                       scan_delta_f0, scan_exact_vs_asymptotic)
from .asymptotics import classify_regime, force_asymptotic, pi00_asymptotic
from .io import crossings_to_csv, records_to_csv, table_payload, table_to_csv, to_json
from .lifshitz import (IDEAL_METAL_REDUCED, PolarizabilityModel, force_ideal_metal,
                       force_total, force_zero_term)
from .polarization import GrapheneSheet, QuadratureConfig
from .quadrature import QuadratureError
from .units import Geometry

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3

DEFAULTS = {
    "gap_ev": 0.0,
    "mu_ev": 0.0,
    "vf_ratio": 1.0 / 300.0,
    "sep_um": None,
    "temp_k": 300.0,
    "alpha0_um3": None,
    "rel_tol": 1e-9,
    "abs_tol": 0.0,
    "max_panels": 2000,
    "matsubara_rel_tail": 1e-10,
    "matsubara_max_l": 5000,
    "threshold": None,
    "bracket_um": [1.0, 10.0],
    "tol_um": 0.01,
    "gaps_ev": None,
    "mus_ev": [0.0, 0.025, 0.075, 0.15],
    "a_min_um": 3.0,
    "a_max_um": 100.0,
    "n_points": 40,
    "thresholds": [0.01, 0.02],
    "workers": None,
    "format": "csv",
    "out": None,
    "crossings_out": None,
}

# keys that describe the computation (echoed in JSON output, accepted from --config)
CONFIG_KEYS = [k for k in DEFAULTS if k not in ("format", "out", "crossings_out")]

POINT_COMMANDS = ("force", "f0", "ideal", "asym", "delta-f0", "ratio")
SCAN_COMMANDS = ("scan-a0", "scan-delta-f0", "scan-ratio")
COMMANDS = POINT_COMMANDS + ("a0",) + SCAN_COMMANDS


class ValidationError(ValueError):
    pass


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_common(p):
    g = p.add_argument_group("sheet and geometry")
    g.add_argument("--gap-ev", dest="gap_ev", type=float, help="energy gap Delta (eV)")
    g.add_argument("--mu-ev", dest="mu_ev", type=float, help="chemical potential mu (eV)")
    g.add_argument("--vf-ratio", dest="vf_ratio", type=float, help="Fermi velocity over c")
    g.add_argument("--sep-um", dest="sep_um", type=float, help="separation a (um)")
    g.add_argument("--temp-k", dest="temp_k", type=float, help="temperature T (K)")
    g.add_argument("--alpha0-um3", dest="alpha0_um3", type=float,
                   help="static polarizability (um^3); enables absolute forces")
    qg = p.add_argument_group("quadrature")
    qg.add_argument("--rel-tol", dest="rel_tol", type=float)
    qg.add_argument("--abs-tol", dest="abs_tol", type=float)
    qg.add_argument("--max-panels", dest="max_panels", type=int)
    qg.add_argument("--matsubara-rel-tail", dest="matsubara_rel_tail", type=float)
    qg.add_argument("--matsubara-max-l", dest="matsubara_max_l", type=int)
    og = p.add_argument_group("output")
    og.add_argument("--format", choices=("csv", "json"))
    og.add_argument("--out", help="output file (default stdout)")
    og.add_argument("--config", help="JSON or key=value file; explicit flags win")


def _add_search(p, scan):
    p.add_argument("--threshold", type=float)
    p.add_argument("--tol-um", dest="tol_um", type=float, help="bisection tolerance (um)")
    if scan:
        p.add_argument("--gaps-ev", dest="gaps_ev", type=_floats,
                       help="comma-separated gap grid (eV)")
        p.add_argument("--mus-ev", dest="mus_ev", type=_floats,
                       help="comma-separated chemical potentials (eV)")
        p.add_argument("--workers", type=int, help="process count for grid points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpgraphene",
        description="Casimir-Polder force on a particle above gapped, doped graphene.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "force": "full Matsubara sum",
        "f0": "zero-frequency term only",
        "ideal": "ideal-metal classical limit",
        "asym": "large-separation closed form of the zero-frequency term",
        "delta-f0": "relative deviation of F0 from the ideal-metal value",
        "ratio": "F0 over its closed-form asymptote",
        "a0": "smallest separation where F0/F reaches the threshold",
        "scan-a0": "a0 over a gap grid, one curve per chemical potential",
        "scan-delta-f0": "delta-F0 over a log separation grid",
        "scan-ratio": "F0/F0_as over a log separation grid",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name], argument_default=argparse.SUPPRESS)
        _add_common(p)
        if name == "a0":
            _add_search(p, scan=False)
            p.add_argument("--bracket-um", dest="bracket_um", type=_floats,
                           help="a_lo,a_hi in um")
        if name in SCAN_COMMANDS:
            _add_search(p, scan=True)
        if name in ("scan-delta-f0", "scan-ratio"):
            p.add_argument("--a-min-um", dest="a_min_um", type=float)
            p.add_argument("--a-max-um", dest="a_max_um", type=float)
            p.add_argument("--n-points", dest="n_points", type=int)
            p.add_argument("--crossings-out", dest="crossings_out",
                           help="CSV file for per-curve crossing separations")
        if name == "scan-ratio":
            p.add_argument("--thresholds", type=_floats, help="comma-separated, e.g. 0.01,0.02")
    return parser


def _coerce(key, value):
    default = DEFAULTS[key]
    if value is None:
        return None
    if isinstance(default, list) or key == "gaps_ev":
        return value if isinstance(value, list) else _floats(value)
    if key in ("max_panels", "matsubara_max_l", "n_points", "workers"):
        return int(value)
    if key in ("format", "out", "crossings_out"):
        return str(value)
    return float(value)


def load_config(path) -> dict:
    """Read a config file: a JSON object (optionally our own output) or key=value lines."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            data[key] = value
    else:
        if not isinstance(data, dict):
            raise ValidationError("JSON config must be an object")
        data = data.get("config", data)
    out = {}
    for key, value in data.items():
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ValidationError(f"unknown config key {key!r}")
        try:
            out[key] = _coerce(key, value)
        except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
            raise ValidationError(f"bad value for {key}: {exc}")
    return out


def resolve(ns: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicit flags."""
    opts = dict(DEFAULTS)
    flags = vars(ns).copy()
    command = flags.pop("command")
    config = flags.pop("config", None)
    if config:
        try:
            opts.update(load_config(config))
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}")
    opts.update(flags)
    opts["command"] = command
    _validate(opts)
    return opts


def _validate(o):
    cmd = o["command"]
    if cmd in POINT_COMMANDS and o["sep_um"] is None:
        raise ValidationError(f"{cmd} requires --sep-um")
    if cmd == "ideal" and o["alpha0_um3"] is None:
        raise ValidationError("ideal requires --alpha0-um3")
    if o["sep_um"] is not None and not o["sep_um"] > 0:
        raise ValidationError("--sep-um must be positive")
    if not o["temp_k"] > 0:
        raise ValidationError("--temp-k must be positive")
    if o["threshold"] is not None and not 0 < o["threshold"] < 1:
        raise ValidationError("--threshold must lie in (0, 1)")
    if len(o["bracket_um"]) != 2:
        raise ValidationError("--bracket-um takes two values")
    if any(not 0 < t < 1 for t in o["thresholds"]):
        raise ValidationError("--thresholds must lie in (0, 1)")
    if o["workers"] is not None and o["workers"] < 1:
        raise ValidationError("--workers must be at least 1")
    for key in ("gap_ev", "mu_ev", "vf_ratio", "sep_um", "temp_k", "alpha0_um3",
                "rel_tol", "abs_tol", "tol_um", "a_min_um", "a_max_um"):
        v = o[key]
        if v is not None and not math.isfinite(v):
            raise ValidationError(f"{key} must be finite")
    # constructing the library objects runs their own checks
    _sheet(o)
    _quad(o)
    _pol(o)
    if cmd in SCAN_COMMANDS:
        _spec(o)


def _sheet(o, gap=None, mu=None):
    return GrapheneSheet(o["gap_ev"] if gap is None else gap,
                         o["mu_ev"] if mu is None else mu, o["vf_ratio"])


def _quad(o):
    return QuadratureConfig(rel_tol=o["rel_tol"], abs_tol=o["abs_tol"],
                            max_panels=o["max_panels"],
                            matsubara_rel_tail=o["matsubara_rel_tail"],
                            matsubara_max_l=o["matsubara_max_l"])


def _pol(o):
    return PolarizabilityModel(alpha0=o["alpha0_um3"])


def _spec(o):
    default_threshold = 0.99 if o["command"] == "scan-a0" else 0.01
    threshold = o["threshold"] if o["threshold"] is not None else default_threshold
    gaps = o["gaps_ev"] if o["gaps_ev"] is not None else (
        default_gap_grid() if o["command"] == "scan-a0" else [0.2])
    return ScanSpec(gaps=tuple(gaps), mus=tuple(o["mus_ev"]), a_min=o["a_min_um"],
                    a_max=o["a_max_um"], n_points=o["n_points"], temperature=o["temp_k"],
                    threshold=threshold, tol_um=o["tol_um"], fermi_ratio=o["vf_ratio"])


def _base_record(o):
    return {"gap_eV": o["gap_ev"], "mu_eV": o["mu_ev"], "vf_ratio": o["vf_ratio"],
            "sep_um": o["sep_um"], "temp_K": o["temp_k"]}


def _with_force(rec, result, o, prefix=""):
    rec[f"{prefix}reduced_force"] = result.reduced_force
    if o["alpha0_um3"] is not None:
        rec["alpha0_um3"] = o["alpha0_um3"]
        rec[f"{prefix}force_N"] = result.absolute_force
    return rec


def _run_point(o):
    cmd = o["command"]
    g = Geometry(o["sep_um"], o["temp_k"])
    sheet, q, pol = _sheet(o), _quad(o), _pol(o)
    rec = _base_record(o)
    if cmd == "ideal":
        rec.pop("gap_eV"), rec.pop("mu_eV"), rec.pop("vf_ratio")
        rec["reduced_force"] = IDEAL_METAL_REDUCED
        rec["alpha0_um3"] = o["alpha0_um3"]
        rec["force_N"] = force_ideal_metal(g, pol)
        return rec
    if cmd == "force":
        res = force_total(sheet, g, pol, q)
        _with_force(rec, res, o)
        rec["zero_term_fraction"] = res.zero_term_fraction
        rec["terms_used"] = res.terms_used
        rec["est_rel_error"] = res.est_rel_error
        return rec
    if cmd in ("f0", "delta-f0"):
        res = force_zero_term(sheet, g, pol, q)
        if cmd == "f0":
            _with_force(rec, res, o)
        else:
            rec["delta_f0"] = res.reduced_force / IDEAL_METAL_REDUCED - 1.0
        rec["est_rel_error"] = res.est_rel_error
        return rec
    regime = classify_regime(sheet, g)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        pi1 = pi00_asymptotic(sheet, g)
        asym = force_asymptotic(sheet, g, pol)
    for message in dict.fromkeys(str(w.message) for w in caught):
        print(f"warning: {message}", file=sys.stderr)
    if cmd == "asym":
        rec["regime"] = regime.tag
        rec["marginal"] = regime.marginal
        rec["d0"] = regime.d0
        rec["thermal_param"] = regime.thermal_param
        rec["pi00_asymptotic"] = pi1
        return _with_force(rec, asym, o)
    exact = force_zero_term(sheet, g, pol, q)
    rec["regime"] = regime.tag
    rec["f0_over_f0_asymptotic"] = exact.reduced_force / asym.reduced_force
    rec["est_rel_error"] = exact.est_rel_error
    return rec


def _run_a0(o):
    threshold = 0.99 if o["threshold"] is None else o["threshold"]
    res = find_a0(_sheet(o), o["temp_k"], threshold, tuple(o["bracket_um"]),
                  o["tol_um"], _quad(o))
    return {"gap_eV": o["gap_ev"], "mu_eV": o["mu_ev"], "vf_ratio": o["vf_ratio"],
            "temp_K": o["temp_k"], "threshold": threshold, "a0_um": res.a0,
            "zero_term_fraction": res.ratio, "evaluations": res.evaluations}


def _run_scan(o):
    spec, q = _spec(o), _quad(o)
    cmd = o["command"]
    if cmd == "scan-a0":
        return scan_a0_vs_gap(spec, q, spec.threshold, tuple(o["bracket_um"]), o["workers"])
    if cmd == "scan-delta-f0":
        return scan_delta_f0(spec, q, o["workers"])
    return scan_exact_vs_asymptotic(spec, q, o["workers"], tuple(o["thresholds"]))


def _echo_config(o):
    cfg = {k: o[k] for k in CONFIG_KEYS}
    if o["command"] == "scan-a0" and cfg["gaps_ev"] is None:
        cfg["gaps_ev"] = default_gap_grid()
    return cfg


def execute(o) -> tuple[str, str | None]:
    """Run a resolved config; returns (main output, optional crossings CSV)."""
    cmd = o["command"]
    crossings = None
    if cmd in SCAN_COMMANDS:
        table = _run_scan(o)
        if o["format"] == "json":
            body = to_json({"command": cmd, "result": table_payload(table)},
                           config=_echo_config(o))
        else:
            body = table_to_csv(table)
        if cmd != "scan-a0":
            crossings = crossings_to_csv(table)
        return body, crossings
    rec = _run_a0(o) if cmd == "a0" else _run_point(o)
    if o["format"] == "json":
        return to_json({"command": cmd, "result": rec}, config=_echo_config(o)), None
    return records_to_csv([rec]), None


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="")


def _summary(x):
    values = np.ravel(np.asarray(x, dtype=float))
    if values.size == 1:
        return f"{values[0]:.12g}"
    worst = int(np.argmax(np.abs(values)))
    return f"{values[worst]:.12g} (largest of {values.size} values)"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        opts = resolve(ns)
        body, crossings = execute(opts)
    except QuadratureError as exc:
        print(f"error: numerical nonconvergence: {exc}; best estimate "
              f"{_summary(exc.estimate)}, error bound {_summary(exc.error)}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _write(opts["out"], body)
    if crossings is not None and opts["crossings_out"]:
        _write(opts["crossings_out"], crossings)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
