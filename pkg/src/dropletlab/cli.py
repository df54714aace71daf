"""Command-line front end.

Every command resolves a flat experiment description (defaults, then an
optional JSON ``--config`` file, then explicit flags), validates it, runs, and
writes ``{"spec", "provenance", "results", "errors"}`` as sorted JSON.  Sweeps
also write CSV next to the JSON output.  Exit status is 0 on success, 2 for
invalid input and 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    GeneralizedConfig,
    default_droplet_cap,
    exact_energy_balls,
    expansion_residual_sweep,
    ez_to_e0_sweep,
    predicted_energy,
    split_threshold,
    subadditivity_check,
)
from .errors import DropletLabError, InvalidInputError
from .model import ModelParams, m_tilde, riesz_constants
from .optimizer import OptimizerOptions, minimize_config, minimize_masses, optimal_droplet_count

COMMANDS = ("constants", "energy", "optimize", "partition", "sweep", "expansion", "threshold", "subadd")
TOL_ENV = "DROPLETLAB_TOL"
DEFAULT_ZGRID = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
DEFAULTS = {
    "d": 3,
    "s": 2.0,
    "p": 1.0,
    "Z": 0.0,
    "M": 1.0,
    "masses": None,
    "points": None,
    "N": None,
    "Nmax": None,
    "zgrid": None,
    "mprime": None,
    "starts": 8,
    "seed": 0,
    "tol": 1e-8,
    "out": None,
}


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int)
    common.add_argument("--s", type=float)
    common.add_argument("--p", type=float)
    common.add_argument("--Z", type=float)
    common.add_argument("--M", type=float)
    common.add_argument("--masses", type=_floats, help="comma list m0,m1,...; m0 is the anchor")
    common.add_argument("--points", type=_floats, help="comma list of scaled points, row-major (N*d values)")
    common.add_argument("--N", type=int, help="number of non-anchor droplets")
    common.add_argument("--Nmax", type=int, help="largest droplet count searched")
    common.add_argument("--zgrid", type=_floats, help="comma list of Z values")
    common.add_argument("--mprime", type=float, help="split mass for subadd")
    common.add_argument("--starts", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float, help=f"quadrature tolerance (overrides ${TOL_ENV})")
    common.add_argument("--out", help="JSON output path; sweeps also write <stem>.csv")
    common.add_argument("--config", help="JSON file with any of the flag keys")
    parser = argparse.ArgumentParser(prog="dropletlab", description="Ball-droplet experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_spec(args: argparse.Namespace, environ=None) -> dict:
    """Defaults < environment tolerance < config file < flags."""
    environ = os.environ if environ is None else environ
    spec = dict(DEFAULTS)
    if environ.get(TOL_ENV):
        try:
            spec["tol"] = float(environ[TOL_ENV])
        except ValueError as exc:
            raise InvalidInputError(f"{TOL_ENV} must be a number, got {environ[TOL_ENV]!r}") from exc
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(cfg) - set(DEFAULTS) - {"command"}
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        cfg.pop("command", None)
        spec.update(cfg)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            spec[key] = val
    spec["command"] = args.command
    return spec


def _params(spec) -> ModelParams:
    return ModelParams(spec["d"], float(spec["s"]), float(spec["p"]), float(spec["Z"]), float(spec["M"]),
                       float(spec["tol"]))


def _opts(spec) -> OptimizerOptions:
    return OptimizerOptions(starts=int(spec["starts"]), seed=int(spec["seed"]))


def _masses(spec):
    if spec["masses"] is None:
        raise InvalidInputError("--masses is required for this command")
    return np.asarray(spec["masses"], dtype=float)


def _points(spec, masses, params, opts):
    if spec["points"] is not None:
        pts = np.asarray(spec["points"], dtype=float)
        if pts.size != (masses.size - 1) * params.d:
            raise InvalidInputError(f"--points needs {(masses.size - 1) * params.d} values, got {pts.size}")
        return pts.reshape(masses.size - 1, params.d)
    if masses.size == 1:
        return np.zeros((0, params.d))
    return minimize_config(masses, params, opts).points


def _zgrid(spec):
    return list(spec["zgrid"]) if spec["zgrid"] is not None else list(DEFAULT_ZGRID)


def _csv(rows, header):
    lines = [",".join(header)]
    lines += [",".join(repr(float(r[h])) for h in header) for r in rows]
    return "\n".join(lines) + "\n"


def run_command(spec: dict):
    """Execute one resolved spec; returns ``(results, csv_text_or_None)``."""
    cmd = spec["command"]
    if cmd == "constants":
        c = riesz_constants(int(spec["d"]), float(spec["s"]), float(spec["tol"]))
        return json.loads(c.to_json()), None
    params = _params(spec)
    opts = _opts(spec)
    if cmd == "optimize":
        return minimize_config(_masses(spec), params, opts).to_dict(), None
    if cmd == "energy":
        m = _masses(spec)
        gc = GeneralizedConfig(m, _points(spec, m, params, opts), params.Z)
        br = exact_energy_balls(gc, params)
        out = br.to_dict()
        out.update(predicted=predicted_energy(gc, params), scaled_points=gc.scaled_points.tolist())
        return out, None
    if cmd == "partition":
        conf = params.Z > 0
        if spec["N"] is not None:
            return minimize_masses(params.M, int(spec["N"]), params, opts, with_confinement=conf).to_dict(), None
        nmax = int(spec["Nmax"]) if spec["Nmax"] is not None else default_droplet_cap(params.M, params)
        n, res = optimal_droplet_count(params.M, nmax, params, opts, with_confinement=conf)
        return {"N_star": n, "N_max": nmax, **res.to_dict()}, None
    if cmd == "sweep":
        rows = ez_to_e0_sweep(params.M, params, _zgrid(spec), opts, N_max=spec["Nmax"])
        return {"rows": rows}, _csv(rows, ("Z", "value", "gap", "bound"))
    if cmd == "expansion":
        m = _masses(spec)
        pts = _points(spec, m, params, opts)
        sw = expansion_residual_sweep(m, pts, params, _zgrid(spec))
        out = sw.to_dict()
        out["scaled_points"] = np.asarray(pts).tolist()
        return out, sw.to_csv()
    if cmd == "threshold":
        th = m_tilde(params)
        return {"split_threshold": split_threshold(params), "m_tilde": th.m_tilde, "inflection": th.inflection}, None
    if cmd == "subadd":
        mp = spec["mprime"] if spec["mprime"] is not None else 0.5 * params.M
        return subadditivity_check(params.M, float(mp), params, opts).to_dict(), None
    raise InvalidInputError(f"unknown command {cmd!r}")


def _document(spec, results, errors) -> str:
    doc = {
        "spec": spec,
        "provenance": {"package": "dropletlab", "version": __version__, "seed": spec.get("seed")},
        "results": results,
        "errors": errors,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def main(argv=None, environ=None) -> int:
    args = build_parser().parse_args(argv)
    spec = {"command": args.command}
    results, csv_text, errors, status = None, None, [], 0
    try:
        spec = resolve_spec(args, environ)
        results, csv_text = run_command(spec)
    except InvalidInputError as exc:
        errors, status = [{"type": type(exc).__name__, "message": str(exc)}], 2
    except (DropletLabError, ArithmeticError) as exc:
        errors, status = [{"type": type(exc).__name__, "message": str(exc)}], 3
    text = _document(spec, results, errors)
    out = spec.get("out")
    if out:
        Path(out).write_text(text)
        if csv_text is not None:
            Path(out).with_suffix(".csv").write_text(csv_text)
    else:
        sys.stdout.write(text)
    if errors:
        sys.stderr.write(f"dropletlab: {errors[0]['type']}: {errors[0]['message']}\n")
    return status


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
