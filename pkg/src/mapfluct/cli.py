"""Command-line front end.

Exit codes: 0 success, 1 domain error (JSON record on stderr), 2 usage error.
"""

import argparse
import csv
import io as _io
import json
import sys

import numpy as np

from . import __version__, extrema, fluctuation as fl, mmbm, taboo
from .errors import MapError, ValidationError, ZOutsideDomain
from .io import dumps, fmt_float, load_model
from .model import LatticeModel, drift_and_pi
from .sim import SimConfig, sim_lattice, sim_mmbm
from .solvers import SolveOptions, solve
from .verify import verify


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p):
    p.add_argument("model", help="model JSON file")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=1_000_000)
    p.add_argument("--horizon", type=int, default=None, metavar="K")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default=None, metavar="PATH")


def build_parser():
    parser = _Parser(prog="mapfluct", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    _common(sub.add_parser("validate", help="check a model file and report its regime"))
    _common(sub.add_parser("fundamentals", help="G, R, H and residuals"))

    p = sub.add_parser("exit", help="two-sided exit law D_{a,b}")
    _common(p)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)

    p = sub.add_parser("scale", help="scale matrices W(1..K), or W(x) for MMBM")
    _common(p)
    p.add_argument("--x", type=float, action="append")

    p = sub.add_parser("occupation", help="expected time at level k before leaving (-l, m)")
    _common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--route", choices=("auto", "transient", "scale"), default="auto")

    p = sub.add_parser("creep", help="creeping probability at level m")
    _common(p)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--l", type=int, default=None,
                   help="also report P[hit m before reaching m+l or above]")

    p = sub.add_parser("extrema", help="joint law of the extreme and the state at killing")
    _common(p)
    p.add_argument("--direction", choices=("max", "min"), default="max")

    p = sub.add_parser("decay", help="decay of P[J at first hit of k]")
    _common(p)

    p = sub.add_parser("transform-check", help="generating-function identities")
    _common(p)
    p.add_argument("--z", type=float, default=None)
    p.add_argument("--form", choices=("bilateral", "unilateral", "scale"), default="bilateral")

    p = sub.add_parser("simulate", help="Monte Carlo estimate")
    _common(p)
    p.add_argument("--target", required=True)
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--level-cap", type=int, default=10_000)
    p.add_argument("--shards", type=int, default=1)

    _common(sub.add_parser("verify", help="run every applicable cross-identity"))
    return parser


# ------------------------------------------------------------------ commands

def _lattice_only(model, what):
    if not isinstance(model, LatticeModel):
        raise ValidationError(f"{what} is only available for lattice models")


def _int_arg(value, name):
    if float(value) != int(value):
        raise UsageError(f"--{name} must be an integer for lattice models")
    return int(value)


def _fund(model, args):
    return solve(model, SolveOptions(tol=args.tol, max_iter=args.max_iter))


def cmd_validate(model, args):
    reg = drift_and_pi(model)
    return {"valid": True, "phases": model.n_phases, "regime": reg.tag, "mu": reg.mu,
            "pi": reg.pi}


def cmd_fundamentals(model, args):
    fund = _fund(model, args)
    out = {"regime": fund.regime.tag, "mu": fund.regime.mu, "G": fund.G, "R": fund.R,
           "H": fund.H, "residuals": fund.residuals}
    if fund.Lambda is not None:
        out["Lambda"] = fund.Lambda
    return out


def _horizon(args, need):
    return max(need, args.horizon or 0)


def cmd_exit(model, args):
    if isinstance(model, LatticeModel):
        a, b = _int_arg(args.a, "a"), _int_arg(args.b, "b")
        fund = _fund(model, args)
        tables = taboo.build_tables(model, fund, _horizon(args, max(a + b, 1)), with_theta=False)
        D = fl.two_sided_exit(model, tables, fund.R, a, b).D
    else:
        D = mmbm.mmbm_exit(mmbm.MmbmFluct.from_model(model), args.a, args.b)
    return {"a": args.a, "b": args.b, "D": D}


def cmd_scale(model, args):
    if isinstance(model, LatticeModel):
        table = fl.scale_matrices(model, args.horizon or 10)
        return {"W": {str(k): table(k) for k in range(1, table.horizon + 1)}}
    fluct = mmbm.MmbmFluct.from_model(model)
    xs = args.x or [1.0]
    return {"W": {fmt_float(x): mmbm.mmbm_scale(fluct, x) for x in xs}}


def cmd_occupation(model, args):
    _lattice_only(model, "occupation")
    fund = tables = None
    if not drift_and_pi(model).null_recurrent:
        fund = _fund(model, args)
        tables = taboo.build_tables(model, fund, _horizon(args, args.l + args.m), with_theta=False)
    value = fl.strip_occupation(model, fund, tables, args.k, args.l, args.m, route=args.route)
    return {"k": args.k, "l": args.l, "m": args.m, "occupation": value}


def cmd_creep(model, args):
    if not isinstance(model, LatticeModel):
        fluct = mmbm.MmbmFluct.from_model(model)
        return {"x": args.m, "creeping": fluct.up_passage(args.m),
                "identity_residual": mmbm.mmbm_creeping_identity(fluct, args.m)}
    m = _int_arg(args.m, "m")
    fund = _fund(model, args)
    tables = taboo.build_tables(model, fund, _horizon(args, m + (args.l or 1)), with_theta=False)
    out = {"m": m, "creeping": fl.creeping(model, tables, m)}
    if args.l is not None:
        out["l"] = args.l
        out["hit_before_upcross"] = fl.hit_before_upcross(model, tables, fund.R, m, args.l)
    return out


def cmd_extrema(model, args):
    _lattice_only(model, "extrema")
    fund = _fund(model, args)
    law = (extrema.max_law if args.direction == "max" else extrema.min_law)(model, fund)
    return law


def cmd_decay(model, args):
    _lattice_only(model, "decay")
    fund = _fund(model, args)
    return fl.decay_diagnostic(model, fund, args.horizon or 40)


def cmd_transform_check(model, args):
    _lattice_only(model, "transform-check")
    z = args.z
    if args.form == "scale":
        fund = None if drift_and_pi(model).null_recurrent else _fund(model, args)
        radius = fl.series_radius(model, fund)
        z = 0.5 * radius if z is None else z
        table = fl.scale_matrices(model, args.horizon or fl.auto_horizon(abs(z) / radius))
        res, tail = fl.check_scale_transform(model, table, z, fund)
    else:
        fund = _fund(model, args)
        if z is None:
            z = fl.locate_bilateral_z(model) if args.form == "bilateral" else 0.5
            if z is None:
                raise ZOutsideDomain("no real z in [1e-3, 1e3] makes F(z)/z stable")
        res, tail = fl.check_H_transform(model, fund, z, args.form, K=args.horizon)
    return {"form": args.form, "z": z, "residual": res, "tail_bound": tail,
            "passed": bool(res < tail + 1e-8)}


def _parse_params(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--param expects NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        v = json.loads(v)
        out[k] = v
    return out


def cmd_simulate(model, args):
    cfg = SimConfig(n_paths=args.paths, seed=args.seed, euler_dt=args.dt,
                    level_cap=args.level_cap, shards=args.shards)
    params = _parse_params(args.param)
    run = sim_lattice if isinstance(model, LatticeModel) else sim_mmbm
    return run(model, args.target, params, cfg).to_dict()


def cmd_verify(model, args):
    opts = SolveOptions(tol=args.tol, max_iter=args.max_iter)
    table = verify(model, opts, **({"K": args.horizon} if args.horizon and
                                   isinstance(model, LatticeModel) else {}))
    return {"passed": table.ok, "checks": [r.as_dict() for r in table.rows]}


COMMANDS = {
    "validate": cmd_validate, "fundamentals": cmd_fundamentals, "exit": cmd_exit,
    "scale": cmd_scale, "occupation": cmd_occupation, "creep": cmd_creep,
    "extrema": cmd_extrema, "decay": cmd_decay, "transform-check": cmd_transform_check,
    "simulate": cmd_simulate, "verify": cmd_verify,
}


# ------------------------------------------------------------------ output

def _csv_rows(result):
    """Flatten a result into (key, i, j, value) rows; extrema use (m, l, i, j, p)."""
    if isinstance(result, extrema.ExtremaLaw):
        yield ("m", "l", "i", "j", "probability")
        for m, l, i, j, p in result.rows():
            yield (m, l, i, j, fmt_float(p))
        return
    if "checks" in result:
        yield ("name", "residual", "threshold", "status", "reason")
        for c in result["checks"]:
            yield (c["name"], _num(c["residual"]), _num(c["threshold"]), c["status"], c["reason"])
        return
    yield ("quantity", "i", "j", "value")
    for key, val in _flatten(result):
        arr = np.asarray(val, dtype=float)
        if arr.ndim == 0:
            yield (key, "", "", fmt_float(arr))
        elif arr.ndim == 1:
            for i, v in enumerate(arr):
                yield (key, i, "", fmt_float(v))
        else:
            for i in range(arr.shape[0]):
                for j in range(arr.shape[1]):
                    yield (key, i, j, fmt_float(arr[i, j]))


def _num(x):
    return fmt_float(x) if x is not None and np.isfinite(x) else ""


def _flatten(obj, prefix=""):
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif v is None or isinstance(v, (str, bool)):
            continue
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            continue
        else:
            yield key, v


def _law_to_dict(law):
    return {"direction": law.direction, "k_extreme": law.k_extreme,
            "k_position": law.k_position, "captured_mass": law.captured_mass,
            "tail_bound": law.tail_bound,
            "cells": [{"m": m, "l": l, "P": P} for (m, l), P in sorted(law.prob.items())]}


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays valid."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    return obj


def render(result, header, fmt):
    if fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for key, val in header.items():
            w.writerow([f"# {key}", val if not isinstance(val, dict) else json.dumps(val)])
        for row in _csv_rows(result):
            w.writerow(row)
        return buf.getvalue()
    if isinstance(result, extrema.ExtremaLaw):
        result = _law_to_dict(result)
    return dumps(_clean({**header, "result": result})) + "\n"


def _error(exc, code):
    payload = {"error": getattr(exc, "code", type(exc).__name__), "message": str(exc)}
    payload.update(_clean(getattr(exc, "payload", {}) or {}))
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _error(exc, 2)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        model, digest = load_model(args.model, strict=True)
        result = COMMANDS[args.command](model, args)
    except UsageError as exc:
        return _error(exc, 2)
    except OSError as exc:
        return _error(exc, 1)
    except (MapError, ValueError, np.linalg.LinAlgError) as exc:
        return _error(exc, 1)
    header = {"command": args.command, "model_sha256": digest, "version": __version__,
              "tolerances": {"tol": args.tol, "max_iter": args.max_iter, "horizon": args.horizon}}
    text = render(result, header, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify" and not result["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
