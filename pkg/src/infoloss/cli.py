"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numeric tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import distributions as D
from . import gallery as G
from . import loss as L
from . import pbf as P
from . import reldim as RD
from .accumulator import accumulate, accumulator_loss_bound
from .acr import mc_acr_analysis
from .entropy import information_dimension
from .errors import InfoLossError, NumericError, ToleranceNotMetError

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    pass


def _load_json(text: str):
    """Inline JSON, or a path to a JSON file."""
    try:
        if text.lstrip().startswith(("{", "[")):
            return json.loads(text)
        return json.loads(Path(text).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {text!r}: {exc}") from None


def _encode(v):
    if isinstance(v, Fraction):
        return {"value": float(v), "exact": str(v)}
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_encode(u) for u in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _encode(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_encode(u) for u in v]
    return v


def _emit(payload: dict, out=None):
    out = out or sys.stdout
    json.dump(_encode({"schema_version": SCHEMA_VERSION, **payload}), out, indent=2)
    out.write("\n")


def _map_from_json(desc):
    """A Pbf description, or ``{"expr": "..."}`` for an arbitrary map."""
    if isinstance(desc, dict) and "expr" in desc:
        return P.compile_expression(desc["expr"])
    return P.from_json(desc)


# ------------------------------------------------------------------ commands


def cmd_analyze(args) -> int:
    f = P.from_json(_load_json(args.pbf))
    d = D.from_json(_load_json(args.dist))
    if args.method == "mc":
        rep = L.loss_monte_carlo(f, d, samples=args.samples, seed=args.seed)
    else:
        rep = L.ESTIMATORS[args.method](f, d)
    _emit({"command": "analyze", "map": f.name, "distribution": getattr(d, "name", ""), **rep.to_dict()})
    return EXIT_OK


def write_figure_csv(rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(G.FIGURE_COLUMNS)
    for r in rows:
        w.writerow([repr(float(r[c])) for c in G.FIGURE_COLUMNS])


def cmd_figure(args) -> int:
    if args.points < 1:
        raise InputError("--points must be positive")
    if not 0 < args.sigma_min <= args.sigma_max:
        raise InputError("need 0 < sigma-min <= sigma-max")
    grid = np.linspace(args.sigma_min, args.sigma_max, args.points)
    rows = G.figure_cubic(grid)
    if args.out in (None, "-"):
        write_figure_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            write_figure_csv(rows, fh)
    return EXIT_OK


def cmd_dimension(args) -> int:
    d = D.from_json(_load_json(args.dist))
    est = information_dimension(d, n_lo=args.n_lo, n_hi=args.n_hi, samples=args.samples, seed=args.seed)
    _emit({"command": "dimension", **est.to_dict()})
    return EXIT_OK


def cmd_relloss(args) -> int:
    if args.mode == "empirical":
        if not (args.dist and args.map):
            raise InputError("relloss empirical needs --dist and --map")
        d = D.from_json(_load_json(args.dist))
        g = _map_from_json(_load_json(args.map))
        res = RD.rel_loss_empirical(d, g, n_lo=args.n_lo, n_hi=args.n_hi, samples=args.samples, seed=args.seed)
        _emit({"command": "relloss", "mode": "empirical", **res.to_dict()})
        return EXIT_OK
    if args.mode is not None:
        raise InputError(f"unknown relloss mode {args.mode!r}")
    if not args.spec:
        raise InputError("relloss needs --spec (structural) or the 'empirical' mode")
    spec = RD.DimensionPieceSpec.from_json(_load_json(args.spec))
    _emit({"command": "relloss", "mode": "structural", **RD.rel_loss_structural(spec).to_dict()})
    return EXIT_OK


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, float, np.floating)):
        return f"{float(v):.6g}"
    return str(v)


def cmd_gallery(args) -> int:
    if args.action == "list":
        for name, s in sorted(G.GALLERY.items()):
            print(f"{name:22s} {s.description}")
        return EXIT_OK
    if args.action == "table":
        rows = G.table_one()
        ok = True
        print(f"{'system':16s} {'computed (I, L, t, l)':32s} reference")
        for name, ref in G.TABLE_ONE_REFERENCE.items():
            got = rows[name]["pattern"]
            ok &= got == ref
            print(f"{name:16s} {str(got):32s} {ref}")
        return EXIT_OK if ok else EXIT_NUMERIC
    if not args.name:
        raise InputError("gallery run needs a system name")
    system = G.gallery(args.name)
    rows = system.run()
    if args.json:
        _emit({"command": "gallery", "system": system.name, "rows": rows})
    else:
        print(f"{'quantity':20s} {'computed':>14s} {'reference':>14s} {'tol':>8s}  ok  provenance")
        for r in rows:
            print(f"{r['quantity']:20s} {_fmt(r['computed']):>14s} {_fmt(r['reference']):>14s} "
                  f"{r['tol']:8.1g}  {'yes' if r['ok'] else 'NO':3s} {r['provenance']}")
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_NUMERIC


def cmd_acr(args) -> int:
    try:
        lags = tuple(int(k) for k in args.lags.split(","))
    except ValueError:
        raise InputError(f"bad lag list {args.lags!r}") from None
    _emit({"command": "acr", **mc_acr_analysis(args.n, lags, seed=args.seed).to_dict()})
    return EXIT_OK


def cmd_accumulator(args) -> int:
    p = np.full(args.n, 1.0 / args.n) if args.pmf is None else np.array(_load_json(args.pmf), dtype=float)
    state = accumulate(p, args.steps)
    _emit({"command": "accumulator", **state.to_dict(), "loss_bound_bits": accumulator_loss_bound(args.n, args.steps)})
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="infoloss", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="information loss of a piecewise bijective map")
    a.add_argument("--pbf", required=True, help="map description (inline JSON or file)")
    a.add_argument("--dist", required=True, help="input distribution (inline JSON or file)")
    a.add_argument("--method", choices=("diffent", "partition", "mc"), default="partition")
    a.add_argument("--samples", type=int, default=1_000_000)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_analyze)

    f = sub.add_parser("figure", help="figure data as CSV")
    f.add_argument("which", choices=("cubic",))
    f.add_argument("--sigma-min", type=float, default=1.0)
    f.add_argument("--sigma-max", type=float, default=30.0)
    f.add_argument("--points", type=int, default=30)
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_figure)

    dm = sub.add_parser("dimension", help="information dimension estimate")
    dm.add_argument("--dist", required=True)
    dm.add_argument("--n-lo", type=int, default=6)
    dm.add_argument("--n-hi", type=int, default=14)
    dm.add_argument("--samples", type=int, default=1_000_000)
    dm.add_argument("--seed", type=int, default=0)
    dm.set_defaults(func=cmd_dimension)

    r = sub.add_parser("relloss", help="relative information loss")
    r.add_argument("mode", nargs="?", default=None, help="omit for the structural rule, or 'empirical'")
    r.add_argument("--spec")
    r.add_argument("--dist")
    r.add_argument("--map")
    r.add_argument("--n-lo", type=int, default=6)
    r.add_argument("--n-hi", type=int, default=12)
    r.add_argument("--samples", type=int, default=1_000_000)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_relloss)

    g = sub.add_parser("gallery", help="named example systems")
    g.add_argument("action", choices=("list", "run", "table"))
    g.add_argument("name", nargs="?")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gallery)

    c = sub.add_parser("acr", help="MC-AcR relative transfer analysis")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--lags", required=True, help="comma separated, e.g. 1,2,3")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_acr)

    m = sub.add_parser("accumulator", help="modulo accumulator state and loss bound")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--steps", type=int, required=True)
    m.add_argument("--pmf", default=None, help="per-symbol pmf as a JSON list (default uniform)")
    m.set_defaults(func=cmd_accumulator)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ToleranceNotMetError, NumericError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, InfoLossError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
