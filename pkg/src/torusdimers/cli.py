"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 numerical
singularity, 4 failed verification check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import asymptotics as asy
from .bead_limit import (
    PointClass,
    QueryPoint,
    Z_series,
    gamma_correlation,
    gamma_correlation_mixture,
    scaling_partition_sweep,
    sector_weights_continuum,
    volume_mc_all,
)
from .correlations import EdgeEvent, edge_prob, edge_prob_theta, sector_mu
from .errors import (
    DomainError,
    PoleError,
    ShapeTooLargeError,
    SingularMatrixError,
    ZeroPartitionError,
)
from .kasteleyn import (
    THETAS,
    WeightField,
    partition_constant_sectors,
    partition_enumeration,
    partition_theta_log,
)
from .logcomplex import LogComplex, log_sum
from .torus import (
    Move,
    Site,
    TorusShape,
    enumerate_matchings,
    matching_sign,
    matching_type,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SINGULAR = 3
EXIT_VERIFY = 4


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing

def parse_shape(text: str) -> TorusShape:
    try:
        a, b = text.lower().split("x")
        return TorusShape(int(a), int(b))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}; expected e.g. 2x3") from exc


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad complex number {text!r}") from exc


def parse_triple(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated weights")
    return tuple(parse_complex(p) for p in parts)


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


_MOVE_NAMES = {"stay": Move.STAY, "0": Move.STAY, "e1": Move.STEP_E1, "1": Move.STEP_E1,
               "e2": Move.STEP_E2, "2": Move.STEP_E2}


def parse_events(text: str) -> list[EdgeEvent]:
    """``x1,x2:move`` items separated by ``;`` with move in stay/e1/e2."""
    events = []
    for item in filter(None, (s.strip() for s in text.split(";"))):
        try:
            coords, move = item.split(":")
            x1, x2 = (int(v) for v in coords.split(","))
            events.append(EdgeEvent(Site(x1, x2), _MOVE_NAMES[move.strip().lower()]))
        except (ValueError, KeyError) as exc:
            raise argparse.ArgumentTypeError(f"bad event {item!r}") from exc
    return events


def parse_points(text: str) -> list[QueryPoint]:
    """``t:h:class`` items separated by ``;`` with class in B/O/U."""
    points = []
    for item in filter(None, (s.strip() for s in text.split(";"))):
        try:
            t, h, cls = item.split(":")
            points.append(QueryPoint(float(t), int(h), PointClass(cls.strip().upper())))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad point {item!r}") from exc
    return points


def parse_theta(text: str):
    if text == "all":
        return list(THETAS)
    text = text.replace(",", "")
    if len(text) != 2 or any(c not in "01" for c in text):
        raise argparse.ArgumentTypeError("theta must be 'all' or two bits such as 01")
    return [(int(text[0]), int(text[1]))]


# --------------------------------------------------------------- output

def cjson(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def logjson(v: LogComplex) -> dict:
    out = {"log_mag": v.log_mag if math.isfinite(v.log_mag) else None, "phase": v.phase}
    out["value"] = cjson(v.to_complex()) if v.representable() else None
    return out


def fmt(x) -> str:
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def emit(args, payload, header=None, rows=None):
    if args.format == "csv" and header is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _weights(args, shape) -> WeightField:
    if args.weights:
        with open(args.weights, encoding="utf-8") as fh:
            raw = json.load(fh)
        table = []
        for row in raw:
            table.append([complex(v["re"], v["im"]) if isinstance(v, dict) else parse_complex(str(v))
                          for v in row])
        if len(table) != shape.n_sites:
            raise UsageError(f"weights file has {len(table)} rows, expected {shape.n_sites}")
        return WeightField(shape, table)
    if args.const:
        return WeightField.constant(shape, *args.const)
    return WeightField.uniform(shape)


# ------------------------------------------------------------- commands

def cmd_enumerate(args) -> int:
    ms = enumerate_matchings(args.shape)
    listing = []
    rows = []
    for i, m in enumerate(ms):
        h = matching_type(m)
        listing.append({"moves": m.grid().tolist(), "sign": matching_sign(m), "type": [h.h1, h.h2]})
        rows.append([i, "".join(str(int(v)) for v in m.moves), matching_sign(m), h.h1, h.h2])
    payload = {"shape": [args.shape.m1, args.shape.m2], "count": len(ms), "matchings": listing}
    emit(args, payload, ["index", "moves", "sign", "h1", "h2"], rows)
    return EXIT_OK


def cmd_partition(args) -> int:
    shape = args.shape
    sectors = {}
    if args.mode == "product":
        if not args.const:
            raise UsageError("--mode product needs --const")
        sectors = partition_constant_sectors(shape, *args.const)
        total = log_sum(sectors.values())
    elif args.mode == "det":
        w = _weights(args, shape)
        sectors = {th: partition_theta_log(w, th) for th in THETAS}
        total = log_sum(sectors.values())
    else:
        w = _weights(args, shape)
        total = LogComplex.from_complex(partition_enumeration(w))
    payload = {
        "shape": [shape.m1, shape.m2],
        "mode": args.mode,
        "total": logjson(total),
        "sectors": {f"{a}{b}": logjson(v) for (a, b), v in sectors.items()},
    }
    def row(label, v):
        z = v.to_complex() if v.representable() else complex(math.nan, math.nan)
        return [label, v.log_mag, v.phase, z.real, z.imag]

    rows = [row("total", total)] + [row(f"{a}{b}", v) for (a, b), v in sectors.items()]
    emit(args, payload, ["sector", "log_mag", "phase", "re", "im"], rows)
    return EXIT_OK


def cmd_correlate(args) -> int:
    w = _weights(args, args.shape)
    mu = sector_mu(w)
    per = {}
    for th in args.theta:
        per[th] = edge_prob_theta(w, th, args.events) if mu[th] != 0 else None
    mixed = edge_prob(w, args.events)
    payload = {
        "mixed": cjson(mixed),
        "sector_weights": {f"{a}{b}": cjson(mu[(a, b)]) for (a, b) in THETAS},
        "sectors": {f"{a}{b}": (cjson(v) if v is not None else None) for (a, b), v in per.items()},
    }
    rows = [["mixed", mixed]] + [[f"{a}{b}", v] for (a, b), v in per.items()]
    emit(args, payload, ["sector", "value"], rows)
    return EXIT_OK


def cmd_bead_corr(args) -> int:
    per = {th: gamma_correlation(args.n, args.lam, args.T, th, args.points) for th in args.theta}
    mu = sector_weights_continuum(args.n, args.lam, args.T)
    mixed = gamma_correlation_mixture(args.n, args.lam, args.T, args.points)
    payload = {
        "n": args.n,
        "points": len(args.points),
        "mixed": cjson(mixed),
        "sector_weights": {f"{a}{b}": cjson(mu[(a, b)]) for (a, b) in THETAS},
        "sectors": {f"{a}{b}": cjson(v) for (a, b), v in per.items()},
    }
    rows = [["mixed", mixed]] + [[f"{a}{b}", v] for (a, b), v in per.items()]
    emit(args, payload, ["sector", "value"], rows)
    return EXIT_OK


def cmd_limits(args) -> int:
    ms = args.m
    if not ms or any(m < 2 or m % 2 for m in ms):
        raise UsageError("--m must be a list of even integers >= 2")
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise UsageError("--m must be strictly increasing")
    z, th = args.z, args.theta1
    if args.which == "product":
        res = asy.sweep(lambda m: asy.finite_product(m, th, z), asy.product_limit(th, z), ms)
    elif args.which == "inverselim":
        res = asy.sweep(lambda m: asy.inverselim_finite(m, th, args.s, z, args.delta),
                        asy.inverselim_limit(th, args.s, z, args.delta), ms)
    elif args.which == "fourier":
        offset = 0.5 if args.half else 0.0
        res = asy.sweep(lambda n: asy.fourier_F_partial(z, args.s, n, offset),
                        asy.fourier_F_limit(z, args.s, offset), ms)
    else:
        if args.n is None:
            raise UsageError("--which scaling needs --n")
        res = scaling_partition_sweep(args.n, args.lam, args.T, ms)
    rows = [[r.m, r.finite, r.limit, r.abs_err, r.rel_err] for r in res.rows]
    payload = {
        "which": args.which,
        "rows": [{"m": r.m, "finite": cjson(r.finite), "limit": cjson(r.limit),
                  "abs_err": r.abs_err, "rel_err": r.rel_err} for r in res.rows],
        "decreasing": res.decreasing,
        "final_rel_err": res.final_rel_err,
    }
    emit(args, payload, ["m", "finite", "limit", "abs_err", "rel_err"], rows)
    ok = res.decreasing and res.final_rel_err <= args.bound
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_volume(args) -> int:
    if args.k < 1 or args.n < 1:
        raise UsageError("--n and --k must be at least 1")
    if args.k > 6:
        raise UsageError("--k must be at most 6")
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    est = volume_mc_all(args.n, args.k, args.samples, args.seed, threads=args.threads)
    series = Z_series(args.n, args.k)
    rows = []
    worst = 0.0
    for ell in range(args.n + 1):
        value = est.estimate(ell)
        se = est.standard_error(ell)
        exact = float(series.volume(args.k, ell))
        if se > 0:
            zscore = (value - exact) / se
        else:
            zscore = 0.0 if value == exact else math.inf
        worst = max(worst, abs(zscore))
        rows.append([ell, value, se, exact, zscore])
    payload = {
        "n": args.n, "k": args.k, "samples": args.samples, "seed": args.seed,
        "rows": [dict(zip(["ell", "estimate", "se", "series", "z"], r)) for r in rows],
    }
    emit(args, payload, ["ell", "estimate", "se", "series", "z"], rows)
    return EXIT_OK if worst <= 4 else EXIT_VERIFY


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for Monte Carlo batches (default: all cores)")

    parser = argparse.ArgumentParser(prog="torusdimers", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="list all matchings of a small torus")
    p.add_argument("--shape", type=parse_shape, required=True)
    p.set_defaults(func=cmd_enumerate)

    weights = argparse.ArgumentParser(add_help=False)
    weights.add_argument("--shape", type=parse_shape, required=True)
    group = weights.add_mutually_exclusive_group()
    group.add_argument("--const", type=parse_triple, help="constant weights alpha,beta,gamma")
    group.add_argument("--weights", help="JSON file with one [alpha, beta, gamma] row per site")

    p = sub.add_parser("partition", parents=[common, weights], help="partition function and sectors")
    p.add_argument("--mode", choices=["det", "enum", "product"], default="det")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("correlate", parents=[common, weights], help="edge-event probabilities")
    p.add_argument("--events", type=parse_events, required=True, help="e.g. '0,0:stay;1,0:e2'")
    p.add_argument("--theta", type=parse_theta, default="all")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("bead-corr", parents=[common], help="continuum bead correlations")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    p.add_argument("--T", type=parse_complex, required=True)
    p.add_argument("--points", type=parse_points, required=True, help="e.g. '0.25:0:B;0.5:1:O'")
    p.add_argument("--theta", type=parse_theta, default="all")
    p.set_defaults(func=cmd_bead_corr)

    p = sub.add_parser("limits", parents=[common], help="finite-m versus limit sweeps")
    p.add_argument("--which", choices=["product", "inverselim", "fourier", "scaling"], required=True)
    p.add_argument("--m", type=parse_int_list, required=True, help="comma-separated even values")
    p.add_argument("--z", type=parse_complex, default=1.0)
    p.add_argument("--theta1", type=int, choices=[0, 1], default=0)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--delta", action="store_true", help="shifted-exponent variant")
    p.add_argument("--half", action="store_true", help="half-integer Fourier modes")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lam", type=parse_complex, default=0.0)
    p.add_argument("--T", type=parse_complex, default=0.0)
    p.add_argument("--bound", type=float, default=5e-2, help="required final relative error")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("volume", parents=[common], help="Monte Carlo bead volumes versus series")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_volume)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    # LinAlgError derives from ValueError, so singularities are caught first
    except (SingularMatrixError, PoleError, ZeroPartitionError, np.linalg.LinAlgError) as exc:
        print(f"singular: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (UsageError, ShapeTooLargeError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
