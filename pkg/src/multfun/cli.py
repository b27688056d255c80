"""Command-line front end: one command per analysis, machine-readable reports.

Every run writes a JSON report (deterministic bytes for a fixed config and
seed; wall-clock metadata goes to a separate .meta.json file) and, where a
tabular view is defined, a CSV sibling.  Exit codes: 0 success, 2 input
validation, 3 resource limits, 4 bounded-search failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .arith import ZERO, RootOfUnity, Zero
from .errors import InputError, MultfunError
from .ergodic import FiniteSystem, PolynomialFamily, convergence_average, recurrence_average
from .levelsets import (
    density_profile,
    divisibility_report,
    level_set,
    random_relative_subset,
    structure_pair,
)
from .mf_core import BUILTIN_NAMES, builtin, sieve_range
from .pretentious import (
    ap_mean,
    euler_product_mean,
    halasz_classify,
    pretentious_distance,
    rap_test,
    unit_function,
)
from .seminorms import gowers_direct, gowers_fast, spectrum_scan, uniformity_profile

COMMANDS = (
    "catalog", "sieve", "mean", "apmean", "distance", "classify", "gowers",
    "spectrum", "levelset", "structure", "divisibility", "recurrence",
    "convergence",
)

NAMED_SETS = {
    "squarefree": ("mu_squared", "1"),
    "mult_even": ("liouville", "1"),
    "mult_odd": ("liouville", "-1"),
    "moebius_plus": ("moebius", "1"),
    "moebius_minus": ("moebius", "-1"),
}


def parse_z(s: str):
    """Level-target syntax: 0 | 1 | -1 | a/b (the root e(a/b)) | val:a/b
    (the rational value a/b) | any complex literal (float path, needs --tol)."""
    s = s.strip()
    if s in ("0", "zero"):
        return ZERO
    if s == "1":
        return RootOfUnity(0, 1)
    if s == "-1":
        return RootOfUnity(1, 2)
    if s.startswith("val:"):
        a, b = s[4:].split("/", 1)
        return Fraction(int(a), int(b))
    if "/" in s:
        a, b = s.split("/", 1)
        try:
            return RootOfUnity(int(a), int(b))
        except ValueError as exc:
            raise InputError(f"cannot parse target {s!r}: {exc}") from exc
    try:
        return complex(s)
    except ValueError as exc:
        raise InputError(f"cannot parse target {s!r}") from exc


def parse_polys(s: str) -> PolynomialFamily:
    """Polynomials like 'n;2n;n^2;n^3+2n' (semicolon-separated, p(0)=0)."""
    polys = []
    for part in s.split(";"):
        part = part.replace(" ", "")
        if not part:
            continue
        coeffs: dict[int, int] = {}
        for term in part.replace("-", "+-").split("+"):
            if not term:
                continue
            if "n" in term:
                head, _, tail = term.partition("n")
                c = int(head) if head not in ("", "-") else (-1 if head == "-" else 1)
                k = int(tail[1:]) if tail.startswith("^") else 1
            else:
                c, k = int(term), 0
            coeffs[k] = coeffs.get(k, 0) + c
        deg = max(coeffs) if coeffs else 0
        polys.append(tuple(coeffs.get(k, 0) for k in range(deg + 1)))
    return PolynomialFamily(tuple(polys))


def build_function(args):
    name = args.function
    if name is None:
        raise InputError("no --function given")
    params = {}
    if getattr(args, "xi", None) is not None:
        params["xi"] = args.xi
    if getattr(args, "modulus", None) is not None:
        params["modulus"] = args.modulus
    if getattr(args, "index", None) is not None:
        params["index"] = args.index
    if getattr(args, "file", None) is not None:
        params["path"] = args.file
    if name == "one":
        return unit_function()
    return builtin(name, params)


def jsonable(obj):
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, Zero):
        return "0"
    if isinstance(obj, RootOfUnity):
        return f"e({obj.num}/{obj.den})"
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return obj


def write_report(out_path: str, payload: dict, started: float) -> None:
    path = Path(out_path)
    body = json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n"
    path.write_text(body, encoding="utf-8")
    meta = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "elapsed_seconds": round(time.monotonic() - started, 3)}
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n")


def _write_csv(path, text):
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _config_echo(args) -> dict:
    skip = {"func"}
    return {k: jsonable(v) for k, v in vars(args).items()
            if k not in skip and v is not None}


def _named_level_set(args):
    if getattr(args, "set", None):
        if args.set not in NAMED_SETS:
            raise InputError(f"unknown named set {args.set!r}; "
                             f"known: {', '.join(sorted(NAMED_SETS))}")
        fname, ztext = NAMED_SETS[args.set]
        f = builtin(fname, {})
        z = parse_z(ztext)
    else:
        f = build_function(args)
        if args.z is None:
            raise InputError("need --z (or --set)")
        z = parse_z(args.z)
    return f, z


# --------------------------------------------------------------------------
# Command handlers; each returns the result payload

def cmd_catalog(args):
    return {
        "builtins": list(BUILTIN_NAMES),
        "parameters": {
            "lambda_xi": "xi (rational a/b or float)",
            "mu_xi": "xi",
            "kappa_xi": "xi",
            "dirichlet_character": "modulus, index",
            "chi_of_tau": "modulus in {2, 4, p, 2p}",
            "custom_file": "file path; lines 'p k re im', optional 'default: zero|one'",
        },
        "named_sets": {k: {"function": v[0], "z": v[1]} for k, v in NAMED_SETS.items()},
    }


def cmd_sieve(args):
    f = build_function(args)
    table = sieve_range(f, args.N)
    head = [jsonable(complex(v)) for v in table.values[1 : min(args.N, 50) + 1]]
    payload = {
        "source": table.source,
        "N": table.N,
        "values_head": head,
        "abs_sum": float(np.abs(table.values[1:]).sum()),
        "sum": jsonable(complex(table.values[1:].sum())),
        "exact_codes": table.exact is not None,
    }
    if args.csv:
        limit = min(args.N, args.limit or 1000)
        lines = ["n,re,im"]
        lines += [f"{n},{table.values[n].real:.12g},{table.values[n].imag:.12g}"
                  for n in range(1, limit + 1)]
        _write_csv(args.csv, "\n".join(lines) + "\n")
    return payload


def cmd_mean(args):
    f = build_function(args)
    ep = euler_product_mean(f, args.P)
    payload = {"source": f.label, "euler_product": jsonable(ep)}
    if args.N:
        table = sieve_range(f, args.N)
        payload["empirical_mean"] = jsonable(complex(table.values[1:].mean()))
        payload["empirical_N"] = args.N
    return payload


def cmd_apmean(args):
    f = build_function(args)
    rep = ap_mean(f, args.q, args.r, args.N)
    return {"source": f.label, "report": jsonable(rep),
            "agreement": rep.agreement}


def cmd_distance(args):
    f = build_function(args)
    if args.g == "one" or args.g is None:
        g = unit_function()
    else:
        gp = {}
        if args.g_xi is not None:
            gp["xi"] = args.g_xi
        if args.g_modulus is not None:
            gp["modulus"] = args.g_modulus
        if args.g_index is not None:
            gp["index"] = args.g_index
        g = builtin(args.g, gp)
    prof = pretentious_distance(f, g, args.P, t=args.t)
    _write_csv(args.csv, prof.to_csv())
    return {"profile": jsonable(prof)}


def cmd_classify(args):
    f = build_function(args)
    rep = halasz_classify(f, P=args.P, N=args.N)
    rap = rap_test(f, Q_max=args.Qmax, P=args.P)
    return {"halasz": jsonable(rep), "rap": jsonable(rap)}


def cmd_gowers(args):
    f = build_function(args)
    if args.grid:
        grid = [int(x) for x in args.grid.split(",")]
        report = uniformity_profile(f, args.s, grid, method=args.method)
        _write_csv(args.csv, report.to_csv())
        return {"profile": report.to_dict()}
    table = sieve_range(f, args.N)
    fn = gowers_direct if args.method == "direct" else gowers_fast
    value = fn(table.values, args.N, args.s)
    return {"source": f.label, "N": args.N, "s": args.s,
            "method": args.method, "value": value}


def cmd_spectrum(args):
    f = build_function(args)
    table = sieve_range(f, args.N)
    scan = spectrum_scan(table.values, args.qmax, N=args.N,
                         threshold=args.threshold)
    return {"source": f.label, "scan": jsonable(scan)}


def cmd_levelset(args):
    f, z = _named_level_set(args)
    E = level_set(f, z, args.N, tol=args.tol)
    if args.random_subset is not None:
        if args.seed is None:
            raise InputError("--random-subset requires --seed")
        E = random_relative_subset(E, args.random_subset, args.seed)
    payload = {
        "source": E.source,
        "z": jsonable(E.z),
        "N": E.N,
        "count": E.count,
        "density": E.density,
        "exact": E.exact,
        "members_head": [int(x) for x in E.members[:50]],
    }
    if args.qmax:
        prof = density_profile(E, args.qmax)
        payload["density_profile"] = {
            "cells": {f"{q},{r}": c for (q, r), c in prof.cells.items()},
            "empty_cells": [f"{q},{r}" for q, r in prof.empty_cells],
        }
    if args.members:
        E.to_text(args.members)
    if args.bitmap:
        E.to_bitmap(args.bitmap)
    return payload


def cmd_structure(args):
    f = build_function(args)
    if args.z is None:
        raise InputError("need --z")
    z = parse_z(args.z)
    pair = structure_pair(f, z, args.N, k_max=args.kmax, Q_max=args.Qmax, P=args.P)
    return {
        "E": {"source": pair.E.source, "count": pair.E.count, "z": jsonable(pair.E.z)},
        "R": {"source": pair.R.source, "count": pair.R.count, "z": jsonable(pair.R.z),
              "members_head": [int(x) for x in pair.R.members[:30]]},
        "k": pair.k,
        "chi": None if pair.chi is None else
            {"modulus": pair.chi.modulus, "index": pair.chi.index},
        "dE": pair.dE,
        "dR": pair.dR,
        "u_norms": [{"N": n, "s": s, "value": v} for n, s, v in pair.u_norms],
        "u_mean": pair.u_mean,
        "rap": jsonable(pair.rap),
        "concentration_verdict": None if pair.concentration is None
            else pair.concentration.verdict,
        "notes": pair.notes,
    }


def cmd_divisibility(args):
    f, z = _named_level_set(args)
    E = level_set(f, z, args.N, tol=args.tol)
    rep = divisibility_report(E, args.shift, args.umax, floor=args.floor)
    return {"report": jsonable(rep)}


def _recurrence_common(args):
    sizes = tuple(int(x) for x in args.m.split(","))
    system = FiniteSystem(sizes)
    A = [int(x) for x in args.A.split(",")]
    polys = parse_polys(args.polys)
    if getattr(args, "set", None) or args.function:
        f, z = _named_level_set(args)
        E = level_set(f, z, args.N, tol=args.tol)
        members = E.members
        label = E.source
    else:
        members = np.arange(1, args.N + 1, dtype=np.int64)
        label = "naturals"
    if args.shift:
        members = members[members > args.shift] - args.shift
        label = f"{label} - {args.shift}"
    return system, A, polys, members, label


def cmd_recurrence(args):
    system, A, polys, members, label = _recurrence_common(args)
    rep = recurrence_average(system, A, polys, members, args.Jmax)
    if args.shift and (getattr(args, "set", None) or args.function):
        f, z = _named_level_set(args)
        E = level_set(f, z, args.N, tol=args.tol)
        umax = max(system.sizes)
        div = divisibility_report(E, args.shift, umax)
        if div.verdict == "not_divisible":
            rep.certificate = div.certificate
    return {"sequence": label, "report": jsonable(rep)}


def cmd_convergence(args):
    system, A, polys, members, label = _recurrence_common(args)
    rep = convergence_average(system, A, polys, members, args.Jmax)
    return {"sequence": label, "report": jsonable(rep)}


# --------------------------------------------------------------------------
# Argument plumbing

def _add_function_opts(p):
    p.add_argument("--function", choices=list(BUILTIN_NAMES) + ["one"])
    p.add_argument("--xi", help="phase parameter, rational a/b or float")
    p.add_argument("--modulus", type=int)
    p.add_argument("--index", type=int)
    p.add_argument("--file", help="custom function file path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="multfun",
        description="Multiplicative-function structure and randomness toolkit",
    )
    ap.add_argument("--version", action="version", version=f"multfun {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n_default=None):
        p.add_argument("--out", default=None, help="JSON report path")
        p.add_argument("--csv", default=None, help="CSV table path (where defined)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap; results are identical at any setting")
        if n_default is not None:
            p.add_argument("--N", type=int, default=n_default)

    p = sub.add_parser("catalog");  common(p)
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("sieve");  _add_function_opts(p); common(p, 10 ** 5)
    p.add_argument("--limit", type=int, default=1000)
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("mean");  _add_function_opts(p); common(p, None)
    p.add_argument("--P", type=int, default=10 ** 5)
    p.add_argument("--N", type=int, default=None)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("apmean");  _add_function_opts(p); common(p, 10 ** 6)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.set_defaults(func=cmd_apmean)

    p = sub.add_parser("distance");  _add_function_opts(p); common(p)
    p.add_argument("--g", default="one", help="second function (builtin name or 'one')")
    p.add_argument("--g-xi", dest="g_xi")
    p.add_argument("--g-modulus", dest="g_modulus", type=int)
    p.add_argument("--g-index", dest="g_index", type=int)
    p.add_argument("--P", type=int, default=10 ** 6)
    p.add_argument("--t", type=float, default=0.0)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("classify");  _add_function_opts(p); common(p, 10 ** 6)
    p.add_argument("--P", type=int, default=10 ** 6)
    p.add_argument("--Qmax", type=int, default=60)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("gowers");  _add_function_opts(p); common(p, 2 ** 14)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--method", choices=("fast", "direct"), default="fast")
    p.add_argument("--grid", help="comma-separated N grid for a profile")
    p.set_defaults(func=cmd_gowers)

    p = sub.add_parser("spectrum");  _add_function_opts(p); common(p, 10 ** 6)
    p.add_argument("--qmax", type=int, default=30)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("levelset");  _add_function_opts(p); common(p, 10 ** 6)
    p.add_argument("--z")
    p.add_argument("--set", choices=sorted(NAMED_SETS))
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--qmax", type=int, default=0, help="progression profile depth")
    p.add_argument("--members", help="write newline-delimited members here")
    p.add_argument("--bitmap", help="write length-N little-endian bitmap here")
    p.add_argument("--random-subset", dest="random_subset", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_levelset)

    p = sub.add_parser("structure");  _add_function_opts(p); common(p, 10 ** 6)
    p.add_argument("--z", required=True)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--Qmax", type=int, default=60)
    p.add_argument("--P", type=int, default=10 ** 6)
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("divisibility");  _add_function_opts(p); common(p, 10 ** 6)
    p.add_argument("--z")
    p.add_argument("--set", choices=sorted(NAMED_SETS))
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--umax", type=int, default=10)
    p.add_argument("--floor", type=float, default=1e-3)
    p.set_defaults(func=cmd_divisibility)

    for name, fn in (("recurrence", cmd_recurrence), ("convergence", cmd_convergence)):
        p = sub.add_parser(name);  _add_function_opts(p); common(p, 10 ** 6)
        p.add_argument("--z")
        p.add_argument("--set", choices=sorted(NAMED_SETS))
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--m", default="4", help="cyclic sizes, comma separated")
        p.add_argument("--A", default="0", help="subset points, comma separated")
        p.add_argument("--polys", default="n")
        p.add_argument("--shift", type=int, default=0)
        p.add_argument("--Jmax", type=int, default=10 ** 5)
        p.set_defaults(func=fn)

    return ap


def run(argv=None) -> int:
    started = time.monotonic()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports its own message; map parse failures to exit 2
        return 0 if exc.code in (0, None) else 2
    out = args.out or f"multfun_{args.command}.json"
    if args.threads is not None and args.threads < 1:
        args.threads = 1
    try:
        result = args.func(args)
    except MultfunError as exc:
        payload = {
            "version": __version__,
            "command": args.command,
            "config": _config_echo(args),
            "error": {"type": type(exc).__name__, "message": str(exc),
                      "exit_code": exc.exit_code},
        }
        write_report(out, payload, started)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    payload = {
        "version": __version__,
        "command": args.command,
        "config": _config_echo(args),
        "result": result,
    }
    write_report(out, payload, started)
    return 0


def main() -> None:
    sys.exit(run())
