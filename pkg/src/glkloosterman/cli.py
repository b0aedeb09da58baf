"""Command line front end: ``glkloosterman {sum,orbital,germ,check,weyl}``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import _cellenum
from .bounds import BoundReportRow, bound_for_spec, rows_to_csv, run_sweep
from .errors import ConfigError, Infeasible, KloostermanError
from .group_geometry import RelevantWeyl, TorusDiag, relevant_weyl_elements
from .kloosterman import CellSpec, kloosterman_sum_and_size
from .orbital import (decomposition_count_R, germ_longest, germ_relevant, orbital_bruteforce,
                      orbital_integral_DR, r_estimate)
from .padic_core import cyclo_magnitude

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _ints(s: str) -> tuple:
    s = s.strip()
    return tuple(int(x) for x in s.split(",")) if s else ()


def _fracs(s: str | None):
    if s is None:
        return None
    return tuple(Fraction(x) for x in s.split(","))


def _emit(obj, out):
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        print(text)


def cmd_sum(args) -> int:
    spec = CellSpec(args.p, args.n, args.m, _ints(args.a), _ints(args.units),
                    _fracs(args.nu), _fracs(args.nu_prime))
    t0 = time.perf_counter()
    if args.fast_gl4:
        if spec.n != 4:
            raise ConfigError("--fast-gl4 needs n = 4")
        from .gl4_fast import accepted_params, kloosterman_gl4_fast
        kl = kloosterman_gl4_fast(spec, args.budget)
        size = sum(1 for _ in accepted_params(spec, args.budget))
        path = "gl4_fast"
    else:
        kl, size = kloosterman_sum_and_size(spec, args.budget, args.workers)
        path = "generic"
    mag = cyclo_magnitude(kl)
    row = BoundReportRow(spec.p, spec.m, spec.n, spec.a, spec.nu, spec.nu_prime, spec.units,
                         cell_size=size, magnitude=mag, path=path, value=kl)
    b = bound_for_spec(spec)
    if b is not None:
        row.bound = float(b)
        row.ratio = mag / row.bound
    row.elapsed_ms = int(round((time.perf_counter() - t0) * 1000))
    _emit(row.to_json(), args.out)
    return EXIT_OK


def _parse_torus(s: str) -> tuple[tuple, tuple]:
    # "1:1,0:1,-1:1" -> exponents (1, 0, -1), units (1, 1, 1)
    exps, units = [], []
    for part in s.split(","):
        e, _, v = part.partition(":")
        exps.append(int(e))
        units.append(int(v) if v else 1)
    return tuple(exps), tuple(units)


def cmd_orbital(args) -> int:
    exps, units = _parse_torus(args.torus)
    if args.n is not None and args.n != len(exps):
        raise ConfigError(f"--torus has {len(exps)} entries, expected n={args.n}")
    a = TorusDiag(args.p, exps, units)
    out = {
        "torus": list(exps),
        "p": args.p,
        "dr": str(orbital_integral_DR(a)),
        "R": decomposition_count_R(a),
        "R_estimate": r_estimate(a),
    }
    if args.oracle:
        out["bruteforce"] = orbital_bruteforce(a, budget=args.budget)
        out["agree"] = Fraction(out["dr"]) == out["bruteforce"]
    _emit(out, args.out)
    return EXIT_OK if out.get("agree", True) else EXIT_FAIL


def cmd_germ(args) -> int:
    units = _ints(args.units)
    if args.relevant:
        comp = _ints(args.relevant)
        ladders = args.a.split(";")
        if len(ladders) != len(comp):
            raise ConfigError("--a needs one ';'-separated ladder per block")
        blocks, pos = [], 0
        for k, lad in zip(comp, ladders):
            blocks.append(CellSpec(args.p, k, args.m, _ints(lad), units[pos:pos + k]))
            pos += k
        if pos != len(units):
            raise ConfigError("unit count does not match the composition")
        g = germ_relevant(RelevantWeyl(comp), blocks, args.budget)
    else:
        g = germ_longest(CellSpec(args.p, args.n, args.m, _ints(args.a), units), args.budget)
    z = g.complex()
    _emit({"p": g.p, "p_exp": str(g.p_exp), "order_exp": g.value.order_exp,
           "coeffs": [[k, c] for k, c in g.value.terms()], "complex": [z.real, z.imag],
           "magnitude": g.magnitude()}, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        with open(args.grid) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read grid config: {exc}") from exc
    cfg = dict(cfg)
    cfg["check"] = args.kind
    if args.out_json:
        cfg["out_json"] = args.out_json
    if args.out_csv:
        cfg["out_csv"] = args.out_csv
    summary = run_sweep(cfg)
    if not args.out_csv:
        sys.stdout.write(rows_to_csv(summary["rows"]))
    print(f"# {args.kind}: {summary['passed']} passed, {summary['failed']} failed, "
          f"{summary['skipped']} skipped, max ratio {summary['max_ratio']}", file=sys.stderr)
    return EXIT_FAIL if summary["failed"] else EXIT_OK


def cmd_weyl(args) -> int:
    if args.relevant:
        out = []
        for w in relevant_weyl_elements(args.n):
            out.append({"composition": list(w.composition), "perm": list(w.perm().perm),
                        "blocks": [[s.start, s.stop] for s in w.block_slices()],
                        "matrix": w.block_matrix()})
    else:
        from .group_geometry import WeylPerm
        out = {"longest": list(WeylPerm.longest(args.n).perm)}
    _emit(out, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glkloosterman",
                                 description="Exact p-adic GL(n) Kloosterman sums and bounds.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("sum", help="evaluate one Kloosterman sum exactly")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--a", required=True, help="comma separated exponents a_1..a_{n-1}")
    s.add_argument("--units", required=True, help="comma separated units v_1..v_n")
    s.add_argument("--nu")
    s.add_argument("--nu-prime")
    s.add_argument("--fast-gl4", action="store_true")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sum)

    o = sub.add_parser("orbital", help="unipotent orbital integral at a torus element")
    o.add_argument("--n", type=int)
    o.add_argument("--p", type=int, required=True)
    o.add_argument("--torus", required=True, help="e:v pairs, e.g. 1:1,0:1,-1:1")
    o.add_argument("--oracle", action="store_true", help="also run the brute-force count")
    o.set_defaults(func=cmd_orbital)

    g = sub.add_parser("germ", help="relative Shalika germ K_w(c)")
    g.add_argument("--n", type=int)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--a", required=True, help="exponents; with --relevant one ';' group per block")
    g.add_argument("--units", required=True)
    g.add_argument("--relevant", help="block composition, e.g. 2,2")
    g.set_defaults(func=cmd_germ)

    c = sub.add_parser("check", help="run a verification sweep")
    c.add_argument("kind", choices=["stevens", "weil", "dr", "thm-wn", "thm-w8", "gl4-dual"])
    c.add_argument("--grid", required=True, help="JSON grid config")
    c.add_argument("--out-json")
    c.add_argument("--out-csv")
    c.set_defaults(func=cmd_check)

    w = sub.add_parser("weyl", help="list Weyl elements")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--relevant", action="store_true")
    w.set_defaults(func=cmd_weyl)

    for p in (s, o, g, w):
        p.add_argument("--out", help="write JSON here instead of stdout")
    for p in (s, o, g):
        p.add_argument("--budget", type=int, default=_cellenum.DEFAULT_BUDGET)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KloostermanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
