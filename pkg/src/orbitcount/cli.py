"""Command-line front end.

Every document carries ``"schema": 1`` and the resolved configuration.  Big
integers are written as decimal strings.  Exit status is 0 on success, 1 when
a computation fails and 2 on usage errors.  The sampler uses numpy's PCG64
seeded with ``--seed``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .clt import (
    distribution_float,
    pmf,
    report_dict,
    summarize,
    sweep_csv,
    sweep_row,
)
from .oracle import DEFAULT_BUDGET, brute_force_counts, feller_samples
from .orbit_series import SCHEMA_VERSION, build_orbit_table
from .saddle import DEFAULT_TOL, contour_integral_J, prefactor_log, solve_saddle
from .zfun import z_general, z_staircase

# exact tables are used by `clt` up to this n
EXACT_CLT_MAX = 200


class UsageError(Exception):
    pass


def parse_x(text: str) -> Fraction:
    try:
        x = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc
    if x <= 0:
        raise argparse.ArgumentTypeError("x must be positive")
    return x


def parse_grid(text: str) -> list[int]:
    """``a:b:factor`` -> a, a*factor, ... up to b (geometric)."""
    try:
        a, b, f = (int(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a:b:factor, got {text!r}") from exc
    if a < 1 or b < a or f < 2:
        raise argparse.ArgumentTypeError("need 1 <= a <= b and factor >= 2")
    out = []
    n = a
    while n <= b:
        out.append(n)
        n *= f
    return out


def parse_floats(text: str) -> list[float]:
    try:
        return [float(Fraction(v)) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ell", type=int, default=2)
    common.add_argument("--x", type=parse_x, default=Fraction(1))
    common.add_argument("--n", type=int)
    common.add_argument("--n-grid", type=parse_grid, dest="n_grid")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")
    common.add_argument("--threads", type=int, default=1)

    p = argparse.ArgumentParser(prog="orbitcount", description="Orbit-count statistics of commuting permutation tuples.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("counts", parents=[common], help="A(ell, n, k) from the generating function")
    o = sub.add_parser("oracle", parents=[common], help="A(ell, n, k) by enumeration")
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    z = sub.add_parser("zeval", parents=[common], help="certified Z value")
    z.add_argument("--m", type=int)
    z.add_argument("--alphas", type=parse_floats)
    z.add_argument("--t", type=float, required=True)
    sub.add_parser("saddle", parents=[common], help="saddle point t_n")
    c = sub.add_parser("contour", parents=[common], help="prefactor and contour integral J")
    c.add_argument("--t", type=float)
    c.add_argument("--grid", type=int)
    k = sub.add_parser("clt", parents=[common], help="distribution of K and CLT diagnostics")
    k.add_argument("--s", type=parse_floats, default=[-1.0, -0.5, 0.5, 1.0])
    k.add_argument("--centering", choices=("refined", "moments"), default="refined")
    sub.add_parser("sweep", parents=[common], help="asymptotic-ratio diagnostics over an n grid")
    s = sub.add_parser("sample", parents=[common], help="Feller-coupling draws of K for ell = 1")
    s.add_argument("--samples", type=int, default=1)
    return p


def _config(args) -> dict:
    cfg = {}
    for key, val in sorted(vars(args).items()):
        if isinstance(val, Fraction):
            val = str(val)
        cfg[key] = val
    return cfg


def _need_n(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    return args.n


def _n_values(args) -> list[int]:
    if args.n_grid is not None:
        return args.n_grid
    return [_need_n(args)]


def _with_header(args, body: dict) -> dict:
    return {"schema": SCHEMA_VERSION, "command": args.command, "config": _config(args), **body}


def _csv_text(args, header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(_config(args), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _counts_output(args, row, method) -> str:
    n = _need_n(args)
    if args.format == "csv":
        return _csv_text(args, ["ell", "n", "k", "A"], ([args.ell, n, k, a] for k, a in enumerate(row)))
    return json.dumps(_with_header(args, {"ell": args.ell, "n": n, "method": method, "A": [str(a) for a in row]}), sort_keys=True)


def cmd_counts(args) -> str:
    n = _need_n(args)
    table = build_orbit_table(args.ell, n)
    return _counts_output(args, table.row(n), "generating_function")


def cmd_oracle(args) -> str:
    n = _need_n(args)
    row = brute_force_counts(args.ell, n, budget=args.budget, workers=args.threads)
    return _counts_output(args, row, "enumeration")


def cmd_zeval(args) -> str:
    if (args.m is None) == (args.alphas is None):
        raise UsageError("give exactly one of --m or --alphas")
    tol = args.tol
    if args.m is not None:
        zv = z_staircase(args.ell, args.m, args.t, tol=tol)
        body = {"ell": args.ell, "m": args.m}
    else:
        zv = z_general(args.alphas, args.t, tol=tol)
        body = {"alphas": args.alphas}
    body.update({"t": args.t, "value": zv.value, "error_bound": zv.error, "cutoff": zv.cutoff})
    if args.format == "csv":
        return _csv_text(args, list(body), [[json.dumps(v) if isinstance(v, list) else v for v in body.values()]])
    return json.dumps(_with_header(args, body), sort_keys=True)


def cmd_saddle(args) -> str:
    rows = []
    for n in _n_values(args):
        sp = solve_saddle(args.ell, args.x, max(n, 1), tol=args.tol)
        rows.append(
            {"n": sp.n, "t_n": sp.t_n, "residual": sp.residual, "lambda_n": sp.lambda_n, "prefactor_log": sp.prefactor_log}
        )
    return _rows_output(args, rows)


def cmd_contour(args) -> str:
    rows = []
    for n in _n_values(args):
        t = args.t if args.t is not None else solve_saddle(args.ell, args.x, max(n, 1), tol=args.tol).t_n
        j = contour_integral_J(args.ell, args.x, t, n, grid_points=args.grid)
        lp = prefactor_log(args.ell, args.x, t, n)
        rows.append(
            {
                "n": n,
                "t": t,
                "J": j.value,
                "J_imag": j.imag,
                "grid_points": j.grid_points,
                "log_P": lp,
                "log_H": lp + math.log(j.value) if j.value > 0 else None,
            }
        )
    return _rows_output(args, rows)


def _distribution(ell, n, x):
    if n <= EXACT_CLT_MAX:
        return pmf(build_orbit_table(ell, n), n, x)
    return distribution_float(ell, n, x)


def cmd_clt(args) -> str:
    rows = []
    for n in _n_values(args):
        if n < 1:
            raise UsageError("--n must be >= 1")
        dist = summarize(_distribution(args.ell, n, args.x), args.s, centering=args.centering)
        rows.append(report_dict(dist))
    if args.format == "csv":
        header = [k for k in rows[0] if k != "psi"] + [f"psi_{s!r}" for s in args.s]
        out = [[r[k] for k in header if not k.startswith("psi_")] + list(r["psi"].values()) for r in rows]
        return _csv_text(args, header, out)
    if len(rows) == 1:
        return json.dumps({**rows[0], "command": args.command, "config": _config(args)}, sort_keys=True)
    return json.dumps(_with_header(args, {"rows": rows}), sort_keys=True)


def cmd_sweep(args) -> str:
    rows = []
    for n in _n_values(args):
        rows.append(sweep_row(args.ell, args.x, n, _distribution(args.ell, n, args.x)))
    if args.format == "json":
        return json.dumps(_with_header(args, {"rows": rows}), sort_keys=True)
    return "# config: " + json.dumps(_config(args), sort_keys=True) + "\n" + sweep_csv(rows)


def cmd_sample(args) -> str:
    n = _need_n(args)
    if n < 1 or args.samples < 1:
        raise UsageError("need --n >= 1 and --samples >= 1")
    draws = feller_samples(n, float(args.x), args.samples, args.seed)
    if args.format == "json":
        return json.dumps(_with_header(args, {"prng": "PCG64", "samples": draws.tolist()}), sort_keys=True)
    head = "# config: " + json.dumps(_config(args), sort_keys=True) + "\n"
    return head + "\n".join(str(int(v)) for v in draws)


def _rows_output(args, rows) -> str:
    if args.format == "csv":
        return _csv_text(args, list(rows[0]), ([r[k] for k in rows[0]] for r in rows))
    return json.dumps(_with_header(args, {"ell": args.ell, "x": str(args.x), "rows": rows}), sort_keys=True)


COMMANDS = {
    "counts": cmd_counts,
    "oracle": cmd_oracle,
    "zeval": cmd_zeval,
    "saddle": cmd_saddle,
    "contour": cmd_contour,
    "clt": cmd_clt,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
}


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    """Parse ``argv``, run the subcommand and write its document; return the exit code."""
    parser = build_parser()
    stdout = stdout if stdout is not None else sys.stdout
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.tol is None and args.command != "zeval":
        args.tol = DEFAULT_TOL
    try:
        text = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"orbitcount: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError) as exc:
        print(f"orbitcount: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as exc:
        print(f"orbitcount: computation failed: {exc}", file=sys.stderr)
        return 1
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
