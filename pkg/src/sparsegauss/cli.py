"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 precision-policy violation,
4 internal oracle disagreement.  Every command is deterministic given its
flags (plus seed where applicable); JSON output is key-sorted so repeated
runs are byte-identical.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from fractions import Fraction

from . import fullgrid, fourier_model, grids, sigma_oracle, sparse_combination
from .numerics import default_bits, format_paper_sci, make_context
from .sparse_combination import PrecisionPolicyError
from .sigma_oracle import OracleDisagreement

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECISION = 3
EXIT_ORACLE = 4

ENV_BITS = "SPARSEGAUSS_BITS"

TABLE_PRESETS = {
    "table1": (2, [(1, 1), (500, 700)], [40, 80, 160, 320, 640]),
    "table2": (3, [(1, 1, 1), (500, 700, 900)], [40, 80, 160, 320, 640]),
}


class UsageError(ValueError):
    pass


def _parse_int_list(text: str) -> list:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from exc


def _parse_range(text: str) -> range:
    try:
        lo, hi = text.split(":")
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise UsageError(f"expected a range like 4:10, got {text!r}") from exc
    if hi < lo:
        raise UsageError("range end below start")
    return range(lo, hi + 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsegauss",
        description="Sparse-grid Gaussian convolution error coefficients and oracles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("csv", "json", "paper"), default=None)
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--bits", type=int, default=None)
        p.add_argument("--force", action="store_true", default=None,
                       help="allow precision below the default rule")
        p.add_argument("--config", default=None, help="key=value file mirroring flags")

    p = sub.add_parser("coeff", help="one sparse error coefficient")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("-n", "--level", type=int, required=True)
    p.add_argument("--k", required=True, help="comma-separated wave vector")
    common(p)

    p = sub.add_parser("table", help="error-coefficient table")
    p.add_argument("--preset", choices=tuple(TABLE_PRESETS))
    p.add_argument("--dim", type=int)
    p.add_argument("--k", action="append", help="comma-separated wave vector (repeatable)")
    p.add_argument("--n-list", dest="n_list", help="comma-separated levels")
    common(p)

    p = sub.add_parser("converge", help="convergence study")
    p.add_argument("--mode", choices=("full", "sparse"), required=True)
    p.add_argument("--family",
                   choices=("product_cosine", "trig_monomial_pair",
                            "beta_decay_random", "constant"),
                   required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--n-range", dest="n_range", required=True)
    p.add_argument("--k0", default=None, help="mode for trig_monomial_pair")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=int, default=None)
    common(p)

    p = sub.add_parser("sigma", help="exact composition power sums")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("-p", "--power", type=int, required=True)
    p.add_argument("-m", "--total", type=int, required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--check", choices=("brute", "recurrence", "closed", "all"),
                   default="brute")
    p.add_argument("--decimal", action="store_true")
    common(p)

    p = sub.add_parser("grid", help="full/sparse grid inspection")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("-n", "--level", type=int, required=True)
    p.add_argument("--stats", action="store_true")
    p.add_argument("--list", dest="list_nodes", action="store_true")
    common(p)
    return parser


def _apply_config(args) -> None:
    """Merge key=value config entries into unset flags (flags win)."""
    path = getattr(args, "config", None)
    if not path:
        return
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"bad config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if not hasattr(args, key):
            raise UsageError(f"unknown config key: {key}")
        if getattr(args, key) is None:
            current_type = {"bits": int, "force": _parse_bool}.get(key, str)
            setattr(args, key, current_type(value))


def _parse_bool(text):
    if text.lower() in ("1", "true", "yes"):
        return True
    if text.lower() in ("0", "false", "no"):
        return False
    raise UsageError(f"bad boolean: {text!r}")


def _explicit_bits(args) -> int | None:
    """Precision override from --bits or the environment, if any."""
    if args.bits is not None:
        return args.bits
    env = os.environ.get(ENV_BITS)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise UsageError(f"bad {ENV_BITS}: {env!r}") from exc
    return None


def _emit(text: str, args) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _result_record(res) -> dict:
    record = {
        "n": res.n,
        "d": res.d,
        "k": list(res.k),
        "value": res.value_str(),
        "asymptotic": res.asymptotic_str(),
        "ratio": float(res.ratio) if res.ratio is not None else None,
        "bits": res.bits,
    }
    if not res.reliable:
        record["reliable"] = False
    return record


def cmd_coeff(args) -> int:
    k = _parse_int_list(args.k)
    if args.dim < 2:
        raise UsageError("coeff needs --dim >= 2")
    if len(k) != args.dim:
        raise UsageError("--k length must equal --dim")
    override = _explicit_bits(args)
    ctx = make_context(override) if override is not None else None
    res = sparse_combination.sparse_error_coeff(
        args.level, args.dim, k, ctx, force=bool(args.force)
    )
    fmt = args.format or "json"
    if fmt == "json":
        text = json.dumps(_result_record(res), sort_keys=True) + "\n"
    elif fmt == "paper":
        text = f"{res.value_str()}  {res.asymptotic_str()}\n"
    else:
        text = "n,d,k,value,asymptotic,ratio,bits\n"
        ratio = f"{float(res.ratio)!r}" if res.ratio is not None else ""
        text += "%d,%d,%s,%s,%s,%s,%d\n" % (
            res.n, res.d, " ".join(map(str, res.k)),
            res.value_str(), res.asymptotic_str(), ratio, res.bits,
        )
    _emit(text, args)
    return EXIT_OK


def cmd_table(args) -> int:
    if args.preset:
        d, k_list, n_list = TABLE_PRESETS[args.preset]
    else:
        if not (args.dim and args.k and args.n_list):
            raise UsageError("table needs --preset or (--dim, --k, --n-list)")
        d = args.dim
        k_list = [tuple(_parse_int_list(spec)) for spec in args.k]
        n_list = _parse_int_list(args.n_list)
        if any(len(k) != d for k in k_list):
            raise UsageError("--k length must equal --dim")
    cells = sparse_combination.reproduce_table(
        d, k_list, n_list, bits=_explicit_bits(args), force=bool(args.force)
    )
    fmt = args.format or "csv"
    if fmt == "json":
        text = json.dumps([_result_record(c.result) for c in cells], sort_keys=True) + "\n"
    elif fmt == "paper":
        lines = ["n  " + "  ".join(f"E{list(k)}  formula" for k in k_list)]
        for n in n_list:
            row = [str(n)]
            for k in k_list:
                cell = next(c for c in cells if c.n == n and c.k == tuple(k))
                row.append(cell.result.value_str())
                row.append(cell.result.asymptotic_str())
            lines.append("  ".join(row))
        text = "\n".join(lines) + "\n"
    else:
        lines = ["n,k,value,asymptotic"]
        for c in cells:
            lines.append("%d,%s,%s,%s" % (
                c.n, " ".join(map(str, c.k)),
                c.result.value_str(), c.result.asymptotic_str(),
            ))
        text = "\n".join(lines) + "\n"
    _emit(text, args)
    return EXIT_OK


def _build_family(args) -> fourier_model.PeriodicFunction:
    if args.family == "constant":
        k0 = (0,) * args.dim
        return fourier_model.PeriodicFunction(args.dim, {k0: 1.0}, real_valued=True)
    if args.family == "product_cosine":
        return fourier_model.make_test_function("product_cosine", args.dim)
    if args.family == "trig_monomial_pair":
        if not args.k0:
            raise UsageError("trig_monomial_pair needs --k0")
        return fourier_model.make_test_function(
            "trig_monomial_pair", args.dim, k0=tuple(_parse_int_list(args.k0))
        )
    if args.family == "beta_decay_random":
        if args.beta is None or args.K is None:
            raise UsageError("beta_decay_random needs --beta and --K")
        return fourier_model.make_test_function(
            "beta_decay_random", args.dim, beta=args.beta, K=args.K, seed=args.seed
        )
    raise UsageError(f"unknown family {args.family}")


def cmd_converge(args) -> int:
    try:
        f = _build_family(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    n_range = _parse_range(args.n_range)
    override = _explicit_bits(args)
    ctx = make_context(override if override is not None else 256)
    if args.mode == "full":
        points = fullgrid.order_study(f, n_range, ctx, resolution=args.resolution)
    else:
        if args.dim < 2:
            raise UsageError("sparse mode needs --dim >= 2")
        points = []
        previous = None
        for n in n_range:
            approx = sparse_combination.sparse_convolve(f, n, ctx)
            res = args.resolution if args.resolution is not None else \
                fullgrid.default_resolution(n)
            err = fullgrid.sup_error(f, approx, res, ctx)
            ratio = None
            if previous is not None and err > 0 and previous > 0:
                ratio = float(ctx.mp.log(previous / err) / ctx.mp.log(2))
            points.append(fullgrid.OrderPoint(n, err, ratio))
            previous = err
    fmt = args.format or "csv"
    if fmt == "json":
        records = [
            {
                "n": pt.n,
                "error": format_paper_sci(pt.error),
                "log2_ratio": pt.log2_ratio,
            }
            for pt in points
        ]
        text = json.dumps(records, sort_keys=True) + "\n"
    else:
        lines = ["n,error,log2_ratio"]
        for pt in points:
            ratio = "" if pt.log2_ratio is None else "%.6f" % pt.log2_ratio
            lines.append("%d,%s,%s" % (pt.n, format_paper_sci(pt.error), ratio))
        text = "\n".join(lines) + "\n"
    _emit(text, args)
    return EXIT_OK


def cmd_sigma(args) -> int:
    k = _parse_int_list(args.k)
    if args.total < args.dim:
        raise UsageError("sigma needs m >= d")
    if len(k) < args.dim:
        raise UsageError("--k must supply at least d components")
    routes = {}
    value = sigma_oracle.sigma_bruteforce(args.dim, args.power, args.total, k).value
    routes["bruteforce"] = value
    if args.check in ("recurrence", "all"):
        routes["recurrence"] = sigma_oracle.sigma_recurrence(
            args.dim, args.power, args.total, k
        ).value
    if args.check in ("closed", "all") and args.dim == 2 and args.power >= 1:
        routes["closed_d2"] = sigma_oracle.sigma_closed_d2(
            args.power, args.total, k
        ).value
    distinct = set(routes.values())
    if len(distinct) > 1:
        raise OracleDisagreement(f"sigma oracles disagree: {routes}")
    fmt = args.format or "csv"
    rendered = f"{value.numerator}/{value.denominator}" if value.denominator != 1 \
        else str(value.numerator)
    if fmt == "json":
        record = {
            "d": args.dim, "p": args.power, "m": args.total,
            "k": k[: args.dim], "value": rendered,
            "oracles": sorted(routes),
        }
        if args.decimal:
            record["decimal"] = float(value)
        text = json.dumps(record, sort_keys=True) + "\n"
    else:
        lines = [rendered]
        if args.decimal:
            lines.append("decimal: %r" % float(value))
        if len(routes) > 1:
            lines.append("oracles agree: " + ",".join(sorted(routes)))
        text = "\n".join(lines) + "\n"
    _emit(text, args)
    return EXIT_OK


def cmd_grid(args) -> int:
    if args.dim < 2:
        raise UsageError("grid needs --dim >= 2")
    if args.level < 1:
        raise UsageError("grid needs -n >= 1")
    if not args.stats and not args.list_nodes:
        raise UsageError("grid needs --stats or --list")
    out = []
    if args.stats:
        full = (2 ** args.level + 1) ** args.dim
        sparse_nodes = grids.sparse_union_nodes(args.level, args.dim)
        terms = grids.combination_terms(args.level, args.dim)
        ok = True
        full_axis = [Fraction(j, 2 ** args.level) for j in range(2 ** args.level + 1)]
        for x in itertools.product(full_axis, repeat=args.dim):
            mult = grids.signed_multiplicity(x, terms)
            expected = 1 if x in sparse_nodes else 0
            if mult != expected:
                ok = False
                break
        fmt = args.format or "csv"
        record = {
            "full_nodes": full,
            "sparse_nodes": len(sparse_nodes),
            "signed_multiplicity_ok": ok,
        }
        if fmt == "json":
            out.append(json.dumps(record, sort_keys=True))
        else:
            out.append("full_nodes,sparse_nodes,signed_multiplicity_ok")
            out.append("%d,%d,%s" % (full, len(sparse_nodes), str(ok).lower()))
    if args.list_nodes:
        nodes = sorted(grids.sparse_union_nodes(args.level, args.dim))
        out.append(",".join(f"x_{i+1}" for i in range(args.dim)))
        for node in nodes:
            out.append(",".join(f"{c.numerator}/{c.denominator}" for c in node))
    _emit("\n".join(out) + "\n", args)
    return EXIT_OK


COMMANDS = {
    "coeff": cmd_coeff,
    "table": cmd_table,
    "converge": cmd_converge,
    "sigma": cmd_sigma,
    "grid": cmd_grid,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        _apply_config(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionPolicyError as exc:
        print(f"precision policy: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except OracleDisagreement as exc:
        print(f"oracle disagreement: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
