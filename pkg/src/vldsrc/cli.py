"""Command-line front end.

Every subcommand emits JSON on stdout (CSV with ``--out`` for sweeps), so
outputs can be piped into files and re-parsed.  Exit codes: 0 success, 2
input/validation problem, 3 enumeration budget exceeded, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

from .asymptotics import exact_dispersion_mean, residual_scan, second_order
from .backend import BACKEND
from .coding import (
    build_code,
    flawed_procedure_trace,
    lstar,
    one_shot_bounds,
    simulate_code,
)
from .cutoff import cond_cutoff_entropy, uncond_cutoff_entropy
from .errors import BudgetExceededError, InvariantError, ValidationError
from .fixtures import FIXTURE_NAMES, FIXTURES, fixture
from .guessing import (
    bracket_check,
    build_strategy,
    evaluate_strategy,
    simulate_guessing,
)
from .sources import dump_source, load_source, measures

_SCAN_COLUMNS = (
    "n",
    "eps",
    "criterion",
    "exact",
    "first_order",
    "dispersion_term",
    "approx",
    "residual",
    "residual_per_log_n",
    "residual_per_sqrt_n",
)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {obj!r}")


def _emit(document) -> None:
    json.dump(document, sys.stdout, indent=2, default=_json_default)
    sys.stdout.write("\n")


def _load_cli_source(spec: str):
    if spec in FIXTURES:
        return fixture(spec)
    path = Path(spec)
    if path.exists():
        return load_source(path.read_text())
    raise ValidationError(
        f"{spec!r} is neither a fixture name ({', '.join(FIXTURE_NAMES)}) nor a file",
        "source",
    )


def _parse_n_spec(text: str) -> list[int]:
    """Blocklength list: '8', '4,6,8', or a doubling range 'A:B'."""
    text = text.strip()
    try:
        if ":" in text:
            lo_s, hi_s = text.split(":", 1)
            lo, hi = int(lo_s), int(hi_s)
            if lo < 1 or hi < lo:
                raise ValueError
            out = []
            n = lo
            while n <= hi:
                out.append(n)
                n *= 2
            return out
        if "," in text:
            return [int(part) for part in text.split(",")]
        return [int(text)]
    except ValueError:
        raise ValidationError(
            f"bad blocklength spec {text!r}; use N, N1,N2,.. or A:B", "n"
        ) from None


def _announce_types(src, n: int) -> None:
    if n > 1:
        m = len(src.y_alphabet)
        count = math.comb(n + m - 1, m - 1)
        print(f"side-information types at n={n}: {count}", file=sys.stderr)


def _cmd_measures(args) -> None:
    src = _load_cli_source(args.source)
    ms = measures(src)
    _emit(
        {
            "H": ms.H,
            "V_c": ms.V_c,
            "V_u": ms.V_u,
            "T_u": ms.T_u,
            "per_y": {
                str(y): {"H": h, "V": v, "T": t} for y, (h, v, t) in ms.per_y.items()
            },
        }
    )


def _cmd_cutoff_entropy(args) -> None:
    src = _load_cli_source(args.source)
    _announce_types(src, args.n)
    out = {"eps": args.eps, "n": args.n}
    if args.variant in ("cond", "both"):
        out["cond"] = cond_cutoff_entropy(src, args.eps, args.n, max_types=args.max_types)
    if args.variant in ("uncond", "both"):
        out["uncond"] = uncond_cutoff_entropy(src, args.eps, args.n, max_types=args.max_types)
    _emit(out)


def _cmd_lstar(args) -> None:
    src = _load_cli_source(args.source)
    _announce_types(src, args.n)
    value = lstar(src, args.n, args.eps, args.criterion, max_types=args.max_types)
    _emit({"exact": value})


def _cmd_bounds(args) -> None:
    src = _load_cli_source(args.source)
    _announce_types(src, args.n)
    b = one_shot_bounds(src, args.n, args.eps, args.criterion, max_types=args.max_types)
    _emit({"lower": b.lower, "exact": b.exact, "upper": b.upper})


def _plan_document(plan) -> dict:
    return {
        "criterion": plan.criterion,
        "eps": plan.eps,
        "n": plan.n,
        "rows": [
            {
                "y": str(row.y),
                "kappa": row.kappa,
                "keep_prob": row.keep_prob,
                "guess_order": [str(x) for x in row.perm],
            }
            for row in plan.rows
        ],
        "analytic_length": plan.analytic_length,
        "analytic_error": plan.analytic_error,
    }


def _cmd_build_code(args) -> None:
    src = _load_cli_source(args.source)
    plan = build_code(src, args.n, args.eps, args.criterion)
    _emit(_plan_document(plan))


def _cmd_simulate(args) -> None:
    src = _load_cli_source(args.source)
    plan = build_code(src, args.n, args.eps, args.criterion)
    result = simulate_code(plan, args.trials, args.seed, workers=args.workers)
    doc = _plan_document(plan)
    doc["simulation"] = result.as_dict()
    _emit(doc)


def _cmd_guess(args) -> None:
    src = _load_cli_source(args.source)
    _announce_types(src, args.n)
    strategy = build_strategy(src, args.eps, args.criterion, args.cost)
    value = evaluate_strategy(strategy, src, args.n, max_types=args.max_types)
    report = bracket_check(src, args.n, args.eps, args.criterion, args.cost)
    doc = {
        "criterion": args.criterion,
        "eps": args.eps,
        "cost": args.cost,
        "n": args.n,
        "expected_log_guess": value.expected_log_guess,
        "error_prob": value.error_prob,
        "lstar": report.lstar,
        "bracket_slack": report.bound,
        "bracket_holds": report.holds,
    }
    if args.simulate:
        sim = simulate_guessing(
            strategy, src, args.n, args.simulate, args.seed, workers=args.workers
        )
        doc["simulation"] = sim.as_dict()
    _emit(doc)


def _cmd_second_order(args) -> None:
    src = _load_cli_source(args.source)
    est = second_order(src, args.n, args.eps, args.criterion)
    doc = est.as_dict()
    doc["exact_dispersion_mean"] = exact_dispersion_mean(src, args.n, args.max_types)
    _emit(doc)


def _cmd_scan(args) -> None:
    src = _load_cli_source(args.source)
    n_list = _parse_n_spec(args.n)
    rows = []
    for eps in args.eps:
        for criterion in args.criterion:
            report = residual_scan(
                src,
                eps,
                criterion,
                n_list,
                max_types=args.max_types,
                flag_threshold=args.flag_threshold,
                workers=args.workers,
            )
            rows.extend(report.rows)
            for n in report.flagged:
                print(
                    f"flagged: |residual|/log2(n) above {args.flag_threshold} "
                    f"at n={n} (eps={eps}, {criterion})",
                    file=sys.stderr,
                )
    rows.sort(key=lambda r: (r.n, r.eps, r.criterion))
    records = [
        {col: ("" if getattr(row, col) is None else getattr(row, col)) for col in _SCAN_COLUMNS}
        for row in rows
    ]
    if args.out:
        with open(args.out, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=_SCAN_COLUMNS)
            writer.writeheader()
            writer.writerows(records)
        print(f"wrote {len(records)} rows to {args.out}", file=sys.stderr)
    else:
        _emit(records)


def _cmd_fixtures(args) -> None:
    if args.name is None:
        _emit({"fixtures": list(FIXTURE_NAMES)})
        return
    if args.name == "zeta-geometric":
        src = fixture(args.name, y_max=args.y_max, tail_tol=args.tail_tol)
    else:
        src = fixture(args.name)
    _emit(dump_source(src))


def _cmd_flawed_trace(args) -> None:
    src = _load_cli_source(args.source) if args.source else fixture("skewed-triple")
    trace = flawed_procedure_trace(src, args.eps)
    _emit(
        {
            "eps": trace.eps,
            "steps": [asdict(step) for step in trace.steps],
            "exceeds_eps": trace.exceeds_eps,
            "optimal_mean_length": trace.optimal_mean_length,
        }
    )


def _add_common(parser, *, n_default=1, with_criterion=True) -> None:
    parser.add_argument("--source", required=True, help="fixture name or JSON file path")
    parser.add_argument("--eps", default="0", help="error budget, 'p/q' or decimal")
    parser.add_argument("--n", type=int, default=n_default, help="blocklength")
    parser.add_argument(
        "--max-types", type=int, default=None, help="type-enumeration budget override"
    )
    if with_criterion:
        parser.add_argument("--criterion", choices=("max", "avg"), required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vldsrc",
        description="Exact finite-blocklength limits of variable-length "
        "compression with side information.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s (backend: {BACKEND})"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measures", help="entropy and information-variance summary")
    p.add_argument("--source", required=True)
    p.set_defaults(func=_cmd_measures)

    p = sub.add_parser("cutoff-entropy", help="expected cutoff of the information density")
    _add_common(p, with_criterion=False)
    p.add_argument("--variant", choices=("cond", "uncond", "both"), default="both")
    p.set_defaults(func=_cmd_cutoff_entropy)

    p = sub.add_parser("lstar", help="exact optimal expected codeword length")
    _add_common(p)
    p.set_defaults(func=_cmd_lstar)

    p = sub.add_parser("bounds", help="one-shot sandwich around the optimal length")
    _add_common(p)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("build-code", help="construct the optimal code plan")
    _add_common(p)
    p.set_defaults(func=_cmd_build_code)

    p = sub.add_parser("simulate", help="Monte Carlo run of the optimal code")
    _add_common(p)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("guess", help="giving-up guessing strategy and bracket")
    _add_common(p)
    p.add_argument("--cost", required=True, help="failure cost, positive non-integer")
    p.add_argument(
        "--simulate", type=int, default=0, metavar="TRIALS", help="also simulate"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_guess)

    p = sub.add_parser("second-order", help="two-term length approximation")
    _add_common(p)
    p.set_defaults(func=_cmd_second_order)

    p = sub.add_parser("scan", help="residual sweep over blocklengths")
    p.add_argument("--source", required=True)
    p.add_argument("--n", default="4:64", help="N, N1,N2,.., or doubling range A:B")
    p.add_argument("--eps", nargs="+", default=["0.1"])
    p.add_argument("--criterion", nargs="+", choices=("max", "avg"), default=["avg", "max"])
    p.add_argument("--out", default=None, help="CSV output path (JSON to stdout if absent)")
    p.add_argument("--flag-threshold", type=float, default=None)
    p.add_argument("--max-types", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("fixtures", help="list or emit built-in sources")
    p.add_argument("--name", choices=FIXTURE_NAMES, default=None)
    p.add_argument("--y-max", type=int, default=3)
    p.add_argument("--tail-tol", default="1/1000000000")
    p.set_defaults(func=_cmd_fixtures)

    p = sub.add_parser(
        "flawed-trace", help="replay of the plausible-but-suboptimal construction"
    )
    p.add_argument("--source", default=None, help="three-atom single-y source")
    p.add_argument("--eps", default="1/6")
    p.set_defaults(func=_cmd_flawed_trace)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except InvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
