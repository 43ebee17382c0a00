"""Command-line entry point: ``qopial {verify,search,eval,replay}``.

Exit status: 0 when every instance holds, 1 when some instance fails
(the report is still written), 2 on configuration or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from .backend import DomainError, _unbounded_int_digits, format_scalar, get_backend
from .campaign import (
    CampaignConfig,
    ConfigError,
    dump_csv,
    dump_json,
    encode_search,
    replay,
    run_campaign,
)
from .explore import GeneratorConfig, ratio_search
from .funcspec import FunctionSpecError, parse_function
from .inequalities import InequalityId
from .lattice import (
    jackson_integral_ab,
    make_partition,
    q_derivative_at,
    q_natural,
    restricted_integral,
    tabulate,
)

SEARCH_CEILING = 1 + 1e-12


def _split(values: Optional[Sequence[str]]) -> List[str]:
    out = []
    for v in values or []:
        out.extend(x for x in v.split(",") if x.strip())
    return [x.strip() for x in out]


def _fractions(values, default):
    items = _split(values)
    try:
        return [Fraction(x) for x in items] if items else default
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad number in {items}: {exc}") from exc


def _ints(values, default):
    items = _split(values)
    try:
        return [int(x) for x in items] if items else default
    except ValueError as exc:
        raise ConfigError(f"bad integer in {items}") from exc


def _inequalities(values, default):
    items = _split(values)
    if not items:
        return default
    if items == ["all"]:
        return list(InequalityId)
    try:
        return [InequalityId(x) for x in items]
    except ValueError as exc:
        raise ConfigError(
            f"{exc}; choose from {', '.join(i.value for i in InequalityId)}"
        ) from exc


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--inequality", action="append", metavar="ID",
                   help="inequality id (repeatable or comma-separated; 'all')")
    p.add_argument("--q", action="append", help="lattice base(s), 0 < q < 1")
    p.add_argument("--n", action="append", help="number(s) of subintervals")
    p.add_argument("--b", default="1", help="right endpoint (default 1)")
    p.add_argument("--p", action="append", help="Opial / Hoelder exponent(s)")
    p.add_argument("--s", action="append", help="Young exponent(s) s")
    p.add_argument("--t", action="append", help="Young exponent(s) t")
    p.add_argument("--r", action="append", help="Wirtinger exponent(s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--distribution", default="uniform01",
                   choices=["uniform01", "exponential", "heavy_tail"])
    p.add_argument("--zero-fraction", type=float, default=0.0)
    p.add_argument("--out", type=Path, help="report path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qopial", description="q-calculus Opial-type inequality verification"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a randomized verification campaign")
    _add_grid_flags(v)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--backend", default="float", choices=["float", "exact", "both"])
    v.add_argument("--tol", type=float, help="override the float tolerance")
    v.add_argument("--format", default="json", choices=["json", "csv"])
    v.add_argument("--unchecked", action="store_true",
                   help="skip hypothesis checks in the verifiers")
    v.add_argument("--drop", choices=["boundary", "monotonicity"],
                   help="generate inputs violating one hypothesis (implies --unchecked)")
    v.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("search", help="random-restart hill climbing on lhs/rhs")
    _add_grid_flags(s)
    s.add_argument("--budget", type=int, default=10_000)
    s.add_argument("--backend", default="float", choices=["float", "exact"])

    e = sub.add_parser("eval", help="evaluate a q-calculus operator")
    e.add_argument("op", choices=["qnatural", "derivative", "restricted", "jackson"])
    e.add_argument("--func", default="x", help='function spec, e.g. "1 + x^2" or "b - x"')
    e.add_argument("--q", default="1/2")
    e.add_argument("--b", default="1")
    e.add_argument("--a", default="0", help="left endpoint for jackson")
    e.add_argument("--n", type=int, default=1)
    e.add_argument("--j", type=int, default=0, help="lattice index for derivative")
    e.add_argument("--backend", default="float", choices=["float", "exact"])

    r = sub.add_parser("replay", help="re-verify every record of a JSON report")
    r.add_argument("report", type=Path)
    return parser


def _config_from(args) -> CampaignConfig:
    cfg = CampaignConfig(
        inequalities=_inequalities(args.inequality, [InequalityId.OpialGeneral]),
        q=_fractions(args.q, [Fraction(1, 2)]),
        n=_ints(args.n, [8]),
        b=_fractions([args.b], [Fraction(1)])[0],
        p=_fractions(args.p, [Fraction(1)]),
        s=_fractions(args.s, [Fraction(1)]),
        t=_fractions(args.t, [Fraction(1)]),
        r=_fractions(args.r, [Fraction(1)]),
        seed=args.seed,
        distribution=args.distribution,
        zero_fraction=args.zero_fraction,
        backend=args.backend,
    )
    if args.command == "verify":
        cfg.trials = args.trials
        cfg.tol = args.tol
        cfg.unchecked = args.unchecked
        cfg.drop = args.drop
        cfg.workers = args.workers
    else:
        cfg.budget = args.budget
    cfg.validate()
    return cfg


def _display(text: str) -> str:
    # full-precision strings live in the report; the table only needs a glance
    if "/" not in text:
        return text[:22]
    with _unbounded_int_digits():
        value = Fraction(text)
    try:
        return f"{float(value):.17g}"
    except OverflowError:
        return "-inf" if value < 0 else "inf"


def _print_summary(summary: dict, out=None) -> None:
    out = out or sys.stdout
    header = f"{'cell':>4}  {'inequality':<13}{'params':<14}{'q':<8}{'n':>4}  {'backend':<7}" \
             f"{'count':>6}{'fail':>5}  {'max ratio':<24}{'min margin'}"
    print(header, file=out)
    for c in summary["cells"]:
        params = ",".join(f"{k}={v}" for k, v in c["params"].items()) or "-"
        print(
            f"{c['cell']:>4}  {c['inequality_id']:<13}{params:<14}{c['q']:<8}{c['n']:>4}  "
            f"{c['backend']:<7}{c['count']:>6}{c['failures']:>5}  "
            f"{_display(c['max_ratio']):<24}{_display(c['min_margin'])}",
            file=out,
        )
    print(f"instances={summary['instances']} failures={summary['failures']}", file=out)
    agreement = summary.get("backend_agreement")
    if agreement:
        flag = "ok" if agreement["agree"] else f"FLAGGED x{len(agreement['flagged'])}"
        print(
            f"float/exact agreement: max rel diff {agreement['max_rel_diff']:.3g} "
            f"(tol {agreement['tolerance']:g}) {flag}",
            file=out,
        )


def cmd_verify(args) -> int:
    cfg = _config_from(args)
    records, summary = run_campaign(cfg)
    if args.out is not None:
        if args.format == "csv":
            args.out.write_text(dump_csv(records))
        else:
            args.out.write_text(dump_json(cfg.to_json(), records, summary))
    _print_summary(summary)
    return 0 if summary["all_hold"] else 1


def cmd_search(args) -> int:
    cfg = _config_from(args)
    if len(cfg.inequalities) != 1:
        raise ConfigError("search takes exactly one --inequality")
    iid = cfg.inequalities[0]
    backend = get_backend(args.backend)
    cast = (lambda x: x) if backend.exact else float
    grid = [make_partition(cast(q), cast(cfg.b), n, backend) for q in cfg.q for n in cfg.n]
    params = [
        {k: (int(v) if backend.exact else float(v)) for k, v in pg.items()}
        for pg in cfg.param_grid(iid)
    ]
    gen = GeneratorConfig(cfg.seed, cfg.distribution, zero_fraction=cfg.zero_fraction)
    result = ratio_search(iid, grid, params, cfg.budget, gen)
    payload = {"config": {**cfg.to_json(), "budget": cfg.budget}, "result": encode_search(result)}
    if args.out is not None:
        args.out.write_text(json.dumps(payload, indent=1))
    print(f"{iid} best ratio {format_scalar(result.best_ratio)} "
          f"after {result.evaluations} evaluations (params {result.best_params})")
    return 0 if result.best_ratio <= SEARCH_CEILING else 1


def cmd_eval(args) -> int:
    backend = get_backend(args.backend)
    q = backend.coerce(args.q)
    b = backend.coerce(args.b)
    if args.op == "qnatural":
        value = q_natural(args.n, q)
    else:
        f = parse_function(args.func, b)
        if args.op == "derivative":
            x = b * q**args.j
            value = q_derivative_at(f, x, q)
        elif args.op == "restricted":
            value = restricted_integral(tabulate(f, make_partition(q, b, args.n, backend)))
        else:
            value = jackson_integral_ab(f, float(Fraction(args.a)), float(b), float(q))
    print(format_scalar(value))
    return 0


def cmd_replay(args) -> int:
    report = json.loads(args.report.read_text())
    bad = replay(report)
    print(f"replayed {len(report['records'])} records, {len(bad)} mismatches")
    return 0 if not bad else 1


COMMANDS = {"verify": cmd_verify, "search": cmd_search, "eval": cmd_eval, "replay": cmd_replay}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError, FunctionSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
