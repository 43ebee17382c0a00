"""Verification campaigns over grids of partitions and exponents, plus report I/O."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .backend import EXACT, FLOAT, format_scalar, get_backend, is_integral, parse_scalar
from .explore import (
    GeneratorConfig,
    SearchResult,
    derive_seed,
    make_rng,
    random_q_decreasing,
    violating_function,
)
from .inequalities import TWO_FUNCTION_IDS, InequalityId, verify
from .lattice import LatticeFunction, make_partition

CSV_COLUMNS = (
    "inequality_id", "q", "n", "b", "p", "s", "t", "r",
    "seed", "backend", "lhs", "rhs", "ratio", "margin", "holds",
)
AGREEMENT_TOL = 1e-10


class ConfigError(ValueError):
    """Invalid campaign configuration (CLI exit status 2)."""


@dataclass
class CampaignConfig:
    inequalities: List[InequalityId] = field(
        default_factory=lambda: [InequalityId.OpialGeneral]
    )
    q: List[Fraction] = field(default_factory=lambda: [Fraction(1, 2)])
    n: List[int] = field(default_factory=lambda: [8])
    b: Fraction = Fraction(1)
    p: List[Fraction] = field(default_factory=lambda: [Fraction(1)])
    s: List[Fraction] = field(default_factory=lambda: [Fraction(1)])
    t: List[Fraction] = field(default_factory=lambda: [Fraction(1)])
    r: List[Fraction] = field(default_factory=lambda: [Fraction(1)])
    trials: int = 100
    seed: int = 0
    backend: str = "float"
    tol: Optional[float] = None
    unchecked: bool = False
    drop: Optional[str] = None
    distribution: str = "uniform01"
    zero_fraction: float = 0.0
    budget: int = 10_000
    workers: int = 1

    def __post_init__(self):
        self.inequalities = [InequalityId(i) for i in self.inequalities]
        self.q = [Fraction(x) for x in self.q]
        self.b = Fraction(self.b)
        for name in "pstr":
            setattr(self, name, [Fraction(x) for x in getattr(self, name)])

    def validate(self) -> None:
        if not self.inequalities:
            raise ConfigError("no inequality selected")
        if not self.q or any(not 0 < q < 1 for q in self.q):
            raise ConfigError(f"every q must lie in (0, 1), got {[str(q) for q in self.q]}")
        if not self.n or any(int(n) != n or n < 1 for n in self.n):
            raise ConfigError("every n must be a positive integer")
        if not self.b > 0:
            raise ConfigError("b must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.backend not in ("float", "exact", "both"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if any(p < 0 for p in self.p):
            raise ConfigError("p must be nonnegative")
        if any(x <= 0 for x in self.s + self.t + self.r):
            raise ConfigError("s, t, r must be positive")
        if self.drop not in (None, "boundary", "monotonicity"):
            raise ConfigError(f"unknown hypothesis to drop: {self.drop!r}")
        if self.budget < 1:
            raise ConfigError("budget must be at least 1")
        try:
            GeneratorConfig(self.seed, self.distribution, zero_fraction=self.zero_fraction)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.backend != "float":
            for iid in self.inequalities:
                for params in self.param_grid(iid):
                    bad = [k for k, v in params.items() if not is_integral(v)]
                    if bad:
                        raise ConfigError(
                            f"exact backend needs integer exponents; {iid} has "
                            + ", ".join(f"{k}={params[k]}" for k in bad)
                        )

    def param_grid(self, iid: InequalityId) -> List[Dict[str, Fraction]]:
        if iid in (InequalityId.OpialGeneral, InequalityId.HolderStep):
            return [{"p": p} for p in self.p]
        if iid is InequalityId.YoungPair:
            return [{"s": s, "t": t} for s in self.s for t in self.t]
        if iid is InequalityId.Wirtinger:
            return [{"r": r} for r in self.r]
        return [{}]

    def cells(self) -> List[Tuple[InequalityId, Fraction, int, Dict[str, Fraction]]]:
        return [
            (iid, q, int(n), params)
            for iid in self.inequalities
            for q in self.q
            for n in self.n
            for params in self.param_grid(iid)
        ]

    def backends(self) -> List[str]:
        return ["float", "exact"] if self.backend == "both" else [self.backend]

    def to_json(self) -> dict:
        return {
            "inequalities": [str(i) for i in self.inequalities],
            "q": [str(x) for x in self.q],
            "n": [int(x) for x in self.n],
            "b": str(self.b),
            **{name: [str(x) for x in getattr(self, name)] for name in "pstr"},
            "trials": self.trials,
            "seed": self.seed,
            "backend": self.backend,
            "tol": self.tol,
            "unchecked": self.unchecked,
            "drop": self.drop,
            "distribution": self.distribution,
            "zero_fraction": self.zero_fraction,
        }


def _exponent_for(backend: str, v: Fraction):
    return int(v) if backend == "exact" else float(v)


def encode_record(
    iid: InequalityId, report, F: LatticeFunction, G: Optional[LatticeFunction], **extra
) -> dict:
    part = F.partition
    rec = {
        "inequality_id": str(iid),
        "params": {k: format_scalar(v) for k, v in report.params.items()},
        "q": format_scalar(part.q),
        "n": part.n,
        "b": format_scalar(part.b),
        **extra,
        "backend": report.backend,
        "lhs": format_scalar(report.lhs),
        "rhs": format_scalar(report.rhs),
        "ratio": format_scalar(report.ratio),
        "margin": format_scalar(report.margin),
        "holds": report.holds,
        "values": [format_scalar(v) for v in F.values],
    }
    if G is not None:
        rec["values_g"] = [format_scalar(v) for v in G.values]
    return rec


def _run_cell(task) -> List[dict]:
    cfg, ci, (iid, q, n, params) = task
    gen_unchecked = cfg.unchecked or cfg.drop is not None
    parts = {
        "float": make_partition(float(q), float(cfg.b), n, FLOAT),
        "exact": make_partition(q, cfg.b, n, EXACT),
    }
    two = iid in TWO_FUNCTION_IDS
    records = []
    for trial in range(cfg.trials):
        seed = derive_seed(cfg.seed, ci, trial)
        gcfg = GeneratorConfig(seed, cfg.distribution, zero_fraction=cfg.zero_fraction)
        rng = make_rng(seed)
        if cfg.drop is None:
            F = random_q_decreasing(parts["float"], gcfg, rng)
            G = random_q_decreasing(parts["float"], gcfg, rng) if two else None
        else:
            F = violating_function(parts["float"], gcfg, cfg.drop, rng)
            G = violating_function(parts["float"], gcfg, cfg.drop, rng) if two else None
        for name in cfg.backends():
            Fb = F.on(parts[name])
            Gb = G.on(parts[name]) if G is not None else None
            bparams = {k: _exponent_for(name, v) for k, v in params.items()}
            report = verify(iid, Fb, Gb, bparams, unchecked=gen_unchecked, tol=cfg.tol)
            records.append(
                encode_record(
                    iid, report, Fb, Gb, seed=seed, cell=ci, trial=trial, route=name
                )
            )
    return records


def run_campaign(cfg: CampaignConfig) -> Tuple[List[dict], dict]:
    """Run every ``cell x trial`` instance; records come back in cell, trial order."""
    cfg.validate()
    tasks = [(cfg, ci, cell) for ci, cell in enumerate(cfg.cells())]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(_run_cell, tasks))
    else:
        chunks = [_run_cell(t) for t in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    return records, summarize(records, cfg.backend == "both")


def _rel_diff(float_rec: dict, exact_rec: dict, side: str) -> float:
    ff = Fraction(parse_scalar(float_rec[side], float_rec["backend"]))
    fe = Fraction(parse_scalar(exact_rec[side], exact_rec["backend"]))
    if fe == 0:
        return float(abs(ff))
    return float(abs(ff - fe) / abs(fe))


def summarize(records: Sequence[dict], cross_check: bool = False) -> dict:
    cells: Dict[Tuple[int, str], dict] = {}
    for rec in records:
        key = (rec["cell"], rec["route"])
        backend = rec["backend"]
        ratio = parse_scalar(rec["ratio"], backend)
        margin = parse_scalar(rec["margin"], backend)
        c = cells.get(key)
        if c is None:
            c = cells[key] = {
                "cell": rec["cell"],
                "inequality_id": rec["inequality_id"],
                "params": rec["params"],
                "q": rec["q"],
                "n": rec["n"],
                "backend": rec["route"],
                "count": 0,
                "failures": 0,
                "_max_ratio": ratio,
                "_min_margin": margin,
            }
        c["count"] += 1
        c["failures"] += 0 if rec["holds"] else 1
        c["_max_ratio"] = max(c["_max_ratio"], ratio)
        c["_min_margin"] = min(c["_min_margin"], margin)
    cell_rows = []
    for c in cells.values():
        c["max_ratio"] = format_scalar(c.pop("_max_ratio"))
        c["min_margin"] = format_scalar(c.pop("_min_margin"))
        cell_rows.append(c)
    failures = sum(1 for rec in records if not rec["holds"])
    summary = {
        "instances": len(records),
        "failures": failures,
        "all_hold": failures == 0,
        "cells": cell_rows,
    }
    if cross_check:
        summary["backend_agreement"] = cross_check_backends(records)
    return summary


def cross_check_backends(records: Sequence[dict]) -> dict:
    """Relative float/exact disagreement of paired records (same cell and trial)."""
    by_key: Dict[Tuple[int, int], Dict[str, dict]] = {}
    for rec in records:
        by_key.setdefault((rec["cell"], rec["trial"]), {})[rec["route"]] = rec
    worst = 0.0
    flagged = []
    for key, pair in by_key.items():
        if "float" not in pair or "exact" not in pair:
            continue
        d = max(
            _rel_diff(pair["float"], pair["exact"], side) for side in ("lhs", "rhs")
        )
        worst = max(worst, d)
        if d > AGREEMENT_TOL:
            flagged.append({"cell": key[0], "trial": key[1], "rel_diff": d})
    return {
        "tolerance": AGREEMENT_TOL,
        "max_rel_diff": worst,
        "agree": not flagged,
        "flagged": flagged,
    }


def decode_instance(rec: dict):
    """Rebuild ``(F, G, params)`` from a report record.

    Instances are rebuilt in the backend that was requested (``route``), so
    a float instance that overflowed takes the same exact fallback again.
    """
    backend = get_backend(rec.get("route", rec["backend"]))
    part = make_partition(
        parse_scalar(rec["q"], backend), parse_scalar(rec["b"], backend), rec["n"], backend
    )
    F = LatticeFunction(part, tuple(parse_scalar(v, backend) for v in rec["values"]))
    G = None
    if "values_g" in rec:
        G = LatticeFunction(part, tuple(parse_scalar(v, backend) for v in rec["values_g"]))
    params = {k: parse_scalar(v, backend) for k, v in rec["params"].items()}
    return F, G, params


def replay(report: dict) -> List[dict]:
    """Re-verify every record; returns the records whose sides differ."""
    config = report.get("config", {})
    unchecked = bool(config.get("unchecked")) or config.get("drop") is not None
    tol = config.get("tol")
    mismatches = []
    for rec in report["records"]:
        F, G, params = decode_instance(rec)
        rep = verify(rec["inequality_id"], F, G, params, unchecked=unchecked, tol=tol)
        if (format_scalar(rep.lhs), format_scalar(rep.rhs)) != (rec["lhs"], rec["rhs"]):
            mismatches.append(rec)
    return mismatches


def dump_json(config: dict, records: Sequence[dict], summary: dict) -> str:
    return json.dumps({"config": config, "records": list(records), "summary": summary}, indent=1)


def dump_csv(records: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        params = rec["params"]
        w.writerow(
            [
                rec["inequality_id"], rec["q"], rec["n"], rec["b"],
                params.get("p", ""), params.get("s", ""), params.get("t", ""),
                params.get("r", ""), rec["seed"], rec["backend"], rec["lhs"],
                rec["rhs"], rec["ratio"], rec["margin"], str(rec["holds"]).lower(),
            ]
        )
    return buf.getvalue()


def encode_search(result: SearchResult) -> dict:
    F = result.argmax_function
    out = {
        "inequality_id": str(result.inequality_id),
        "best_ratio": format_scalar(result.best_ratio),
        "best_params": {k: format_scalar(v) for k, v in result.best_params.items()},
        "evaluations": result.evaluations,
        "trajectory": [[i, format_scalar(r)] for i, r in result.trajectory],
    }
    if F is not None:
        out["partition"] = {
            "q": format_scalar(F.partition.q),
            "n": F.partition.n,
            "b": format_scalar(F.partition.b),
            "backend": F.backend.name,
        }
        out["values"] = [format_scalar(v) for v in F.values]
    if result.second_function is not None:
        out["values_g"] = [format_scalar(v) for v in result.second_function.values]
    if result.best_report is not None:
        rep = result.best_report
        out["lhs"] = format_scalar(rep.lhs)
        out["rhs"] = format_scalar(rep.rhs)
        out["margin"] = format_scalar(rep.margin)
    return out

