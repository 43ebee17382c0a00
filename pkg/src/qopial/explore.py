"""Random q-monotone lattice functions and stochastic tightness search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .backend import DomainError, Scalar
from .inequalities import (
    TWO_FUNCTION_IDS,
    InequalityId,
    VerificationReport,
    verify,
)
from .lattice import LatticeFunction, QLatticePartition

DISTRIBUTIONS = ("uniform01", "exponential", "heavy_tail")
DYADIC_SCALE = 2**53
DROPPABLE = ("boundary", "monotonicity")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    distribution: str = "uniform01"
    mean: float = 1.0  # exponential
    alpha: float = 1.5  # heavy_tail (Lomax shape)
    zero_fraction: float = 0.0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise DomainError(f"unknown distribution {self.distribution!r}")
        if not 0 <= self.zero_fraction <= 1:
            raise DomainError("zero_fraction must lie in [0, 1]")
        if not (self.mean > 0 and self.alpha > 0):
            raise DomainError("distribution parameters must be positive")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for ``(seed, *keys)``; scheduling-independent."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1, np.uint64)[0])


def _dyadic(x: float) -> float:
    return math.floor(x * DYADIC_SCALE) / DYADIC_SCALE


def draw_increments(n: int, cfg: GeneratorConfig, rng: np.random.Generator) -> List[float]:
    """``n`` nonnegative increments on the ``k / 2^53`` grid."""
    if cfg.distribution == "uniform01":
        x = rng.random(n)
    elif cfg.distribution == "exponential":
        x = rng.exponential(cfg.mean, n)
    else:
        x = rng.pareto(cfg.alpha, n)
    x[rng.random(n) < cfg.zero_fraction] = 0.0
    return [_dyadic(float(v)) for v in x]


def from_increments(
    partition: QLatticePartition, increments: Sequence[float], start: float = 0.0
) -> LatticeFunction:
    values = [start]
    for d in increments:
        values.append(values[-1] + d)
    return LatticeFunction(partition, tuple(values))


def increments_of(F: LatticeFunction) -> List[float]:
    v = F.values
    return [float(v[j + 1] - v[j]) for j in range(F.partition.n)]


def random_q_decreasing(
    partition: QLatticePartition,
    cfg: GeneratorConfig,
    rng: Optional[np.random.Generator] = None,
) -> LatticeFunction:
    """Nonnegative increments from ``f(b) = 0``: q-decreasing by construction.

    Values are accumulated in double precision and handed to the
    partition's backend unchanged, so the float and exact versions of a
    draw are the same real numbers.
    """
    if rng is None:
        rng = make_rng(cfg.seed)
    return from_increments(partition, draw_increments(partition.n, cfg, rng))


def random_pair(
    partition: QLatticePartition,
    cfg: GeneratorConfig,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[LatticeFunction, LatticeFunction]:
    if rng is None:
        rng = make_rng(cfg.seed)
    return random_q_decreasing(partition, cfg, rng), random_q_decreasing(partition, cfg, rng)


def violating_function(
    partition: QLatticePartition,
    cfg: GeneratorConfig,
    drop: str,
    rng: Optional[np.random.Generator] = None,
) -> LatticeFunction:
    """A draw that breaks exactly one hypothesis.

    ``drop="boundary"`` keeps monotone increments but starts from a
    positive offset; ``drop="monotonicity"`` keeps ``f(b) = 0`` but gives
    the increments random signs (at least one negative when possible).
    """
    if drop not in DROPPABLE:
        raise DomainError(f"drop must be one of {DROPPABLE}, got {drop!r}")
    if rng is None:
        rng = make_rng(cfg.seed)
    inc = draw_increments(partition.n, cfg, rng)
    if drop == "boundary":
        offset = _dyadic((1.0 + sum(inc)) * 10 ** rng.uniform(0.0, 3.0))
        return from_increments(partition, inc, offset)
    signs = rng.choice([-1.0, 1.0], size=partition.n)
    nonzero = [j for j, d in enumerate(inc) if d > 0]
    if nonzero and all(signs[j] > 0 for j in nonzero):
        signs[nonzero[int(rng.integers(len(nonzero)))]] = -1.0
    return from_increments(partition, [s * d for s, d in zip(signs, inc)])


@dataclass
class SearchResult:
    inequality_id: InequalityId
    best_ratio: Scalar
    argmax_function: Optional[LatticeFunction]
    second_function: Optional[LatticeFunction] = None
    best_params: Dict[str, Scalar] = field(default_factory=dict)
    best_report: Optional[VerificationReport] = None
    evaluations: int = 0
    trajectory: List[Tuple[int, Scalar]] = field(default_factory=list)


class _Cell:
    """Hill climber state for one (partition, params) cell."""

    def __init__(self, iid, partition, params, two):
        self.iid = iid
        self.partition = partition
        self.params = params
        self.two = two

    def functions(self, delta: List[float]):
        n = self.partition.n
        F = from_increments(self.partition, delta[:n])
        G = from_increments(self.partition, delta[n:]) if self.two else None
        return F, G

    def evaluate(self, delta: List[float]) -> VerificationReport:
        F, G = self.functions(delta)
        return verify(self.iid, F, G, self.params, unchecked=True)


def _perturb(delta: List[float], j: int, rng: np.random.Generator) -> float:
    u = 2.0 ** rng.uniform(-1.0, 1.0)
    if delta[j] > 0:
        return _dyadic(delta[j] * u)
    # a zero increment cannot move multiplicatively; reseed it from the others
    ref = max(delta) if max(delta) > 0 else 1.0
    return _dyadic(0.5 * ref * u)


def ratio_search(
    inequality_id,
    partition_grid: Sequence[QLatticePartition],
    param_grid: Sequence[Dict[str, Scalar]],
    budget: int,
    cfg: GeneratorConfig,
    *,
    initial: Optional[Sequence[LatticeFunction]] = None,
    patience: Optional[int] = None,
) -> SearchResult:
    """Maximize lhs/rhs by random restarts and coordinate-wise hill climbing.

    The budget is split evenly over the ``partition x params`` cells. Each
    restart draws fresh increments from a stream keyed by
    ``(cfg.seed, cell, restart)`` and climbs one coordinate at a time,
    keeping a move only if the ratio strictly improves. A restart ends
    after ``patience`` consecutive rejected moves (default ``4 * dims``).
    ``initial`` optionally replaces the first restart's draw (one function,
    or two for the two-function inequalities).
    """
    iid = InequalityId(inequality_id)
    cells = [(part, dict(params)) for part in partition_grid for params in param_grid]
    if not cells:
        raise DomainError("ratio_search needs a nonempty partition and parameter grid")
    if budget < 1:
        raise DomainError("budget must be at least 1")
    two = iid in TWO_FUNCTION_IDS

    result = SearchResult(iid, -math.inf, None)
    per_cell, extra = divmod(budget, len(cells))
    for ci, (part, params) in enumerate(cells):
        cell_budget = per_cell + (1 if ci < extra else 0)
        if cell_budget == 0:
            continue
        cell = _Cell(iid, part, params, two)
        dims = part.n * (2 if two else 1)
        limit = patience if patience is not None else 4 * dims
        used = 0
        restart = 0
        while used < cell_budget:
            rng = make_rng(cfg.seed, ci, restart)
            if restart == 0 and initial is not None:
                delta = [d for F in initial for d in increments_of(F.on(part))]
            else:
                delta = draw_increments(dims, cfg, rng)
            report = cell.evaluate(delta)
            used += 1
            result.evaluations += 1
            current = report.ratio
            best_here = (current, list(delta), report)
            stale = 0
            step = 0
            while used < cell_budget and stale < limit:
                j = step % dims
                step += 1
                old = delta[j]
                delta[j] = _perturb(delta, j, rng)
                trial = cell.evaluate(delta)
                used += 1
                result.evaluations += 1
                if trial.ratio > current:
                    current = trial.ratio
                    best_here = (current, list(delta), trial)
                    stale = 0
                else:
                    delta[j] = old
                    stale += 1
                if current > result.best_ratio:
                    _adopt(result, cell, best_here, params)
            if best_here[0] > result.best_ratio:
                _adopt(result, cell, best_here, params)
            restart += 1
    return result


def _adopt(result: SearchResult, cell: _Cell, best_here, params) -> None:
    ratio, delta, report = best_here
    F, G = cell.functions(delta)
    result.best_ratio = ratio
    result.argmax_function = F
    result.second_function = G
    result.best_params = dict(params)
    result.best_report = report
    result.trajectory.append((result.evaluations, ratio))


@dataclass(frozen=True)
class Counterexample:
    inequality_id: InequalityId
    dropped: str
    trial: int
    report: VerificationReport
    function: LatticeFunction
    second_function: Optional[LatticeFunction] = None


def hypothesis_necessity_probe(
    inequality_id,
    partition: QLatticePartition,
    budget: int,
    cfg: GeneratorConfig,
    *,
    drop: str = "boundary",
    params: Optional[Dict[str, Scalar]] = None,
) -> Optional[Counterexample]:
    """Search for a failing instance once one hypothesis is dropped.

    Every probe draws from ``violating_function``; for the two-function
    inequalities both functions break the same hypothesis. The first
    instance whose report does not hold (margin below the backend
    tolerance) is returned; ``None`` when the budget runs out.
    """
    iid = InequalityId(inequality_id)
    two = iid in TWO_FUNCTION_IDS
    for trial in range(budget):
        rng = make_rng(cfg.seed, trial)
        F = violating_function(partition, cfg, drop, rng)
        G = violating_function(partition, cfg, drop, rng) if two else None
        report = verify(iid, F, G, params, unchecked=True)
        if not report.holds:
            return Counterexample(iid, drop, trial, report, F, G)
    return None
