"""Verifiers for the q-Opial family of inequalities on lattice functions.

Each verifier evaluates both sides on a concrete :class:`LatticeFunction`
and returns a :class:`VerificationReport`. In the float backend power sums
are accumulated with the largest magnitude factored out; when a result
still overflows and every exponent is an integer on a lattice with
``n <= 64``, the instance is recomputed in the exact backend.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from .backend import EXACT, Backend, DomainError, Scalar, is_integral
from .lattice import (
    LatticeFunction,
    PartitionMismatch,
    QLatticePartition,
    is_q_decreasing,
    q_derivative,
)

EXACT_FALLBACK_MAX_N = 64


class HypothesisViolation(ValueError):
    """The input does not satisfy the hypotheses of the inequality."""


class InequalityId(str, enum.Enum):
    OpialGeneral = "OpialGeneral"
    OpialP1 = "OpialP1"
    TwoFunction = "TwoFunction"
    YoungPair = "YoungPair"
    Wirtinger = "Wirtinger"
    HolderStep = "HolderStep"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class VerificationReport:
    inequality_id: InequalityId
    lhs: Scalar
    rhs: Scalar
    ratio: Scalar
    margin: Scalar
    holds: bool
    params: Dict[str, Scalar] = field(default_factory=dict)
    backend: str = "float"

    def same_sides(self, other: "VerificationReport") -> bool:
        return (self.lhs, self.rhs, self.ratio, self.margin, self.holds) == (
            other.lhs,
            other.rhs,
            other.ratio,
            other.margin,
            other.holds,
        )


def _ratio(lhs, rhs):
    if rhs == 0:
        if lhs == 0:
            return 0 * lhs
        return math.inf if lhs > 0 else -math.inf
    return lhs / rhs


def make_report(
    inequality_id: InequalityId,
    lhs: Scalar,
    rhs: Scalar,
    params: Dict[str, Scalar],
    backend: Backend,
    tol: Optional[float] = None,
) -> VerificationReport:
    tol = backend.tol if tol is None else tol
    margin = rhs - lhs
    if backend.exact and tol == 0:
        holds = margin >= 0
    else:
        scale = max(abs(lhs), abs(rhs), 1)
        holds = bool(margin >= -tol * scale)
    return VerificationReport(
        InequalityId(inequality_id),
        lhs,
        rhs,
        _ratio(lhs, rhs),
        margin,
        bool(holds),
        dict(params),
        backend.name,
    )


def _power_product_sum(
    partition: QLatticePartition, factors: Sequence[Tuple[Sequence[Scalar], Scalar]]
) -> Scalar:
    """``b(1-q) sum_{j<n} q^j prod_k |x_k[j]|^{e_k}`` with ``0^0 = 1``."""
    bk = partition.backend
    n = partition.n
    weights = partition.powers[:n]
    active = [(xs[:n], e) for xs, e in factors if e != 0]
    if bk.exact:
        active = [(xs, bk.exponent(e)) for xs, e in active]
        terms = []
        for j in range(n):
            t = weights[j]
            for xs, e in active:
                t *= abs(xs[j]) ** e
            terms.append(t)
        return partition.b * (1 - partition.q) * bk.total(terms)

    scale = partition.b * (1 - partition.q)
    normalized = []
    for xs, e in active:
        m = max(abs(x) for x in xs)
        if m == 0:
            return 0.0
        scale *= bk.power(m, e)
        normalized.append(([abs(x) / m for x in xs], e))
    terms = []
    for j in range(n):
        t = weights[j]
        for xs, e in normalized:
            t *= xs[j] ** e
        terms.append(t)
    s = bk.total(terms)
    if s == 0:
        return 0.0
    return scale * s


def _finite(*xs) -> bool:
    return all(not isinstance(x, float) or math.isfinite(x) for x in xs)


def _exact_twin(*functions: LatticeFunction) -> Optional[Tuple[LatticeFunction, ...]]:
    F = functions[0]
    if F.backend.exact or F.partition.n > EXACT_FALLBACK_MAX_N:
        return None
    return tuple(G.with_backend(EXACT) for G in functions)


def _check_decreasing_zero(F: LatticeFunction, name: str = "f") -> None:
    if F.values[0] != 0:
        raise HypothesisViolation(f"{name}(b) = {F.values[0]} but must be 0")
    if not is_q_decreasing(F):
        raise HypothesisViolation(f"{name} is not q-decreasing on the lattice")


def _same_partition(F: LatticeFunction, G: LatticeFunction) -> None:
    if F.partition != G.partition:
        raise PartitionMismatch("f and g must share one partition")


def verify_opial_general(
    F: LatticeFunction, p, *, unchecked: bool = False, tol: Optional[float] = None
) -> VerificationReport:
    if not p >= 0:
        raise DomainError(f"p must be nonnegative, got {p}")
    if not unchecked:
        _check_decreasing_zero(F)
    bk = F.backend
    pe = bk.exponent(p)
    part = F.partition
    D = q_derivative(F).quotients
    lhs = _power_product_sum(part, [(D, 1), (F.values, pe)])
    rhs = bk.power(part.length, pe) * _power_product_sum(part, [(D, pe + 1)])
    if not _finite(lhs, rhs) and is_integral(p):
        twin = _exact_twin(F)
        if twin:
            return verify_opial_general(twin[0], p, unchecked=True, tol=tol)
    return make_report(InequalityId.OpialGeneral, lhs, rhs, {"p": pe}, bk, tol)


def verify_opial_p1(
    F: LatticeFunction, *, unchecked: bool = False, tol: Optional[float] = None
) -> VerificationReport:
    return verify_opial_general(F, 1, unchecked=unchecked, tol=tol)


def opial_chain(F: LatticeFunction, p) -> Tuple[Scalar, Scalar, Scalar]:
    """The three quantities linked in the Opial proof.

    Returns ``(integral of |D_q f||f|^p, (sum_j |f_{j+1} - f_j|)^{p+1},
    (b-a)^p * integral of |D_q f|^{p+1})``. The first is bounded by the
    second for q-decreasing ``f`` with ``f(b) = 0``; the second by the
    third for any ``f``.
    """
    if not p >= 0:
        raise DomainError(f"p must be nonnegative, got {p}")
    bk = F.backend
    pe = bk.exponent(p)
    part = F.partition
    D = q_derivative(F).quotients
    v = F.values
    variation = bk.total(abs(v[j + 1] - v[j]) for j in range(part.n))
    integral = _power_product_sum(part, [(D, 1), (v, pe)])
    bound = bk.power(part.length, pe) * _power_product_sum(part, [(D, pe + 1)])
    return integral, bk.power(variation, pe + 1), bound


def verify_discrete_holder_step(
    F: LatticeFunction, p, *, tol: Optional[float] = None
) -> VerificationReport:
    if not p >= 0:
        raise DomainError(f"p must be nonnegative, got {p}")
    bk = F.backend
    pe = bk.exponent(p)
    part = F.partition
    D = q_derivative(F).quotients
    lhs = bk.power(_power_product_sum(part, [(D, 1)]), pe + 1)
    rhs = bk.power(part.length, pe) * _power_product_sum(part, [(D, pe + 1)])
    if not _finite(lhs, rhs) and is_integral(p):
        twin = _exact_twin(F)
        if twin:
            return verify_discrete_holder_step(twin[0], p, tol=tol)
    return make_report(InequalityId.HolderStep, lhs, rhs, {"p": pe}, bk, tol)


def _two_function_lhs(F: LatticeFunction, G: LatticeFunction) -> Scalar:
    Df = q_derivative(F).quotients
    Dg = q_derivative(G).quotients
    f, g = F.values, G.values
    # g(qx) at x = bq^j is g_{j+1}
    terms = [f[j] * Dg[j] + g[j + 1] * Df[j] for j in range(F.partition.n)]
    return F.partition.weighted_sum(terms)


def verify_two_function(
    F: LatticeFunction,
    G: LatticeFunction,
    *,
    unchecked: bool = False,
    tol: Optional[float] = None,
) -> VerificationReport:
    _same_partition(F, G)
    if not unchecked:
        _check_decreasing_zero(F, "f")
        _check_decreasing_zero(G, "g")
    bk = F.backend
    part = F.partition
    Df = q_derivative(F).quotients
    Dg = q_derivative(G).quotients
    lhs = _two_function_lhs(F, G)
    rhs = (
        part.length
        / 2
        * (_power_product_sum(part, [(Df, 2)]) + _power_product_sum(part, [(Dg, 2)]))
    )
    if not _finite(lhs, rhs):
        twin = _exact_twin(F, G)
        if twin:
            return verify_two_function(*twin, unchecked=True, tol=tol)
    return make_report(InequalityId.TwoFunction, lhs, rhs, {}, bk, tol)


def telescoping_residual(
    F: LatticeFunction, G: LatticeFunction, *, unchecked: bool = False
) -> Scalar:
    """Two-function integral minus ``-f(a) g(a)``; zero whenever ``f(b) = g(b) = 0``.

    No monotonicity is required: the integrand telescopes by the discrete
    product rule.
    """
    _same_partition(F, G)
    if not unchecked and (F.values[0] != 0 or G.values[0] != 0):
        raise HypothesisViolation("telescoping needs f(b) = g(b) = 0")
    return _two_function_lhs(F, G) + F.values[-1] * G.values[-1]


def _generic(*xs):
    if all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in xs):
        return [Fraction(x) for x in xs]
    return [float(x) for x in xs]


def am_gm_margin(x, y) -> Scalar:
    """``(x^2 + y^2)/2 + xy``, the slack in ``-xy <= (x^2 + y^2)/2``."""
    x, y = _generic(x, y)
    return (x * x + y * y) / 2 + x * y


def young_scalar_margin(z, w, s, t) -> Scalar:
    """Slack in ``z^s w^t <= s/(s+t) z^(s+t) + t/(s+t) w^(s+t)``.

    Exact when all four arguments are rationals and ``s``, ``t`` are integers.
    """
    if z < 0 or w < 0:
        raise DomainError("z and w must be nonnegative")
    if not (s > 0 and t > 0):
        raise DomainError("s and t must be positive")
    z, w, s, t = _generic(z, w, s, t)
    if isinstance(z, Fraction) and s.denominator == 1 and t.denominator == 1:
        s, t = int(s), int(t)
        u = s + t
        return Fraction(s, u) * z**u + Fraction(t, u) * w**u - z**s * w**t
    z, w, s, t = float(z), float(w), float(s), float(t)
    u = s + t
    return s / u * z**u + t / u * w**u - z**s * w**t


def verify_young_pair(
    F: LatticeFunction,
    G: LatticeFunction,
    s,
    t,
    *,
    unchecked: bool = False,
    tol: Optional[float] = None,
) -> VerificationReport:
    if not (s > 0 and t > 0):
        raise DomainError(f"s and t must be positive, got s={s}, t={t}")
    _same_partition(F, G)
    if not unchecked:
        _check_decreasing_zero(F, "f")
        _check_decreasing_zero(G, "g")
    bk = F.backend
    se, te = bk.exponent(s), bk.exponent(t)
    u = se + te
    part = F.partition
    Df = q_derivative(F).quotients
    Dg = q_derivative(G).quotients
    lhs = _power_product_sum(part, [(F.values, se), (G.values, te)])
    if bk.exact:
        cf, cg = Fraction(se, u), Fraction(te, u)
    else:
        cf, cg = se / u, te / u
    rhs = bk.power(part.length, u) * (
        cf * _power_product_sum(part, [(Df, u)]) + cg * _power_product_sum(part, [(Dg, u)])
    )
    if not _finite(lhs, rhs) and is_integral(s) and is_integral(t):
        twin = _exact_twin(F, G)
        if twin:
            return verify_young_pair(*twin, s, t, unchecked=True, tol=tol)
    return make_report(InequalityId.YoungPair, lhs, rhs, {"s": se, "t": te}, bk, tol)


def verify_wirtinger(
    H: LatticeFunction, r, *, unchecked: bool = False, tol: Optional[float] = None
) -> VerificationReport:
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    rep = verify_young_pair(H, H, r, r, unchecked=unchecked, tol=tol)
    return replace(rep, inequality_id=InequalityId.Wirtinger, params={"r": rep.params["s"]})


TWO_FUNCTION_IDS = frozenset({InequalityId.TwoFunction, InequalityId.YoungPair})

PARAM_NAMES = {
    InequalityId.OpialGeneral: ("p",),
    InequalityId.OpialP1: (),
    InequalityId.HolderStep: ("p",),
    InequalityId.TwoFunction: (),
    InequalityId.YoungPair: ("s", "t"),
    InequalityId.Wirtinger: ("r",),
}


def verify(
    inequality_id,
    F: LatticeFunction,
    G: Optional[LatticeFunction] = None,
    params: Optional[Dict[str, Scalar]] = None,
    *,
    unchecked: bool = False,
    tol: Optional[float] = None,
) -> VerificationReport:
    """Dispatch to the verifier named by ``inequality_id``."""
    iid = InequalityId(inequality_id)
    params = params or {}
    if iid in TWO_FUNCTION_IDS and G is None:
        raise ValueError(f"{iid} needs two functions")
    if iid is InequalityId.OpialGeneral:
        return verify_opial_general(F, params["p"], unchecked=unchecked, tol=tol)
    if iid is InequalityId.OpialP1:
        return verify_opial_p1(F, unchecked=unchecked, tol=tol)
    if iid is InequalityId.HolderStep:
        return verify_discrete_holder_step(F, params["p"], tol=tol)
    if iid is InequalityId.TwoFunction:
        return verify_two_function(F, G, unchecked=unchecked, tol=tol)
    if iid is InequalityId.YoungPair:
        return verify_young_pair(F, G, params["s"], params["t"], unchecked=unchecked, tol=tol)
    return verify_wirtinger(F, params["r"], unchecked=unchecked, tol=tol)
