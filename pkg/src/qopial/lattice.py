"""The q-geometric lattice and the q-calculus operators that live on it.

A partition of ``[a, b]`` is the point set ``b, bq, ..., bq^n`` with
``a = bq^n``. Functions are tabulated on those ``n + 1`` points; the
q-derivative is the vector of ``n`` forward quotients, and the restricted
q-integral is the finite weighted sum ``b(1-q) sum_{j<n} q^j f(bq^j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence, Tuple, Union

from .backend import FLOAT, Backend, DomainError, Scalar, get_backend


class ConvergenceError(RuntimeError):
    """Raised when a Jackson series has not converged within ``j_max`` terms."""


class TabulationError(ValueError):
    """Raised when a function cannot be sampled at some lattice point."""

    def __init__(self, index: int, point, reason: str):
        super().__init__(f"evaluation failed at j={index} (x={point!r}): {reason}")
        self.index = index
        self.point = point


class PartitionMismatch(ValueError):
    """Raised when two lattice objects live on different partitions."""


@dataclass(frozen=True)
class QLatticePartition:
    """Geometric grid ``x_j = b q^j`` for ``j = 0..n``."""

    q: Scalar
    b: Scalar
    n: int
    backend: Backend = FLOAT

    @property
    def a(self) -> Scalar:
        return self.points[-1]

    @cached_property
    def powers(self) -> Tuple[Scalar, ...]:
        """``q^j`` for ``j = 0..n``."""
        if self.backend.exact:
            return tuple(self.q**j for j in range(self.n + 1))
        return tuple(self.q ** float(j) for j in range(self.n + 1))

    @cached_property
    def points(self) -> Tuple[Scalar, ...]:
        return tuple(self.b * w for w in self.powers)

    @cached_property
    def steps(self) -> Tuple[Scalar, ...]:
        """Mesh widths ``bq^j - bq^{j+1} = bq^j(1-q)`` for ``j = 0..n-1``."""
        one_minus_q = 1 - self.q
        return tuple(x * one_minus_q for x in self.points[:-1])

    @property
    def length(self) -> Scalar:
        """``b - a``."""
        return self.b - self.a

    def point(self, j: int) -> Scalar:
        if not 0 <= j <= self.n:
            raise IndexError(f"lattice index {j} outside 0..{self.n}")
        return self.points[j]

    def with_backend(self, backend: Union[str, Backend]) -> "QLatticePartition":
        """Same lattice in another backend.

        Float parameters convert to their exact binary value, so a float
        partition and its exact twin describe the same real numbers.
        """
        backend = get_backend(backend)
        if backend is self.backend:
            return self
        return make_partition(self.q, self.b, self.n, backend)

    def weighted_sum(self, terms: Sequence[Scalar]) -> Scalar:
        """``b(1-q) * sum_{j<n} q^j terms[j]``; extra trailing terms are ignored."""
        bk = self.backend
        s = bk.total(w * t for w, t in zip(self.powers[: self.n], terms))
        return self.b * (1 - self.q) * s


def make_partition(q, b, n: int, backend: Union[str, Backend] = FLOAT) -> QLatticePartition:
    backend = get_backend(backend)
    if isinstance(n, bool) or int(n) != n:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    q = backend.coerce(q)
    b = backend.coerce(b)
    if not 0 < q < 1:
        raise DomainError(f"q must satisfy 0 < q < 1, got {q}")
    if not b > 0:
        raise DomainError(f"b must be positive, got {b}")
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return QLatticePartition(q, b, n, backend)


@dataclass(frozen=True)
class LatticeFunction:
    """Values ``f(bq^j)`` for ``j = 0..n``."""

    partition: QLatticePartition
    values: Tuple[Scalar, ...]

    def __post_init__(self):
        bk = self.partition.backend
        if len(self.values) != self.partition.n + 1:
            raise ValueError(
                f"expected {self.partition.n + 1} values, got {len(self.values)}"
            )
        object.__setattr__(self, "values", tuple(bk.coerce(v) for v in self.values))

    @property
    def backend(self) -> Backend:
        return self.partition.backend

    def on(self, partition: QLatticePartition) -> "LatticeFunction":
        """Carry the same values over to another partition with equal ``n``."""
        return LatticeFunction(partition, self.values)

    def with_backend(self, backend: Union[str, Backend]) -> "LatticeFunction":
        return self.on(self.partition.with_backend(backend))

    def _checked(self, other: "LatticeFunction") -> None:
        if other.partition != self.partition:
            raise PartitionMismatch("lattice functions live on different partitions")

    def __add__(self, other: "LatticeFunction") -> "LatticeFunction":
        self._checked(other)
        return LatticeFunction(
            self.partition, tuple(u + v for u, v in zip(self.values, other.values))
        )

    def __sub__(self, other: "LatticeFunction") -> "LatticeFunction":
        return self + (-other)

    def __neg__(self) -> "LatticeFunction":
        return LatticeFunction(self.partition, tuple(-v for v in self.values))

    def __mul__(self, c) -> "LatticeFunction":
        c = self.backend.coerce(c)
        return LatticeFunction(self.partition, tuple(c * v for v in self.values))

    __rmul__ = __mul__


@dataclass(frozen=True)
class LatticeDerivative:
    """``quotients[j] = (D_q f)(bq^j)`` for ``j = 0..n-1``."""

    partition: QLatticePartition
    quotients: Tuple[Scalar, ...]

    def __post_init__(self):
        if len(self.quotients) != self.partition.n:
            raise ValueError(
                f"expected {self.partition.n} quotients, got {len(self.quotients)}"
            )


def q_natural(n: int, q) -> Scalar:
    """The q-integer ``[n]_q = (1 - q^n) / (1 - q)``.

    Evaluated as the finite sum ``1 + q + ... + q^(n-1)``, exactly when
    ``q`` is a ``Fraction``.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if not 0 < q < 1:
        raise DomainError(f"q must satisfy 0 < q < 1, got {q}")
    if isinstance(q, (Fraction, int)):
        return sum((Fraction(q) ** j for j in range(n)), Fraction(0))
    return math.fsum(q**j for j in range(n))


def tabulate(f: Callable, partition: QLatticePartition) -> LatticeFunction:
    bk = partition.backend
    values = []
    for j, x in enumerate(partition.points):
        try:
            v = bk.coerce(f(x))
        except (ArithmeticError, ValueError) as exc:
            raise TabulationError(j, x, str(exc)) from exc
        values.append(v)
    return LatticeFunction(partition, tuple(values))


def q_derivative(F: LatticeFunction) -> LatticeDerivative:
    v = F.values
    steps = F.partition.steps
    return LatticeDerivative(
        F.partition, tuple((v[j] - v[j + 1]) / steps[j] for j in range(F.partition.n))
    )


def q_derivative_at(f: Callable, x, q) -> Scalar:
    """Pointwise ``(f(x) - f(qx)) / (x - qx)`` for ``x != 0``."""
    if not 0 < q < 1:
        raise DomainError(f"q must satisfy 0 < q < 1, got {q}")
    if x == 0:
        # the limit at 0 is never needed on a restricted lattice
        raise DomainError("q-derivative at 0 is defined only as a limit")
    return (f(x) - f(q * x)) / (x - q * x)


def restricted_integral(F: Union[LatticeFunction, LatticeDerivative]) -> Scalar:
    """Gauchman's restricted integral over ``[bq^n, b]``.

    Accepts a derivative too, so ``restricted_integral(q_derivative(F))``
    integrates ``D_q f``. ``F.values[n]`` never enters the sum.
    """
    terms = F.quotients if isinstance(F, LatticeDerivative) else F.values
    return F.partition.weighted_sum(terms)


def jackson_integral_zero(
    f: Callable,
    a,
    q,
    rel_tol: float = 1e-14,
    j_max: int = 100_000,
    abs_floor: float = 1e-300,
    min_terms: int = 2,
) -> float:
    """Jackson's q-integral over ``[0, a]``, truncated adaptively.

    Stops at the first ``j >= min_terms - 1`` whose term falls below
    ``rel_tol`` times the running partial sum (or below ``abs_floor`` while
    the partial sum is still zero).
    """
    q = float(q)
    a = float(a)
    if not 0 < q < 1:
        raise DomainError(f"q must satisfy 0 < q < 1, got {q}")
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    terms = []
    partial = 0.0
    w = 1.0
    for j in range(j_max):
        term = w * float(f(a * w))
        if not math.isfinite(term):
            raise TabulationError(j, a * w, "non-finite integrand")
        terms.append(term)
        partial += term
        if j + 1 >= min_terms:
            if partial != 0:
                if abs(term) < rel_tol * abs(partial):
                    break
            elif abs(term) < abs_floor:
                break
        w *= q
    else:
        raise ConvergenceError(f"Jackson series not converged after {j_max} terms")
    return a * (1 - q) * math.fsum(terms)


def jackson_integral_ab(
    f: Callable,
    a,
    b,
    q,
    rel_tol: float = 1e-14,
    j_max: int = 100_000,
) -> float:
    """Jackson's integral over ``[a, b]`` as the difference of two ``[0, .]`` integrals."""
    if not 0 <= a <= b:
        raise DomainError(f"need 0 <= a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    upper = jackson_integral_zero(f, b, q, rel_tol, j_max)
    if a == 0:
        return upper
    return upper - jackson_integral_zero(f, a, q, rel_tol, j_max)


def is_q_decreasing(F: LatticeFunction, eps_mono=0) -> bool:
    """``f(qx) >= f(x)`` on the lattice, i.e. values nondecreasing in ``j``."""
    eps = F.backend.coerce(eps_mono)
    v = F.values
    return all(v[j + 1] - v[j] >= -eps for j in range(F.partition.n))


def is_q_increasing(F: LatticeFunction, eps_mono=0) -> bool:
    eps = F.backend.coerce(eps_mono)
    v = F.values
    return all(v[j + 1] - v[j] <= eps for j in range(F.partition.n))
