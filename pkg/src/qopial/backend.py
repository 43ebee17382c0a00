"""Scalar backends: double precision and exact rationals.

Both backends are thin policy objects over Python's own number types
(``float`` and ``fractions.Fraction``), which already share the
arithmetic interface the rest of the package relies on. The backend
decides how inputs are coerced, how powers are taken and how sums are
accumulated.
"""

from __future__ import annotations

import contextlib
import math
import sys
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

Scalar = Union[float, Fraction]


class DomainError(ValueError):
    """Raised when an argument lies outside the mathematical domain."""


class Backend:
    name: str
    exact: bool
    tol: float

    def coerce(self, x) -> Scalar:
        raise NotImplementedError

    def exponent(self, e):
        raise NotImplementedError

    def power(self, x: Scalar, e) -> Scalar:
        raise NotImplementedError

    def total(self, terms: Iterable[Scalar]) -> Scalar:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<backend {self.name}>"

    def __reduce__(self):
        return (get_backend, (self.name,))


class FloatBackend(Backend):
    name = "float"
    exact = False
    tol = 1e-12

    def coerce(self, x) -> float:
        if isinstance(x, str):
            x = Fraction(x) if "/" in x else float(x)
        v = float(x)
        if not math.isfinite(v):
            raise DomainError(f"non-finite value {x!r}")
        return v

    def exponent(self, e) -> float:
        if isinstance(e, str):
            e = Fraction(e)
        return float(e)

    def power(self, x: float, e) -> float:
        try:
            return float(x) ** e
        except OverflowError:
            return math.inf

    def total(self, terms: Iterable[float]) -> float:
        # correctly rounded sum (Shewchuk partials)
        return math.fsum(terms)


class ExactBackend(Backend):
    name = "exact"
    exact = True
    tol = 0.0

    def coerce(self, x) -> Fraction:
        if isinstance(x, float) and not math.isfinite(x):
            raise DomainError(f"non-finite value {x!r}")
        try:
            return Fraction(x)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"cannot represent {x!r} exactly") from exc

    def exponent(self, e) -> int:
        f = Fraction(e) if not isinstance(e, float) or math.isfinite(e) else None
        if f is None or f.denominator != 1:
            raise DomainError(
                f"exact backend supports integer exponents only, got {e!r}"
            )
        return int(f)

    def power(self, x: Fraction, e) -> Fraction:
        return Fraction(x) ** self.exponent(e)

    def total(self, terms: Iterable[Fraction]) -> Fraction:
        return sum(terms, Fraction(0))


FLOAT = FloatBackend()
EXACT = ExactBackend()

_BACKENDS = {"float": FLOAT, "exact": EXACT}


def get_backend(backend: Union[str, Backend]) -> Backend:
    if isinstance(backend, Backend):
        return backend
    try:
        return _BACKENDS[backend]
    except KeyError:
        raise DomainError(f"unknown backend {backend!r}") from None


def is_integral(e) -> bool:
    """True when ``e`` is an integer value (``2``, ``2.0``, ``Fraction(4, 2)``)."""
    if isinstance(e, str):
        e = Fraction(e)
    if isinstance(e, float):
        return math.isfinite(e) and e.is_integer()
    if isinstance(e, Rational):
        return Fraction(e).denominator == 1
    return False


@contextlib.contextmanager
def _unbounded_int_digits():
    # exact powers on 64-point lattices easily exceed the default 4300 digits
    getter = getattr(sys, "get_int_max_str_digits", None)
    if getter is None:
        yield
        return
    old = getter()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


def format_scalar(x) -> str:
    """Serialize a scalar without losing bits.

    Fractions become ``"num/den"`` (or ``"num"``), floats their shortest
    round-trip ``repr``.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (Fraction, int)):
        with _unbounded_int_digits():
            return str(x)
    return repr(float(x))


def parse_scalar(text: str, backend: Union[str, Backend]) -> Scalar:
    backend = get_backend(backend)
    if text in ("inf", "-inf", "nan"):
        return float(text)
    if backend.exact:
        with _unbounded_int_digits():
            return Fraction(text)
    return float(Fraction(text)) if "/" in text else float(text)
