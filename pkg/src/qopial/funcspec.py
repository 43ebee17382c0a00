"""Tiny function grammar for the ``eval`` command.

Accepted: sums of terms ``c``, ``c*x``, ``c x^k`` (``k <= 4``) and the
symbol ``b`` standing for the right endpoint, e.g. ``"1 + 2x^2 - 1/3x^4"``
or ``"b - x"``. Coefficients are parsed exactly, so evaluating at a
``Fraction`` stays exact.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Dict

MAX_DEGREE = 4

_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?P<coef>\d+(?:\.\d+)?(?:/\d+)?|b)?\s*
        (?P<star>\*)?\s*
        (?P<x>x(?:\s*\^\s*(?P<deg>\d+))?)?\s*""",
    re.VERBOSE,
)


class FunctionSpecError(ValueError):
    pass


def parse_polynomial(text: str, b=None) -> Dict[int, Fraction]:
    """Coefficients by degree. ``b`` is substituted where the symbol appears."""
    if not text.strip():
        raise FunctionSpecError("empty function spec")
    coeffs: Dict[int, Fraction] = {}
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise FunctionSpecError(f"cannot parse {text!r} at position {pos}")
        if m.group("coef") is None and m.group("x") is None:
            raise FunctionSpecError(f"dangling operator in {text!r} at position {pos}")
        if m.group("sign") is None and not first:
            raise FunctionSpecError(f"missing operator in {text!r} at position {pos}")
        if m.group("star") and not (m.group("coef") and m.group("x")):
            raise FunctionSpecError(f"misplaced '*' in {text!r}")
        coef_txt = m.group("coef")
        if coef_txt == "b":
            if b is None:
                raise FunctionSpecError("spec uses 'b' but no endpoint was given")
            coef = Fraction(b)
        else:
            coef = Fraction(coef_txt) if coef_txt else Fraction(1)
        if m.group("sign") == "-":
            coef = -coef
        deg = 0
        if m.group("x"):
            deg = int(m.group("deg")) if m.group("deg") else 1
        if deg > MAX_DEGREE:
            raise FunctionSpecError(f"degree {deg} exceeds {MAX_DEGREE}")
        coeffs[deg] = coeffs.get(deg, Fraction(0)) + coef
        pos = m.end()
        first = False
    return coeffs


def parse_function(text: str, b=None) -> Callable:
    coeffs = parse_polynomial(text, b)
    top = max(coeffs)
    dense = [coeffs.get(k, Fraction(0)) for k in range(top + 1)]

    def f(x):
        acc = 0 * x + dense[top]
        for c in reversed(dense[:top]):
            acc = acc * x + c
        return acc

    f.__doc__ = f"polynomial {text!r}"
    return f
