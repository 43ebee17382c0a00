"""Reference evaluations written straight from the definitions.

Nothing here imports the package: a lattice function is a dict from the
point ``x`` to ``f(x)``, the q-derivative is ``(f(x) - f(qx)) / (x - qx)``
looked up pointwise, and the restricted integral is Gauchman's sum. All
arithmetic is ``Fraction``; exponents must be integers.
"""

from fractions import Fraction


def lattice(q, b, n):
    q, b = Fraction(q), Fraction(b)
    return [b * q**j for j in range(n + 1)]


def as_map(q, b, values):
    pts = lattice(q, b, len(values) - 1)
    return dict(zip(pts, (Fraction(v) for v in values)))


def dq(fmap, q, x):
    return (fmap[x] - fmap[q * x]) / (x - q * x)


def gauchman(q, b, n, integrand):
    """``b(1-q) sum_{j<n} q^j integrand(bq^j)``."""
    q, b = Fraction(q), Fraction(b)
    total = Fraction(0)
    for j in range(n):
        total += q**j * integrand(b * q**j)
    return b * (1 - q) * total


def opial_sides(q, b, values, p):
    q, b, n = Fraction(q), Fraction(b), len(values) - 1
    f = as_map(q, b, values)
    a = b * q**n
    lhs = gauchman(q, b, n, lambda x: abs(dq(f, q, x)) * abs(f[x]) ** p)
    rhs = (b - a) ** p * gauchman(q, b, n, lambda x: abs(dq(f, q, x)) ** (p + 1))
    return lhs, rhs


def holder_sides(q, b, values, p):
    q, b, n = Fraction(q), Fraction(b), len(values) - 1
    f = as_map(q, b, values)
    a = b * q**n
    lhs = gauchman(q, b, n, lambda x: abs(dq(f, q, x))) ** (p + 1)
    rhs = (b - a) ** p * gauchman(q, b, n, lambda x: abs(dq(f, q, x)) ** (p + 1))
    return lhs, rhs


def two_function_sides(q, b, fvals, gvals):
    q, b, n = Fraction(q), Fraction(b), len(fvals) - 1
    f, g = as_map(q, b, fvals), as_map(q, b, gvals)
    a = b * q**n
    lhs = gauchman(q, b, n, lambda x: f[x] * dq(g, q, x) + g[q * x] * dq(f, q, x))
    rhs = (b - a) / 2 * gauchman(q, b, n, lambda x: dq(f, q, x) ** 2 + dq(g, q, x) ** 2)
    return lhs, rhs


def young_sides(q, b, fvals, gvals, s, t):
    q, b, n = Fraction(q), Fraction(b), len(fvals) - 1
    f, g = as_map(q, b, fvals), as_map(q, b, gvals)
    a = b * q**n
    u = s + t
    lhs = gauchman(q, b, n, lambda x: abs(f[x]) ** s * abs(g[x]) ** t)
    rhs = (b - a) ** u * (
        Fraction(s, u) * gauchman(q, b, n, lambda x: abs(dq(f, q, x)) ** u)
        + Fraction(t, u) * gauchman(q, b, n, lambda x: abs(dq(g, q, x)) ** u)
    )
    return lhs, rhs


def partial_sum_jackson(f, a, q, terms):
    """First ``terms`` terms of Jackson's series, exact."""
    a, q = Fraction(a), Fraction(q)
    return a * (1 - q) * sum((q**j * f(a * q**j) for j in range(terms)), Fraction(0))
