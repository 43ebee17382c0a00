import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qopial import (
    EXACT,
    DomainError,
    GeneratorConfig,
    HypothesisViolation,
    InequalityId,
    LatticeFunction,
    PartitionMismatch,
    am_gm_margin,
    make_partition,
    opial_chain,
    random_q_decreasing,
    tabulate,
    telescoping_residual,
    verify,
    verify_discrete_holder_step,
    verify_opial_general,
    verify_opial_p1,
    verify_two_function,
    verify_wirtinger,
    verify_young_pair,
    young_scalar_margin,
)

import oracles

HALF = Fraction(1, 2)

rational_q = st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10), max_denominator=20)
increments = st.integers(0, 2**16).map(lambda k: Fraction(k, 2**10))
signed = st.integers(-(2**16), 2**16).map(lambda k: Fraction(k, 2**10))


def _from_steps(part, steps, start=Fraction(0)):
    values = [start]
    for d in steps:
        values.append(values[-1] + d)
    return LatticeFunction(part, tuple(values))


@st.composite
def monotone(draw, max_n=10, partition=None):
    if partition is None:
        partition = make_partition(draw(rational_q), draw(st.sampled_from([1, 2, 3])), draw(st.integers(1, max_n)), EXACT)
    steps = draw(st.lists(increments, min_size=partition.n, max_size=partition.n))
    return _from_steps(partition, steps)


@st.composite
def monotone_pair(draw, max_n=10):
    F = draw(monotone(max_n=max_n))
    return F, draw(monotone(partition=F.partition))


@st.composite
def anchored(draw, max_n=10):
    """f(b) = 0 but no monotonicity."""
    part = make_partition(draw(rational_q), draw(st.sampled_from([1, 2])), draw(st.integers(1, max_n)), EXACT)
    return _from_steps(part, draw(st.lists(signed, min_size=part.n, max_size=part.n)))


@pytest.fixture
def linear():
    return tabulate(lambda x: 1 - x, make_partition(HALF, 1, 2, EXACT))


@pytest.fixture
def linear_float():
    return tabulate(lambda x: 1 - x, make_partition(0.5, 1.0, 2))


class TestWorkedInstances:
    def test_opial(self, linear):
        rep = verify_opial_general(linear, 1)
        assert (rep.lhs, rep.rhs, rep.ratio) == (Fraction(1, 8), Fraction(9, 16), Fraction(2, 9))
        assert rep.holds and rep.margin == Fraction(7, 16)

    def test_two_function(self, linear):
        rep = verify_two_function(linear, linear)
        assert (rep.lhs, rep.rhs) == (Fraction(-9, 16), Fraction(9, 16))
        assert rep.holds

    def test_young(self, linear):
        rep = verify_young_pair(linear, linear, 1, 1)
        assert (rep.lhs, rep.rhs) == (Fraction(1, 16), Fraction(27, 64))

    def test_wirtinger(self, linear):
        rep = verify_wirtinger(linear, 1)
        assert (rep.lhs, rep.rhs) == (Fraction(1, 16), Fraction(27, 64))
        assert rep.inequality_id is InequalityId.Wirtinger and rep.params == {"r": 1}

    @pytest.mark.parametrize(
        "verifier, expected",
        [
            (lambda F: verify_opial_general(F, 1), (1 / 8, 9 / 16)),
            (lambda F: verify_two_function(F, F), (-9 / 16, 9 / 16)),
            (lambda F: verify_young_pair(F, F, 1, 1), (1 / 16, 27 / 64)),
        ],
    )
    def test_float_backend(self, linear_float, verifier, expected):
        rep = verifier(linear_float)
        assert rep.backend == "float"
        assert rep.lhs == pytest.approx(expected[0], rel=1e-14)
        assert rep.rhs == pytest.approx(expected[1], rel=1e-14)


class TestOpial:
    def test_p_zero_is_equality(self):
        F = random_q_decreasing(make_partition(0.3, 2.0, 17), GeneratorConfig(seed=5))
        rep = verify_opial_general(F, 0)
        assert rep.lhs == rep.rhs and rep.ratio == 1

    def test_zero_function(self):
        F = tabulate(lambda x: 0, make_partition(0.5, 1.0, 4))
        rep = verify_opial_general(F, 2)
        assert (rep.lhs, rep.rhs, rep.ratio, rep.holds) == (0.0, 0.0, 0.0, True)

    def test_p1_delegates(self, linear):
        assert verify_opial_p1(linear) == verify_opial_general(linear, 1)

    def test_rejects_boundary_violation(self):
        F = tabulate(lambda x: 2 - x, make_partition(0.5, 1.0, 3))
        with pytest.raises(HypothesisViolation):
            verify_opial_general(F, 1)
        assert verify_opial_general(F, 1, unchecked=True).lhs > 0

    def test_rejects_non_monotone(self):
        F = LatticeFunction(make_partition(0.5, 1.0, 2), (0.0, 1.0, 0.5))
        with pytest.raises(HypothesisViolation):
            verify_opial_general(F, 1)

    def test_rejects_negative_p(self, linear):
        with pytest.raises(DomainError):
            verify_opial_general(linear, -1)

    def test_exact_rejects_fractional_p(self, linear):
        with pytest.raises(DomainError):
            verify_opial_general(linear, HALF)

    def test_fractional_p_float(self, linear_float):
        rep = verify_opial_general(linear_float, HALF)
        assert rep.params == {"p": 0.5} and rep.holds

    @given(monotone(), st.sampled_from([0, 1, 2, 3]))
    def test_matches_oracle_and_holds(self, F, p):
        rep = verify_opial_general(F, p)
        P = F.partition
        assert (rep.lhs, rep.rhs) == oracles.opial_sides(P.q, P.b, F.values, p)
        assert rep.margin >= 0 and rep.holds

    @given(monotone(), st.sampled_from([0, 1, 2, 5]))
    def test_chain_links(self, F, p):
        integral, variation, bound = opial_chain(F, p)
        assert integral <= variation <= bound

    @given(monotone(), st.sampled_from([1, 2]), st.sampled_from([Fraction(1, 3), 1, 7]))
    def test_scale_covariance(self, F, p, lam):
        assume(any(F.values))
        base = verify_opial_general(F, p)
        scaled = verify_opial_general(lam * F, p)
        assert scaled.lhs == lam ** (p + 1) * base.lhs
        assert scaled.rhs == lam ** (p + 1) * base.rhs
        assert scaled.ratio == base.ratio

    def test_float_overflow_falls_back_to_exact(self):
        P = make_partition(0.1, 1.0, 64)
        F = random_q_decreasing(P, GeneratorConfig(seed=3))
        rep = verify_opial_general(F, 5)
        assert rep.backend == "exact" and rep.holds
        assert rep.rhs > 10**308

    def test_fractional_overflow_stays_float(self):
        P = make_partition(0.01, 1.0, 64)
        F = random_q_decreasing(P, GeneratorConfig(seed=3))
        rep = verify_opial_general(F, 4.5)
        assert rep.backend == "float"
        assert math.isinf(rep.rhs)


class TestHolderStep:
    @given(anchored(), st.sampled_from([0, 1, 2, 4]))
    def test_holds_without_monotonicity(self, F, p):
        rep = verify_discrete_holder_step(F, p)
        P = F.partition
        assert (rep.lhs, rep.rhs) == oracles.holder_sides(P.q, P.b, F.values, p)
        assert rep.holds

    @pytest.mark.parametrize("p", [0, 1, 2, 5])
    def test_equality_for_constant_slope(self, p):
        F = tabulate(lambda x: 3 - x, make_partition(Fraction(2, 3), 3, 6, EXACT))
        rep = verify_discrete_holder_step(F, p)
        assert rep.lhs == rep.rhs == (3 - F.partition.a) ** (p + 1)

    def test_p_zero_collapses(self):
        F = LatticeFunction(make_partition(0.4, 1.0, 3), (1.0, -2.0, 5.0, 0.5))
        rep = verify_discrete_holder_step(F, 0)
        assert rep.lhs == rep.rhs

    def test_negative_p(self, linear):
        with pytest.raises(DomainError):
            verify_discrete_holder_step(linear, -0.5)


class TestTwoFunction:
    @given(monotone_pair())
    def test_matches_oracle_and_telescopes(self, pair):
        F, G = pair
        rep = verify_two_function(F, G)
        P = F.partition
        assert (rep.lhs, rep.rhs) == oracles.two_function_sides(P.q, P.b, F.values, G.values)
        assert rep.lhs == -F.values[-1] * G.values[-1] <= 0 <= rep.rhs
        assert rep.holds

    @given(anchored(), st.data())
    def test_telescoping_needs_only_boundary(self, F, data):
        G = data.draw(anchored().map(lambda H: H.on(F.partition) if H.partition.n == F.partition.n else F))
        assert telescoping_residual(F, G) == 0

    def test_linear_residual(self, linear):
        assert telescoping_residual(linear, linear) == 0

    def test_zero_function(self, linear):
        zero = linear * 0
        assert telescoping_residual(zero, linear) == 0
        rep = verify_two_function(zero, linear)
        assert rep.lhs == 0 <= rep.rhs

    def test_partition_mismatch(self, linear):
        other = tabulate(lambda x: 1 - x, make_partition(Fraction(1, 3), 1, 2, EXACT))
        with pytest.raises(PartitionMismatch):
            verify_two_function(linear, other)
        with pytest.raises(PartitionMismatch):
            telescoping_residual(linear, other)

    def test_hypotheses_checked_for_both(self, linear):
        bad = LatticeFunction(linear.partition, (0, 1, HALF))
        with pytest.raises(HypothesisViolation):
            verify_two_function(linear, bad)
        with pytest.raises(HypothesisViolation):
            telescoping_residual(LatticeFunction(linear.partition, (1, 1, 1)), linear)


class TestElementary:
    @pytest.mark.parametrize("x, y, expected", [(1, -1, 0), (1, 1, 2), (3, -2, HALF)])
    def test_am_gm(self, x, y, expected):
        assert am_gm_margin(x, y) == expected

    @given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
    def test_am_gm_nonnegative(self, x, y):
        assert am_gm_margin(x, y) >= -1e-9 * (x * x + y * y)

    @pytest.mark.parametrize(
        "z, w, s, t, expected",
        [(1, 1, 1, 1, 0), (2, 0, 1, 1, 2), (1, 2, 1, 2, Fraction(5, 3))],
    )
    def test_young(self, z, w, s, t, expected):
        assert young_scalar_margin(z, w, s, t) == expected

    @given(
        st.fractions(0, 10, max_denominator=20),
        st.fractions(0, 10, max_denominator=20),
        st.integers(1, 5),
        st.integers(1, 5),
    )
    def test_young_nonnegative_exact(self, z, w, s, t):
        assert young_scalar_margin(z, w, s, t) >= 0

    @given(st.floats(0, 100), st.floats(0.05, 6), st.floats(0.05, 6))
    def test_young_equality_on_diagonal(self, z, s, t):
        scale = max(1.0, z ** (s + t))
        assert abs(young_scalar_margin(z, z, s, t)) <= 1e-12 * scale

    def test_young_fractional_exponents_go_float(self):
        assert young_scalar_margin(4, 1, HALF, HALF) == pytest.approx(0.5)

    @pytest.mark.parametrize("args", [(-1, 1, 1, 1), (1, -1, 1, 1), (1, 1, 0, 1), (1, 1, 1, -2)])
    def test_young_domain(self, args):
        with pytest.raises(DomainError):
            young_scalar_margin(*args)


class TestYoung:
    @given(monotone_pair(max_n=8), st.sampled_from([(1, 1), (1, 2), (2, 3)]))
    def test_matches_oracle_and_holds(self, pair, st_):
        F, G = pair
        s, t = st_
        rep = verify_young_pair(F, G, s, t)
        P = F.partition
        assert (rep.lhs, rep.rhs) == oracles.young_sides(P.q, P.b, F.values, G.values, s, t)
        assert rep.holds

    @settings(max_examples=50)
    @given(monotone(max_n=8), st.sampled_from([1, 2, 3]))
    def test_wirtinger_specializes_young(self, H, r):
        w = verify_wirtinger(H, r)
        y = verify_young_pair(H, H, r, r)
        assert w.same_sides(y)
        assert (w.lhs, w.rhs) == oracles.young_sides(H.partition.q, H.partition.b, H.values, H.values, r, r)

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_wirtinger_float(self, r):
        H = random_q_decreasing(make_partition(0.7, 1.0, 12), GeneratorConfig(seed=11))
        w = verify_wirtinger(H, r)
        assert w.holds and w.same_sides(verify_young_pair(H, H, r, r))

    def test_zero(self, linear):
        rep = verify_young_pair(linear * 0, linear, 2, 3)
        assert rep.lhs == 0 <= rep.rhs

    def test_domain(self, linear):
        with pytest.raises(DomainError):
            verify_young_pair(linear, linear, 0, 1)
        with pytest.raises(DomainError):
            verify_wirtinger(linear, -1)


class TestReports:
    def test_ratio_infinite_when_rhs_vanishes(self):
        F = LatticeFunction(make_partition(0.5, 1.0, 2), (3.0, 3.0, 3.0))
        rep = verify_young_pair(F, F, 1, 1, unchecked=True)
        assert rep.rhs == 0 and rep.ratio == math.inf and not rep.holds

    def test_tolerance_override(self, linear_float):
        F = LatticeFunction(linear_float.partition, (1.0, 1.0, 1.0))
        rep = verify_young_pair(F, F, 1, 1, unchecked=True, tol=10.0)
        assert rep.holds

    def test_ratio_bound_when_holding(self):
        F = random_q_decreasing(make_partition(0.9, 1.0, 30), GeneratorConfig(seed=2))
        for p in (0.5, 1, 2):
            rep = verify_opial_general(F, p)
            assert rep.holds and rep.ratio <= 1 + 1e-12

    def test_dispatch(self, linear):
        assert verify(InequalityId.OpialP1, linear) == verify_opial_p1(linear)
        assert verify("Wirtinger", linear, params={"r": 2}) == verify_wirtinger(linear, 2)
        with pytest.raises(ValueError):
            verify("YoungPair", linear, params={"s": 1, "t": 1})
