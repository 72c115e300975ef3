"""Scalar arithmetic, transcendental kernels and Newton polygons.

Expected values for the derived cases are frozen from independent oracles
computed with plain integer/rational arithmetic inside this module.
"""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenkit.errors import (
    AllCoefficientsZero,
    ContextMismatch,
    DivisionByZeroToPrecision,
    NonUnitConstantTerm,
    NotOneUnit,
    OutsideConvergenceDomain,
    ZeroResidue,
)
from eigenkit.padic import (
    PadicContext,
    exp_small,
    log_one_unit,
    newton_polygon,
    one_unit_pow,
    teichmuller,
)


# -- oracles -------------------------------------------------------------------


def teichmuller_oracle(x: int, p: int, modulus: int) -> int:
    """Iterate t -> t^p until stable mod the modulus."""
    t = x % modulus
    for _ in range(64):
        tp = pow(t, p, modulus)
        if tp == t:
            return t
        t = tp
    raise AssertionError("oracle did not stabilize")


def poly_mul_int(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def vp_int(n: int, p: int) -> Fraction:
    if n == 0:
        return Fraction(10 ** 9)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return Fraction(v)


def lower_hull_slopes(points):
    """Independent convex-hull oracle over exact rationals."""
    hull = []
    for x, y in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (x - x2) >= (y - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((x, y))
    out = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        out.extend([Fraction(y2 - y1, x2 - x1)] * (x2 - x1))
    return out


# -- scalar arithmetic ----------------------------------------------------------


def test_integer_embedding(ctx5):
    a, b = ctx5.from_int(2), ctx5.from_int(3)
    assert (a * b) == ctx5.from_int(6)
    assert (a * b).pival == 0


def test_p_times_p_valuation(ctx5):
    c = ctx5.from_int(5) * ctx5.from_int(5)
    assert c.pival == 2
    assert c.digits()[0] == 1


def test_uniformizer_power_is_p(ctx_ram):
    pi4 = ctx_ram.pi_pow(4)
    assert (pi4 * pi4) == ctx_ram.from_int(5)
    assert (pi4 * pi4).valuation == 1


def test_division(ctx5):
    q = ctx5.from_int(1) / ctx5.from_int(7)
    assert q * 7 == ctx5.one()
    with pytest.raises(DivisionByZeroToPrecision):
        ctx5.one() / ctx5.zero()


def test_context_mismatch(ctx5, ctx_ram):
    with pytest.raises(ContextMismatch):
        ctx5.one() + ctx_ram.one()


def test_valuation_rules(ctx5):
    rng = random.Random(11)
    for _ in range(50):
        a = ctx5.from_int(rng.randrange(1, 10 ** 6) * 5 ** rng.randrange(3))
        b = ctx5.from_int(rng.randrange(1, 10 ** 6) * 5 ** rng.randrange(3))
        assert (a * b).pival == a.pival + b.pival
        s = a + b
        if a.pival != b.pival:
            assert s.pival == min(a.pival, b.pival)
        else:
            assert s.is_zero() or s.pival >= min(a.pival, b.pival)


@settings(max_examples=60, deadline=None)
@given(st.integers(-10 ** 6, 10 ** 6), st.integers(-10 ** 6, 10 ** 6),
       st.integers(-10 ** 6, 10 ** 6))
def test_ring_axioms(a, b, c):
    ctx = PadicContext(5, 1, 20)
    A, B, C = ctx.from_int(a), ctx.from_int(b), ctx.from_int(c)
    assert (A + B) + C == A + (B + C)
    assert A * (B + C) == A * B + A * C
    assert (A * B) * C == A * (B * C)
    assert A + B == B + A


@settings(max_examples=40, deadline=None)
@given(st.integers(-10 ** 5, 10 ** 5), st.integers(-10 ** 5, 10 ** 5),
       st.integers(-10 ** 5, 10 ** 5))
def test_ring_axioms_ramified(a, b, c):
    ctx = PadicContext.default(5, 16)
    pi = ctx.pi()
    A = ctx.from_int(a) + pi * abs(a % 7)
    B = ctx.from_int(b) + pi * pi * abs(b % 5)
    C = ctx.from_int(c)
    assert (A + B) * C == A * C + B * C
    assert (A * B) * C == A * (B * C)


def test_ramified_digit_canonical_form(ctx_ram):
    x = ctx_ram.pi() * 3 + ctx_ram.from_int(5) * 2
    # 3*pi + 2*pi^8: digits normalized into [0, p)
    d = x.digits()
    assert d[0] == 3
    assert all(0 <= di < 5 for di in d)


# -- teichmuller -----------------------------------------------------------------


def test_teichmuller_fixed_point(ctx5):
    assert teichmuller(ctx5, 1) == ctx5.one()


def test_teichmuller_2_mod_25(ctx5):
    expected = teichmuller_oracle(2, 5, 25)
    assert expected == 7
    t = teichmuller(ctx5, 2)
    assert (t - ctx5.from_int(expected)).pival >= 2


def test_teichmuller_root_of_unity(ctx5, ctx_ram):
    for ctx in (ctx5, ctx_ram):
        for x in range(1, 5):
            t = teichmuller(ctx, x)
            assert t ** (ctx.p - 1) == ctx.one()
    with pytest.raises(ZeroResidue):
        teichmuller(ctx5, 5)


# -- one-unit powers ---------------------------------------------------------------


def test_one_unit_pow_zero_exponent(ctx5):
    s = ctx5.from_int(1 + 5 * 17)
    assert one_unit_pow(s, ctx5.zero()) == ctx5.one()
    assert one_unit_pow(s, ctx5.from_int(0)) == ctx5.one()


def test_one_unit_pow_integer_exponents(ctx5):
    s = ctx5.from_int(6)
    assert one_unit_pow(s, ctx5.from_int(2)) == ctx5.from_int(36)
    assert one_unit_pow(s, ctx5.from_int(3)) == ctx5.from_int(216)


def test_one_unit_pow_matches_repeated_multiplication(ctx_ram):
    rng = random.Random(5)
    for _ in range(10):
        s = ctx_ram.one() + ctx_ram.pi() * rng.randrange(1, 100)
        k = rng.randrange(0, 12)
        direct = s ** k
        assert one_unit_pow(s, ctx_ram.from_int(k)) == direct


def test_one_unit_pow_homomorphism(ctx5):
    rng = random.Random(7)
    for _ in range(8):
        s = ctx5.from_int(1 + 5 * rng.randrange(1, 10 ** 6))
        a = ctx5.from_int(rng.randrange(0, 10 ** 8))
        b = ctx5.from_int(rng.randrange(0, 10 ** 8))
        lhs = one_unit_pow(s, a + b)
        rhs = one_unit_pow(s, a) * one_unit_pow(s, b)
        assert lhs == rhs


def test_one_unit_pow_rejects_non_units(ctx5):
    with pytest.raises(NotOneUnit):
        one_unit_pow(ctx5.from_int(2), ctx5.one())


# -- log / exp ---------------------------------------------------------------------


def test_log_exp_trivial(ctx5):
    assert log_one_unit(ctx5.one()).is_zero()
    assert exp_small(ctx5.zero()) == ctx5.one()


def test_log_of_1_plus_p_valuation():
    ctx = PadicContext(5, 1, 10)
    l = log_one_unit(ctx.from_int(6))
    assert l.valuation == 1
    # oracle: exact rational partial sum of the series to 10 digits
    acc = Fraction(0)
    for k in range(1, 16):
        acc += Fraction((-1) ** (k + 1) * 5 ** k, k)
    oracle = ctx.from_fraction(acc)
    assert l.eq_prec(oracle, 10)


def test_exp_log_inverse_pair():
    ctx = PadicContext(5, 1, 12)
    x = ctx.from_int(6)
    assert exp_small(log_one_unit(x)) == x
    y = ctx.from_int(5 * 7)
    assert log_one_unit(exp_small(y)) == y


def test_log_homomorphism(ctx5):
    rng = random.Random(13)
    for _ in range(6):
        a = ctx5.from_int(1 + 5 * rng.randrange(1, 10 ** 5))
        b = ctx5.from_int(1 + 5 * rng.randrange(1, 10 ** 5))
        assert log_one_unit(a * b) == log_one_unit(a) + log_one_unit(b)


def test_convergence_domain_errors(ctx5):
    with pytest.raises(OutsideConvergenceDomain):
        log_one_unit(ctx5.from_int(2))
    with pytest.raises(OutsideConvergenceDomain):
        exp_small(ctx5.from_int(3))


# -- newton polygons ------------------------------------------------------------------


def test_polygon_single_root(ctx5):
    np_ = newton_polygon([ctx5.one(), ctx5.from_int(-1)])
    assert np_.slopes == [(Fraction(0), 1)]


def test_polygon_two_slopes(ctx5):
    # (1-T)(1-pT) = 1 - 6T + 5T^2
    np_ = newton_polygon([ctx5.from_int(1), ctx5.from_int(-6), ctx5.from_int(5)])
    assert [s for s, _ in np_.slopes] == [Fraction(0), Fraction(1)]


def test_polygon_half_slope(ctx5):
    np_ = newton_polygon([ctx5.one(), ctx5.zero(), ctx5.from_int(5)])
    assert np_.slopes == [(Fraction(1, 2), 2)]


def test_polygon_errors(ctx5):
    with pytest.raises(NonUnitConstantTerm):
        newton_polygon([ctx5.from_int(5), ctx5.one()])
    with pytest.raises(AllCoefficientsZero):
        newton_polygon([])


def test_polygon_product_of_linear_factors(ctx5_40):
    """Polygon of prod (1 - lambda_i T) equals sorted valuations, brute force."""
    rng = random.Random(3)
    for _ in range(6):
        k = rng.randrange(2, 9)
        lams = [rng.choice([1, 2, 3]) * 5 ** rng.randrange(0, 4) for _ in range(k)]
        coeffs_int = [1]
        for lam in lams:
            coeffs_int = poly_mul_int(coeffs_int, [1, -lam])
        oracle = sorted(vp_int(lam, 5) for lam in lams)
        hull_oracle = lower_hull_slopes(
            [(n, vp_int(c, 5)) for n, c in enumerate(coeffs_int) if c != 0])
        assert oracle == hull_oracle
        np_ = newton_polygon([ctx5_40.from_int(c) for c in coeffs_int])
        assert np_.slope_list() == oracle
        assert np_.degree == k


def test_polygon_multiplicity_sum_matches_prefix(ctx5):
    coeffs = [ctx5.from_int(c) for c in (1, -6, 5)]
    np_ = newton_polygon(coeffs)
    assert sum(m for _, m in np_.slopes) == 2


# -- precision semantics ----------------------------------------------------------------


def test_absolute_cap(ctx5):
    x = ctx5.from_int(5 ** 25)
    assert x.abs_prec <= ctx5.m
    assert x.is_zero()  # valuation 25 exceeds the 20-digit cap


def test_subtraction_cancellation(ctx5):
    a = ctx5.from_int(1 + 5 ** 6)
    b = ctx5.one()
    d = a - b
    assert d.pival == 6
    z = a - a
    assert z.is_zero() and z.abs_prec == ctx5.m


def test_equality_is_joint_precision(ctx5):
    a = ctx5.from_int(7)
    b = a + ctx5.pi_pow(18)  # differ only at digit 18
    assert not a == b
    assert a.eq_prec(b, 18)


def test_serialization_digits(ctx_ram):
    x = ctx_ram.from_int(2 + 5 * 3)
    ds = x.digits()
    assert ds[0] == 2
    assert len(ds) == x.rel_prec
