"""Weight space: character evaluation, involution, analyticity radii, the
universal character on a chart and its specialization pairing."""

import random
from fractions import Fraction

import pytest

from eigenkit.errors import NonUnitArgument, NotWAnalytic, UnrepresentableExponent
from eigenkit.padic import PadicContext, teichmuller
from eigenkit.weight import (
    Character,
    UniversalCharacterChart,
    analyticity_radius,
    eval_algebraic,
    eval_character,
    involution,
    serialize_scalar,
    specialization_tail_pival,
    specialize_universal,
    universal_character_eval,
)


def random_dominant(ctx, g, rng, spread=4):
    ks = sorted((rng.randrange(-spread, spread + 1) for _ in range(g)), reverse=True)
    return Character.from_algebraic(ctx, ks)


# -- evaluation ------------------------------------------------------------------


def test_algebraic_evaluation(ctx_ram):
    kap = Character.from_algebraic(ctx_ram, (2, 1))
    v = eval_character(kap, [1 + ctx_ram.p, 1])
    assert v == ctx_ram.from_int((1 + ctx_ram.p) ** 2)


def test_identity_of_torus(ctx_ram):
    rng = random.Random(1)
    for _ in range(5):
        kap = random_dominant(ctx_ram, 3, rng)
        assert eval_character(kap, [1, 1, 1]) == ctx_ram.one()


def test_finite_order_part(ctx_ram):
    kap = Character(ctx_ram, (1, 0), (ctx_ram.one(), ctx_ram.one()))
    v = eval_character(kap, [2, 1])
    assert v == teichmuller(ctx_ram, 2)


def test_non_unit_rejected(ctx_ram):
    kap = Character.trivial(ctx_ram, 1)
    with pytest.raises(NonUnitArgument):
        eval_character(kap, [5])


def test_eval_matches_monomial_formula(ctx_ram):
    rng = random.Random(23)
    for _ in range(8):
        g = rng.choice([1, 2, 3])
        kap = random_dominant(ctx_ram, g, rng)
        t = [rng.choice([1, 2, 3, 4, 6, 7, 11]) for _ in range(g)]
        lhs = eval_character(kap, t)
        rhs = eval_algebraic(kap, t)
        assert lhs == rhs
        assert min(lhs.abs_prec, rhs.abs_prec) >= ctx_ram.m - 6


def test_generator_roundtrip(ctx_ram):
    """eval at (1,..,1+p,..,1) returns s_i exactly (weight-space isomorphism)."""
    rng = random.Random(3)
    g = 2
    s = tuple(ctx_ram.one() + ctx_ram.pi() * rng.randrange(1, 30) for _ in range(g))
    kap = Character(ctx_ram, (0, 0), s)
    for i in range(g):
        t = [1 + ctx_ram.p if j == i else 1 for j in range(g)]
        got = eval_character(kap, t)
        assert got == s[i]


# -- involution --------------------------------------------------------------------


def test_involution_formula(ctx_ram):
    kap = Character.from_algebraic(ctx_ram, (3, 1))
    assert involution(kap).algebraic == (-1, -3)


def test_involution_trivial_fixed(ctx_ram):
    kap = Character.trivial(ctx_ram, 3)
    assert involution(kap).algebraic == (0, 0, 0)


def test_involution_involutive(ctx_ram):
    rng = random.Random(17)
    for _ in range(10):
        g = rng.choice([1, 2, 3])
        kap = random_dominant(ctx_ram, g, rng)
        back = involution(involution(kap))
        assert back.algebraic == kap.algebraic
        for a, b in zip(back.s, kap.s):
            assert a == b


def test_involution_preserves_dominance(ctx_ram):
    rng = random.Random(29)
    for _ in range(10):
        kap = random_dominant(ctx_ram, 3, rng)
        assert involution(kap).is_dominant()


# -- analyticity radius ---------------------------------------------------------------


def test_radius_algebraic_minimal(ctx_ram):
    kap = Character.from_algebraic(ctx_ram, (3, 1))
    assert analyticity_radius(kap) == Fraction(1, ctx_ram.e)


def test_radius_one_unit_cases(ctx_ram):
    s1 = ctx_ram.from_int(1 + 5)
    k1 = Character(ctx_ram, (0,), (s1,))
    r1 = analyticity_radius(k1)
    assert Fraction(0) < r1 <= 1
    shalf = ctx_ram.one() + ctx_ram.pi_pow(4)  # v(s-1) = 1/2
    k2 = Character(ctx_ram, (0,), (shalf,))
    r2 = analyticity_radius(k2)
    assert r2 > r1


# -- universal character ----------------------------------------------------------------


@pytest.fixture(scope="module")
def chart_and_series():
    ctx = PadicContext.default(5, 20)
    chart = UniversalCharacterChart(ctx, 1, 1, 16)
    return ctx, chart, universal_character_eval(chart)


def test_universal_constant_term(chart_and_series):
    ctx, chart, U = chart_and_series
    assert U.coeff((0, 0)) == ctx.one()


def test_universal_valuation_bound(chart_and_series):
    """X-degree-k coefficients have valuation >= (k+1)/(p-1), exactly."""
    ctx, chart, U = chart_and_series
    for (j, k), c in U.coeffs.items():
        if k == 0:
            continue
        if c.val is not None:
            assert Fraction(c.val, ctx.e) >= Fraction(k + 1, ctx.p - 1)


def test_universal_is_one_unit(chart_and_series):
    ctx, chart, U = chart_and_series
    for mono, c in U.coeffs.items():
        if mono != (0, 0) and c.val is not None:
            assert c.val > 0


def test_unrepresentable_exponent():
    ctx = PadicContext(5, 1, 20)  # e = 1: neither w = 1/2 nor 2/(p-1) lands on the grid
    with pytest.raises(UnrepresentableExponent):
        UniversalCharacterChart(ctx, 1, Fraction(1, 2), 8)
    with pytest.raises(UnrepresentableExponent):
        UniversalCharacterChart(ctx, 1, 1, 8)


def test_specialize_trivial(chart_and_series):
    ctx, chart, U = chart_and_series
    sp = specialize_universal(U, Character.trivial(ctx, 1), chart)
    const = sp.series.coeff((0,))
    assert const == ctx.one()
    for mono, c in sp.series.coeffs.items():
        if mono != (0,) and c.val is not None:
            assert c.val >= sp.certified_pival


def test_specialize_binomial_oracle(chart_and_series):
    """Integer exponent k: the series degenerates to (1 + p^w X)^k."""
    ctx, chart, U = chart_and_series
    for k in (1, 2):
        kap = Character.from_algebraic(ctx, (k,))
        sp = specialize_universal(U, kap, chart)
        pw = ctx.pi_pow(int(chart.w * ctx.e))
        # binomial oracle
        from math import comb
        for j in range(min(k + 2, chart.D)):
            expect = ctx.from_int(comb(k, j)) * pw ** j if j <= k else ctx.zero()
            got = sp.series.coeff((j,))
            assert got.eq_prec(expect, sp.certified_pival)


def test_specialize_pairing_property(chart_and_series):
    """kappa^un(t)(kappa) = kappa(t) on random weights and test points."""
    ctx, chart, U = chart_and_series
    rng = random.Random(41)
    for _ in range(6):
        k = rng.randrange(-2, 4)
        kap = Character.from_algebraic(ctx, (k,))
        sp = specialize_universal(U, kap, chart)
        for _ in range(3):
            x = rng.randrange(0, 8)
            t = sp.torus_point([x])
            lhs = sp.eval_at([ctx.from_int(x)])
            rhs = eval_character(kap, t)
            assert lhs.eq_prec(rhs, min(sp.certified_pival, ctx.m - 6))


def test_specialize_rejects_wide_weights(chart_and_series):
    ctx, chart, U = chart_and_series
    s = ctx.one() + ctx.pi()  # v(s-1) = 1/8: needs w beyond the chart
    kap = Character(ctx, (0,), (s,))
    if analyticity_radius(kap) > chart.w:
        with pytest.raises(NotWAnalytic):
            specialize_universal(U, kap, chart)


def test_serialization_roundtrip_fields(ctx_ram):
    kap = Character.from_algebraic(ctx_ram, (2, 0))
    data = kap.serialize()
    assert data["g"] == 2 and data["algebraic"] == [2, 0]
    assert all(set(s) >= {"p", "e", "val", "digits"} for s in data["s"])
