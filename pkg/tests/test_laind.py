"""Induction model: torus action, dilations, theta operators, BGG kernel,
compact U model and the classicity filter."""

import random
from fractions import Fraction

import pytest

from eigenkit.errors import (
    IndexOutOfRange,
    NonIntegralPairing,
    NotAnEigenvector,
    NonUnitTorusPoint,
    TruncationTooSmall,
)
from eigenkit.laind import (
    InducedFunction,
    RootDatum,
    algebraic_subspace,
    bgg_check,
    classicity_bounds,
    classicity_filter,
    compact_u_matrix,
    coordinate_pairs,
    delta_i,
    delta_slope,
    dilation_exponents,
    isotypic_classical_subspace,
    joint_delta_slopes,
    lowering_field,
    monomial_basis,
    span_equal,
    theta_alpha,
    torus_act,
    u_weight,
    weyl_dimension,
)
from eigenkit.weight import Character, eval_character


def random_dominant(ctx, g, rng, spread=3):
    ks = sorted((rng.randrange(-spread, spread + 1) for _ in range(g)), reverse=True)
    return Character.from_algebraic(ctx, ks)


# -- root datum --------------------------------------------------------------------


def test_dot_action_formula(ctx5):
    rd = RootDatum(2)
    # s_alpha . (1,0) = (1,0) - 2*(1,-1) = (-1,2)
    assert rd.dot((1, 0), 1) == (-1, 2)
    assert rd.dot((3, 1), 1) == (0, 4)


def test_dot_action_matches_rho_shift(ctx5):
    rng = random.Random(2)
    for g in (2, 3, 4):
        rd = RootDatum(g)
        for _ in range(6):
            ks = tuple(rng.randrange(-5, 6) for _ in range(g))
            for i in range(1, g):
                assert tuple(map(Fraction, rd.dot(ks, i))) == rd.dot_via_rho(ks, i)


def test_dot_involutive(ctx5):
    rd = RootDatum(3)
    rng = random.Random(4)
    for _ in range(8):
        ks = tuple(rng.randrange(-4, 5) for _ in range(3))
        for i in (1, 2):
            assert rd.dot(rd.dot(ks, i), i) == ks


# -- torus action --------------------------------------------------------------------


def test_torus_identity(ctx_ram):
    kap = Character.from_algebraic(ctx_ram, (2, 1))
    f = InducedFunction.monomial(ctx_ram, 2, kap, 6, (3,), ctx_ram.from_int(7))
    assert torus_act([1, 1], f).eq_prec(f)


def test_torus_trivial_weight_scaling(ctx_ram):
    """g=2, trivial involuted weight, t=(u,1): z^m -> u^{-m} z^m."""
    triv = Character.trivial(ctx_ram, 2)
    u = 7
    for m in range(4):
        f = InducedFunction.monomial(ctx_ram, 2, triv, 6, (m,))
        got = torus_act([u, 1], f).coeff((m,))
        expect = ctx_ram.one() / ctx_ram.from_int(u) ** m
        assert got == expect


def test_torus_action_axiom(ctx_ram):
    rng = random.Random(11)
    kap = random_dominant(ctx_ram, 2, rng)
    for _ in range(5):
        t1 = [rng.choice([1, 2, 3, 7]) for _ in range(2)]
        t2 = [rng.choice([1, 2, 3, 7]) for _ in range(2)]
        f = InducedFunction.monomial(ctx_ram, 2, kap, 6,
                                     (rng.randrange(4),), ctx_ram.from_int(3))
        lhs = torus_act(t1, torus_act(t2, f))
        rhs = torus_act([a * b for a, b in zip(t1, t2)], f)
        assert lhs.eq_prec(rhs, ctx_ram.m - 6)


def test_torus_rejects_non_units(ctx_ram):
    f = InducedFunction.monomial(ctx_ram, 2, Character.trivial(ctx_ram, 2), 4, (1,))
    with pytest.raises(NonUnitTorusPoint):
        torus_act([5, 1], f)


# -- dilation operators ----------------------------------------------------------------


def test_delta_g2_scaling(ctx5):
    kap = Character.from_algebraic(ctx5, (3, 1))
    for m in range(5):
        f = InducedFunction.monomial(ctx5, 2, kap, 6, (m,))
        assert delta_i(1, f).coeff((m,)).pival == m


def test_delta_g3_exponents():
    assert dilation_exponents(3, 1) == {(2, 1): 0, (3, 1): 1, (3, 2): 1}
    assert dilation_exponents(3, 2) == {(2, 1): 1, (3, 1): 1, (3, 2): 0}
    assert dilation_exponents(3, 3) == {(2, 1): 0, (3, 1): 0, (3, 2): 0}


def test_delta_g_is_identity(ctx5):
    kap = Character.from_algebraic(ctx5, (1, 0, 0))
    f = InducedFunction.monomial(ctx5, 3, kap, 4, (1, 2, 0), ctx5.from_int(3))
    assert delta_i(3, f).eq_prec(f)
    with pytest.raises(IndexOutOfRange):
        delta_i(4, f)


def test_delta_norm_contraction(ctx5):
    """Gauss norm at radius p^{-1} never increases, strictly on scaled region."""
    rng = random.Random(8)
    kap = Character.from_algebraic(ctx5, (2, 1, 0))
    basis = monomial_basis(3, 4)
    for _ in range(6):
        coeffs = {m: ctx5.from_int(rng.randrange(1, 100)) for m in basis
                  if rng.random() < 0.4}
        if not coeffs:
            continue
        f = InducedFunction(ctx5, 3, kap, 4, coeffs)
        for i in (1, 2):
            g = delta_i(i, f)
            assert (g.gauss_pival() or 0) >= (f.gauss_pival() or 0)
    mono = InducedFunction.monomial(ctx5, 3, kap, 4, (0, 1, 0))
    assert delta_i(1, mono).gauss_pival() > mono.gauss_pival()


# -- lowering fields and theta ------------------------------------------------------------


def test_lowering_field_g2(ctx5):
    kap = Character.from_algebraic(ctx5, (1, 0))
    field = lowering_field(2, 1)
    f = InducedFunction.monomial(ctx5, 2, kap, 6, (3,))
    assert field(f).coeff((2,)) == ctx5.from_int(3)  # d/dz z^3 = 3 z^2
    const = InducedFunction.monomial(ctx5, 2, kap, 6, (0,))
    assert field(const).is_zero()


def test_lowering_field_g3_structure(ctx5):
    """L_1 = d/dz_{21} + z_{32} d/dz_{31} on explicit monomials."""
    kap = Character.from_algebraic(ctx5, (1, 0, 0))
    field = lowering_field(3, 1)
    # pairs order: (2,1), (3,1), (3,2)
    f = InducedFunction.monomial(ctx5, 3, kap, 6, (0, 1, 0))  # z31
    out = field(f)
    assert out.coeff((0, 0, 1)) == ctx5.one()  # -> z32
    f2 = InducedFunction.monomial(ctx5, 3, kap, 6, (2, 0, 0))  # z21^2
    assert field(f2).coeff((1, 0, 0)) == ctx5.from_int(2)


def test_theta_g2_derivative_power(ctx5):
    kap = Character.from_algebraic(ctx5, (1, 0))
    z2 = InducedFunction.monomial(ctx5, 2, kap, 6, (2,))
    out = theta_alpha(1, kap, z2)  # (d/dz)^2
    assert out.coeff((0,)) == ctx5.from_int(2)
    z1 = InducedFunction.monomial(ctx5, 2, kap, 6, (1,))
    assert theta_alpha(1, kap, z1).is_zero()
    assert out.weight.algebraic == (-1, 2)


def test_theta_kills_constants(ctx5):
    rng = random.Random(31)
    for g in (2, 3):
        kap = random_dominant(ctx5, g, rng)
        const = InducedFunction.monomial(ctx5, g, kap, 4,
                                         (0,) * len(coordinate_pairs(g)))
        for i in range(1, g):
            assert theta_alpha(i, kap, const).is_zero()


def test_theta_needs_integral_pairing(ctx_ram):
    s = ctx_ram.one() + ctx_ram.pi() * 3
    kap = Character(ctx_ram, (0, 0), (s, ctx_ram.one()))
    f = InducedFunction.monomial(ctx_ram, 2, kap, 4, (1,))
    with pytest.raises(NonIntegralPairing):
        theta_alpha(1, kap, f)
    # explicit pairing unlocks the operator
    out = theta_alpha(1, kap, f, pairing=0)
    assert out.coeff((0,)) == ctx_ram.one()


def test_commutation_identity_exact(ctx5):
    """delta_{g-i} Theta_i = p^{k_{i+1}-k_i-1} Theta_i delta_{g-i}, exact."""
    rng = random.Random(71)
    for g, D in ((2, 10), (3, 5)):
        basis = monomial_basis(g, D)
        for _ in range(3):
            kap = random_dominant(ctx5, g, rng)
            ks = kap.algebraic
            for i in range(1, g):
                factor = ctx5.from_int(5) ** (ks[i] - ks[i - 1] - 1)
                for mono in basis:
                    f = InducedFunction.monomial(ctx5, g, kap, D, mono)
                    lhs = delta_i(g - i, theta_alpha(i, kap, f))
                    rhs = theta_alpha(i, kap, delta_i(g - i, f)).scale(factor)
                    assert lhs.eq_prec(rhs)


def test_theta_torus_equivariance(ctx_ram):
    """Theta_alpha intertwines the torus actions of kappa and s_alpha.kappa."""
    rng = random.Random(19)
    for g in (2, 3):
        kap = random_dominant(ctx_ram, g, rng, spread=2)
        basis = monomial_basis(g, 4)
        t = [rng.choice([2, 3, 7]) for _ in range(g)]
        for i in range(1, g):
            for mono in basis:
                f = InducedFunction.monomial(ctx_ram, g, kap, 4, mono)
                lhs = theta_alpha(i, kap, torus_act(t, f))
                rhs = torus_act(t, theta_alpha(i, kap, f))
                assert lhs.eq_prec(rhs, ctx_ram.m - 8)


def test_delta_preserves_algebraic_subspace(ctx5):
    """d_0 is delta-equivariant: delta_i maps V_kappa into itself."""
    kap = Character.from_algebraic(ctx5, (3, 1))
    Vk = algebraic_subspace(kap, 10)
    for i in (1, 2):
        images = [delta_i(i, f) for f in Vk]
        assert span_equal(Vk, Vk + images, 10)


# -- algebraic subspace and BGG ------------------------------------------------------------


def rank_oracle_fractions(rows, ncols):
    """Dense Gaussian elimination over Q, independent of the library path."""
    mat = [[Fraction(r.get(j, 0)) for j in range(ncols)] for r in rows]
    rank = 0
    for col in range(ncols):
        piv = None
        for i in range(rank, len(mat)):
            if mat[i][col]:
                piv = i
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][col]
        mat[rank] = [x * inv for x in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def test_algebraic_subspace_dims_g2(ctx5):
    for k in range(6):
        kap = Character.from_algebraic(ctx5, (k, 0))
        assert len(algebraic_subspace(kap, 8)) == k + 1


def test_algebraic_subspace_scalar_weight(ctx5):
    kap = Character.from_algebraic(ctx5, (2, 2, 2))
    basis = algebraic_subspace(kap, 4)
    assert len(basis) == 1


def test_algebraic_subspace_truncation_guard(ctx5):
    kap = Character.from_algebraic(ctx5, (4, 0))
    with pytest.raises(TruncationTooSmall):
        algebraic_subspace(kap, 2)


def test_bgg_check_g2(ctx5):
    kap = Character.from_algebraic(ctx5, (3, 1))
    rep = bgg_check(kap, 12)
    assert rep["kernel_dim"] == 3 == rep["oracle_dim"] == rep["expected_dim"]
    assert rep["d1_after_d0_zero"]


def test_bgg_check_g3_spec_case(ctx5):
    kap = Character.from_algebraic(ctx5, (2, 1, 0))
    rep = bgg_check(kap, 10)
    assert rep["kernel_dim"] == rep["oracle_dim"] == rep["expected_dim"] == 8
    assert rep["d1_after_d0_zero"]


def test_kernel_vs_independent_fraction_oracle(ctx5):
    from eigenkit.laind import _theta_rows
    kap = Character.from_algebraic(ctx5, (3, 1))
    basis = monomial_basis(2, 9)
    rows = _theta_rows(2, (3, 1), 9, basis)
    rank = rank_oracle_fractions(rows, len(basis))
    assert len(basis) - rank == 3


def test_weyl_dimension_values():
    assert weyl_dimension((3, 1)) == 3
    assert weyl_dimension((2, 1, 0)) == 8
    assert weyl_dimension((0, 0, 0)) == 1
    assert weyl_dimension((2, 0)) == 3


# -- compact model -----------------------------------------------------------------------


def test_compact_u_is_diagonal_with_u_weights(ctx5):
    U = compact_u_matrix(ctx5, 2, 5)
    for j in range(U.N):
        assert U.matrix[j][j].pival == j
    assert U.tail_pival == 6
    assert U.column_pivals == list(range(6))


def test_compact_u_g3_weights(ctx5):
    U = compact_u_matrix(ctx5, 3, 3)
    basis = monomial_basis(3, 3)
    # z31 has k - l = 2
    j = basis.index((0, 1, 0))
    assert U.matrix[j][j].pival == 2
    for j, mono in enumerate(basis):
        assert U.matrix[j][j].pival == u_weight(3, mono)


def test_compact_u_constant_slope_zero(ctx5):
    U = compact_u_matrix(ctx5, 2, 4)
    assert U.matrix[0][0] == ctx5.one()


def test_compact_u_twist_commutes(ctx5):
    kap = Character.from_algebraic(ctx5, (1, 0))
    U = compact_u_matrix(ctx5, 2, 4)
    T = compact_u_matrix(ctx5, 2, 4, twist=(kap, [2, 3]))
    # both diagonal: twisting rescales columns by units
    for j in range(U.N):
        ratio = T.matrix[j][j] / U.matrix[j][j]
        assert ratio.pival == 0


# -- classicity ---------------------------------------------------------------------------


def test_classicity_bounds_formula():
    assert classicity_bounds((3, 1)) == [3]
    assert classicity_bounds((5, 2, 0)) == [3, 4]  # v_1 = k_2-k_3+1, v_2 = k_1-k_2+1


def test_joint_slopes_and_filter(ctx5):
    kap = Character.from_algebraic(ctx5, (3, 1))
    z2 = InducedFunction.monomial(ctx5, 2, kap, 12, (2,))
    rep = classicity_filter(kap, z2)
    assert rep["verdict"] == "classical" and rep["theta_vanishes"]
    z5 = InducedFunction.monomial(ctx5, 2, kap, 12, (5,))
    assert classicity_filter(kap, z5)["verdict"] == "no claim"


def test_filter_rejects_mixed_support(ctx5):
    kap = Character.from_algebraic(ctx5, (3, 1))
    mixed = (InducedFunction.monomial(ctx5, 2, kap, 12, (0,)) +
             InducedFunction.monomial(ctx5, 2, kap, 12, (1,)))
    with pytest.raises(NotAnEigenvector):
        joint_delta_slopes(mixed)


def test_filter_slope_claim_checked(ctx5):
    kap = Character.from_algebraic(ctx5, (3, 1))
    z1 = InducedFunction.monomial(ctx5, 2, kap, 12, (1,))
    with pytest.raises(NotAnEigenvector):
        classicity_filter(kap, z1, slopes=[2])


def test_isotypic_subspace_is_algebraic(ctx5):
    kap = Character.from_algebraic(ctx5, (3, 1))
    iso = isotypic_classical_subspace(kap, 12)
    alg = algebraic_subspace(kap, 12)
    assert len(iso) == 3
    assert span_equal(iso, alg, 12)


def test_isotypic_subspace_k10(ctx5):
    """kappa=(1,0): slope-0 eigenvectors in ker Theta span dimension <= 2."""
    kap = Character.from_algebraic(ctx5, (1, 0))
    iso = isotypic_classical_subspace(kap, 10)
    assert len(iso) <= 2
    assert span_equal(iso, algebraic_subspace(kap, 10), 10)
