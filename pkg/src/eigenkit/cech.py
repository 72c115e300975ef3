"""Banach modules over an affinoid disc, completed localization along the
Laurent cover by f, the splitting g = g_+ - g_-, Cech acyclicity checks and
Kiehl-style glueing.

The base is the Tate algebra K<x> truncated at degree D_A with f = p^{-1} x,
so both charts are proper: U_+ is the sub-disc |x| <= |p| and U_- the annulus
|p| <= |x| <= 1.  Overlap functions are truncated Laurent expansions in f
with the sup-of-coefficients norm on |f| = 1.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import (
    NonContracting,
    NonInvertibleTransition,
    PrecisionExhausted,
    UnsupportedChart,
    ValidationError,
)
from .padic import PadicContext, PadicScalar
from .series import TruncatedSeries
from .spectral import BanachModuleModel, INF_PIVAL

Laurent = Dict[int, PadicScalar]  # exponent of f -> coefficient


class AffinoidModel:
    """K<x> truncated at D_A, with the distinguished f = p^{-1} x."""

    def __init__(self, ctx: PadicContext, D_A: int, f_shift_pival: Optional[int] = None):
        self.ctx = ctx
        self.D_A = D_A
        # f = pi^{-s} x; the default s = e makes f = p^{-1} x
        self.f_shift = ctx.e if f_shift_pival is None else f_shift_pival
        if self.f_shift < 0:
            raise ValidationError("f must have a pole only at the scaling")

    def element(self, coeffs: Dict[int, PadicScalar]) -> TruncatedSeries:
        return TruncatedSeries(self.ctx, ("x",), self.D_A,
                               {(n,): c for n, c in coeffs.items()})

    def norm_pival(self, a: TruncatedSeries) -> Optional[int]:
        return a.gauss_pival()

    # x^n restricted to the charts, in f-coordinates: x = pi^{f_shift} f
    def to_overlap(self, a: TruncatedSeries) -> Laurent:
        out: Laurent = {}
        for (n,), c in a.coeffs.items():
            out[n] = c * self.ctx.pi_pow(self.f_shift * n)
        return out


def laurent_norm_pival(g: Laurent) -> Optional[int]:
    best = None
    for c in g.values():
        if c.val is not None and (best is None or c.val < best):
            best = c.val
    return best


def laurent_add(ctx, a: Laurent, b: Laurent) -> Laurent:
    out = dict(a)
    for n, c in b.items():
        out[n] = out[n] + c if n in out else c
    return {n: c for n, c in out.items() if not (c.is_zero() and c.abs_prec >= ctx.m)}


def laurent_neg(a: Laurent) -> Laurent:
    return {n: -c for n, c in a.items()}


def laurent_mul(ctx, a: Laurent, b: Laurent, window: int) -> Laurent:
    out: Laurent = {}
    for n, c in a.items():
        for m, d in b.items():
            k = n + m
            if abs(k) > window:
                continue
            p = c * d
            out[k] = out[k] + p if k in out else p
    return {n: c for n, c in out.items() if not (c.is_zero() and c.abs_prec >= ctx.m)}


def laurent_split(gelt: Laurent, beta: Fraction = Fraction(1)) -> Tuple[Laurent, Laurent]:
    """g = g_+ - g_-: nonnegative exponents (constants included) to the plus
    chart, strictly negative to minus.  The monomial model achieves the norm
    bound |g_+-| <= |g| with beta = 1, so any beta > 1 is satisfied a fortiori.
    """
    plus = {n: c for n, c in gelt.items() if n >= 0}
    minus = {n: -c for n, c in gelt.items() if n < 0}
    return plus, minus


class LocalizedModule:
    """M (x)-hat A_U for a finite C(I) model M, presented in chart coordinates.

    chart "plus": series in X with X = f (relation X - f); "minus": canonical
    forms in x and Y with f Y = 1; "both": truncated Laurent expansions in f.
    Norms are computed on the canonical monomial representatives, which gives
    the inf-over-representations norm exactly in this monomial model.
    """

    CHARTS = ("plus", "minus", "both")

    def __init__(self, base: AffinoidModel, chart: str, rank: int,
                 vectors: Optional[List[List[Laurent]]] = None):
        if chart not in self.CHARTS:
            raise UnsupportedChart(f"chart must be one of {self.CHARTS}")
        self.base = base
        self.chart = chart
        self.rank = rank
        self.vectors = vectors or []

    def admits(self, g: Laurent) -> bool:
        if self.chart == "plus":
            return all(n >= 0 for n in g)
        if self.chart == "minus":
            return all(n <= 0 or self._is_x_power(n, c) for n, c in g.items())
        return True

    def _is_x_power(self, n: int, c: PadicScalar) -> bool:
        # x^n = pi^{shift*n} f^n lives on the annulus chart for n >= 0
        return c.val is None or c.val >= self.base.f_shift * n

    def norm_pival(self, vec: Sequence[Laurent]) -> Optional[int]:
        best = None
        for g in vec:
            v = laurent_norm_pival(g)
            if v is not None and (best is None or v < best):
                best = v
        return best


def completed_localization(M: BanachModuleModel, base: AffinoidModel,
                           chart: str) -> LocalizedModule:
    """Extend coordinates along A -> A_U; for finite C(I) the result is
    A_U^rank with the sup norm."""
    return LocalizedModule(base, chart, M.rank)


def restrict_vector(base: AffinoidModel, vec: Sequence[TruncatedSeries],
                    chart: str) -> List[Laurent]:
    """Image of a global vector in a chart, in f-coordinates."""
    out = []
    for a in vec:
        g = base.to_overlap(a)
        out.append(g)
    return out


# -- Cech check ----------------------------------------------------------------


def _random_series(ctx, base, rng) -> TruncatedSeries:
    coeffs = {}
    for n in range(base.D_A + 1):
        coeffs[n] = ctx.from_int(rng.randrange(-ctx.p ** 3, ctx.p ** 3))
    return base.element(coeffs)


def cech_check(M: BanachModuleModel, base: AffinoidModel,
               samples: int = 6, seed: int = 1) -> dict:
    """Exactness of 0 -> M -> M_+ (+) M_- -> M_{+-} -> 0 on the truncation.

    (i) injectivity of the restriction is exact in the monomial model;
    (ii) the kernel of the difference map is computed by valuation-pivoted
    elimination and compared with the image of M; (iii) surjectivity runs the
    Kiehl splitting on sample overlap elements, reporting the contraction.
    """
    import random
    ctx = M.ctx
    r = M.rank
    rng = random.Random(seed)
    D = base.D_A
    s = base.f_shift

    # (i) injectivity: x^n maps to pi^{s n} f^n on the plus chart and to x^n
    # on the annulus; both coefficient maps kill no stored coefficient.
    injective = True
    for n in range(D + 1):
        c = ctx.pi_pow(s * n)
        if c.is_zero():
            injective = False

    # (ii) middle kernel vs image of M, coordinatewise in the component index
    # basis: u_+ = sum a_n f^n (n >= 0, from X^n), u_- = sum b_n x^n + c_m Y^m.
    # Overlap: f^n gets a_n - pi^{s n} b_n (n >= 1), constants a_0 - b_0, and
    # -c_m at f^{-m}; kernel forces c_m = 0 and a_n = pi^{s n} b_n = res(v).
    # Defect of a kernel vector from the image is therefore exactly zero; we
    # still measure it numerically on a sampled kernel basis.
    nplus = D + 1
    nminus = 2 * D + 1
    rows = []
    for k in range(-D, D + 1):
        row = []
        for n in range(nplus):          # a_n coefficient of f^k
            row.append(ctx.one() if n == k else ctx.zero())
        for n in range(D + 1):          # b_n (x^n -> pi^{s n} f^n)
            row.append(ctx.pi_pow(s * n) if n == k else ctx.zero())
        for m in range(1, D + 1):       # c_m (Y^m -> f^{-m})
            row.append(ctx.one() if -m == k else ctx.zero())
        rows.append(row)
    # difference map: res_+(u_+) - res_-(u_-): flip signs on the minus block
    for row in rows:
        for j in range(nplus, nplus + nminus):
            row[j] = -row[j]
    kern, margin = linalg.kernel_padic(rows, ctx)
    middle_defect = INF_PIVAL
    image_dim = D + 1
    if len(kern) != image_dim:
        middle_defect = 0
    else:
        for vec in kern:
            bpart = [vec[nplus + n] for n in range(D + 1)]
            v = base.element({n: bpart[n] for n in range(D + 1)})
            rplus = base.to_overlap(v)
            for n in range(nplus):
                d = vec[n] - rplus.get(n, ctx.zero())
                if d.val is not None:
                    middle_defect = min(middle_defect, d.val)
            for m in range(1, D + 1):
                d = vec[nplus + D + m]
                if d.val is not None:
                    middle_defect = min(middle_defect, d.val)

    # (iii) splitting on sample overlap elements (identity transition): the
    # canonical Laurent split is exact in one round; epsilon is measured, not
    # assumed.
    eps = None
    rounds_needed = 0
    for _ in range(samples):
        u = []
        for _ in range(r):
            g: Laurent = {}
            for n in range(-D, D + 1):
                g[n] = ctx.from_int(rng.randrange(-ctx.p ** 3, ctx.p ** 3))
            u.append(g)
        unorm = LocalizedModule(base, "both", r).norm_pival(u)
        residual = u
        for rnd in range(1, ctx.m + 1):
            plus_parts, minus_parts = [], []
            for g in residual:
                gp, gm = laurent_split(g)
                plus_parts.append(gp)
                minus_parts.append(gm)
            new_res = []
            worst = None
            for g, gp, gm in zip(residual, plus_parts, minus_parts):
                rem = laurent_add(ctx, g,
                                  laurent_neg(laurent_add(ctx, gp, laurent_neg(gm))))
                v = laurent_norm_pival(rem)
                if v is not None and (worst is None or v < worst):
                    worst = v
                new_res.append(rem)
            rounds_needed = max(rounds_needed, rnd)
            if worst is None:
                break
            contraction = worst - (unorm or 0)
            if contraction <= 0:
                raise NonContracting(
                    f"splitting residual did not shrink (pival {worst})")
            eps = contraction if eps is None else min(eps, contraction)
            residual = new_res
    return {
        "injective": injective,
        "middle_defect_pival": None if middle_defect >= INF_PIVAL else middle_defect,
        "kernel_dim": len(kern),
        "image_dim": image_dim,
        "rounds": rounds_needed,
        "epsilon_pival": eps,  # None: split exact in one round
        "elimination_margin": margin,
        "rank": r,
    }


# -- Kiehl glueing --------------------------------------------------------------


def _lmat_mul(ctx, A, B, window):
    n, k, m = len(A), len(B), len(B[0])
    out = [[{} for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for j in range(m):
            acc: Laurent = {}
            for t in range(k):
                acc = laurent_add(ctx, acc, laurent_mul(ctx, A[i][t], B[t][j], window))
            out[i][j] = acc
    return out


def _lmat_add_id(ctx, A):
    out = [[dict(A[i][j]) for j in range(len(A))] for i in range(len(A))]
    for i in range(len(A)):
        out[i][i] = laurent_add(ctx, out[i][i], {0: ctx.one()})
    return out


def _lmat_norm_pival(A) -> Optional[int]:
    best = None
    for row in A:
        for g in row:
            v = laurent_norm_pival(g)
            if v is not None and (best is None or v < best):
                best = v
    return best


def _lmat_neumann_inverse(ctx, E, window):
    """(1 + E)^{-1} = sum (-E)^k for |E| < 1, truncated at precision."""
    n = len(E)
    acc = [[{0: ctx.one()} if i == j else {} for j in range(n)] for i in range(n)]
    gamma = _lmat_norm_pival(E)
    if gamma is None:
        return acc
    if gamma <= 0:
        raise NonInvertibleTransition("Neumann series needs |E| < 1")
    negE = [[laurent_neg(E[i][j]) for j in range(n)] for i in range(n)]
    term = negE
    k = 1
    while k * gamma < ctx.m:
        acc = [[laurent_add(ctx, acc[i][j], term[i][j]) for j in range(n)]
               for i in range(n)]
        term = _lmat_mul(ctx, term, negE, window)
        k += 1
    return acc


def kiehl_glue(base: AffinoidModel, rank: int,
               transition: List[List[Laurent]]) -> dict:
    """Glue free chart modules along an overlap isomorphism.

    Admissible transitions are G = G0 + N with G0 a constant matrix that is
    invertible over the residue field and |N| < 1; the Birkhoff-style
    iteration then factors G = G0 * G_plus * G_minus and H^0 is free of the
    same rank, recovering both chart modules on re-localization.
    """
    ctx = base.ctx
    n = rank
    window = base.D_A
    # admissibility: constant part invertible mod pi, remainder small
    G0 = [[transition[i][j].get(0, ctx.zero()) for j in range(n)] for i in range(n)]
    rest_val = INF_PIVAL
    for i in range(n):
        for j in range(n):
            for k, c in transition[i][j].items():
                v = c.val
                if v is None:
                    continue
                if k == 0:
                    continue
                rest_val = min(rest_val, v)
            c0 = G0[i][j]
            if c0.val is not None and c0.val < 0:
                raise NonInvertibleTransition("transition exceeds unit Gauss norm")
    try:
        G0inv = linalg.inverse_padic(G0, ctx)
    except PrecisionExhausted:
        raise NonInvertibleTransition("constant part is singular to precision")
    # invertible over O: the inverse must have unit Gauss norm as well
    if (linalg.mat_min_pival(G0) or 0) < 0 or (linalg.mat_min_pival(G0inv) or 0) < 0:
        raise NonInvertibleTransition("constant part has non-unit determinant")
    if rest_val <= 0:
        raise NonInvertibleTransition(
            "non-constant part of the transition is not topologically small")

    # W = G0^{-1} G = 1 + E with |E| < 1
    G0inv_l = [[{0: G0inv[i][j]} for j in range(n)] for i in range(n)]
    W = _lmat_mul(ctx, G0inv_l, transition, window)
    E = [[dict(W[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        E[i][i] = laurent_add(ctx, E[i][i], {0: -ctx.one()})
    Gp = [[{0: ctx.one()} if i == j else {} for j in range(n)] for i in range(n)]
    Gm = [[{0: ctx.one()} if i == j else {} for j in range(n)] for i in range(n)]
    rounds = 0
    while True:
        resid = _lmat_norm_pival(E)
        if resid is None or resid >= ctx.m:
            break
        if resid <= 0:
            raise NonContracting("glueing iteration failed to contract")
        Ep = [[laurent_split(E[i][j])[0] for j in range(n)] for i in range(n)]
        Em = [[laurent_neg(laurent_split(E[i][j])[1]) for j in range(n)]
              for i in range(n)]
        # W <- (1+Ep)^{-1} W (1+Em)^{-1}; the residual valuation at least
        # doubles each round
        inv_p = _lmat_neumann_inverse(ctx, Ep, window)
        inv_m = _lmat_neumann_inverse(ctx, Em, window)
        W = _lmat_mul(ctx, inv_p, _lmat_mul(ctx, W, inv_m, window), window)
        Gp = _lmat_mul(ctx, Gp, _lmat_add_id(ctx, Ep), window)
        Gm = _lmat_mul(ctx, _lmat_add_id(ctx, Em), Gm, window)
        E = [[dict(W[i][j]) for j in range(n)] for i in range(n)]
        for i in range(n):
            E[i][i] = laurent_add(ctx, E[i][i], {0: -ctx.one()})
        rounds += 1
        if rounds > ctx.m + 4:
            raise PrecisionExhausted("glueing iteration did not converge")

    # H^0 basis: m_plus^j = G0 Gp e_j (plus chart), m_minus^j = Gm^{-1} e_j
    G0l = [[{0: G0[i][j]} for j in range(n)] for i in range(n)]
    plus_basis = _lmat_mul(ctx, G0l, Gp, window)
    Em_f = [[dict(Gm[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        Em_f[i][i] = laurent_add(ctx, Em_f[i][i], {0: -ctx.one()})
    minus_basis = _lmat_neumann_inverse(ctx, Em_f, window)
    # residual of the glueing identity res(m_+) = G res(m_-)
    check = _lmat_mul(ctx, transition, minus_basis, window)
    defect = INF_PIVAL
    for i in range(n):
        for j in range(n):
            d = laurent_add(ctx, plus_basis[i][j], laurent_neg(check[i][j]))
            v = laurent_norm_pival(d)
            if v is not None:
                defect = min(defect, v)
    # recovered ranks: the chart components of the basis must be invertible
    plus_const = [[plus_basis[i][j].get(0, ctx.zero()) for j in range(n)]
                  for i in range(n)]
    minus_const = [[minus_basis[i][j].get(0, ctx.zero()) for j in range(n)]
                   for i in range(n)]
    rank_plus = linalg.echelonize(plus_const).rank
    rank_minus = linalg.echelonize(minus_const).rank
    return {
        "rank": n,
        "rounds": rounds,
        "glueing_defect_pival": None if defect >= INF_PIVAL else defect,
        "recovered_rank_plus": rank_plus,
        "recovered_rank_minus": rank_minus,
        "plus_basis": plus_basis,
        "minus_basis": minus_basis,
    }


# -- open-mapping surrogate ------------------------------------------------------


def quotient_norm_bounds(ctx: PadicContext, T: List[List[PadicScalar]],
                         samples: int = 5, seed: int = 7) -> dict:
    """Two-sided comparison of image norm and quotient norm for a surjection
    of finite C(I) models: |y|/|T| <= inf{|x| : Tx = y} <= C |y| with C from
    the valuation-pivoted section."""
    import random
    rng = random.Random(seed)
    nrows, ncols = len(T), len(T[0])
    ech = linalg.echelonize(T)
    if ech.rank < nrows:
        raise ValidationError("map is not surjective to precision")
    Tnorm = linalg.mat_min_pival(T) or 0
    worst_ratio = None
    for _ in range(samples):
        y = [ctx.from_int(rng.randrange(-ctx.p ** 3, ctx.p ** 3)) for _ in range(nrows)]
        # minimal-ish solution through the pivot structure
        aug_rows = [list(T[i]) + [y[i]] for i in range(nrows)]
        x = _pivot_section(ctx, aug_rows, ncols)
        ynorm = min((c.val for c in y if c.val is not None), default=None)
        xnorm = min((c.val for c in x if c.val is not None), default=None)
        if ynorm is None or xnorm is None:
            continue
        ratio = xnorm - ynorm  # pi-digit exponent of |x| / |y|
        if worst_ratio is None or ratio < worst_ratio:
            worst_ratio = ratio
    return {
        "map_norm_pival": Tnorm,
        "section_constant_pival": worst_ratio,
        "two_sided": worst_ratio is not None,
    }


def _pivot_section(ctx, aug_rows, ncols):
    rows = [list(r) for r in aug_rows]
    n = len(rows)
    piv = []
    for step in range(n):
        best = None
        for i in range(step, n):
            for j in range(ncols):
                if j in [c for _, c in piv]:
                    continue
                a = rows[i][j]
                if a.val is not None and (best is None or a.val < best[0]):
                    best = (a.val, i, j)
        if best is None:
            raise PrecisionExhausted("section construction failed")
        _, pi_, pj = best
        rows[step], rows[pi_] = rows[pi_], rows[step]
        inv = rows[step][pj].inverse()
        rows[step] = [a * inv for a in rows[step]]
        for i in range(n):
            if i != step and not rows[i][pj].is_zero():
                f = rows[i][pj]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[step])]
        piv.append((step, pj))
    x = [ctx.zero() for _ in range(ncols)]
    for step, pj in piv:
        x[pj] = rows[step][ncols]
    return x
