"""Truncated models of Iwahori induction: torus action, dilation operators
delta_i, lowering fields and theta operators, the algebraic subspace, the
compact U model and the slope classicity filter.

Functions on the lower-unipotent congruence block are modeled by polynomials
in the coordinates z_{k,l} (row k > column l, entries in pZ_p) of total
degree <= D.  The operators of interest are all degree-filtered, so the
truncation is exact on the retained range.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    IndexOutOfRange,
    NonIntegralPairing,
    NonUnitTorusPoint,
    NotAnEigenvector,
    TruncationTooSmall,
    ValidationError,
)
from . import linalg
from .padic import PadicContext, PadicScalar
from .series import monomial_key
from .spectral import CompactOperatorModel
from .weight import Character, eval_character

Pair = Tuple[int, int]
Monomial = Tuple[int, ...]


def coordinate_pairs(g: int) -> List[Pair]:
    """(k,l) with k > l, sorted by (k,l); fixes the variable order."""
    return [(k, l) for k in range(2, g + 1) for l in range(1, k)]


def monomial_basis(g: int, D: int) -> List[Monomial]:
    """Exponent vectors of total degree <= D in graded-lex order."""
    npairs = len(coordinate_pairs(g))
    monos: List[Monomial] = []

    def rec(prefix: List[int], budget: int, slots: int):
        if slots == 0:
            monos.append(tuple(prefix))
            return
        for a in range(budget + 1):
            rec(prefix + [a], budget - a, slots - 1)

    rec([], D, npairs)
    return sorted(monos, key=monomial_key)


class RootDatum:
    """Simple roots alpha_i = e_i - e_{i+1} of GL_g with the dot action."""

    def __init__(self, g: int):
        if g < 2:
            raise ValidationError("need g >= 2")
        self.g = g

    def alpha(self, i: int) -> Tuple[int, ...]:
        self._check(i)
        return tuple(1 if j == i - 1 else (-1 if j == i else 0)
                     for j in range(self.g))

    def pairing(self, ks: Sequence[int], i: int) -> int:
        """<kappa, alpha_i^vee> = k_i - k_{i+1}."""
        self._check(i)
        return ks[i - 1] - ks[i]

    def dot(self, ks: Sequence[int], i: int) -> Tuple[int, ...]:
        """s_alpha_i . kappa = kappa - (<kappa,alpha^vee>+1) alpha_i."""
        n = self.pairing(ks, i) + 1
        a = self.alpha(i)
        return tuple(k - n * ai for k, ai in zip(ks, a))

    def dot_via_rho(self, ks: Sequence[int], i: int) -> Tuple[Fraction, ...]:
        """w.lambda = w(lambda+rho)-rho for the simple reflection (test route)."""
        self._check(i)
        rho = [Fraction(self.g - 1, 2) - j for j in range(self.g)]
        v = [Fraction(k) + r for k, r in zip(ks, rho)]
        v[i - 1], v[i] = v[i], v[i - 1]
        return tuple(x - r for x, r in zip(v, rho))

    def _check(self, i: int):
        if not 1 <= i <= self.g - 1:
            raise IndexOutOfRange(f"simple root index {i} outside 1..{self.g - 1}")


class InducedFunction:
    """Truncated polynomial in the z_{k,l} with a weight tag."""

    __slots__ = ("ctx", "g", "weight", "D", "w", "coeffs")

    def __init__(self, ctx: PadicContext, g: int, weight: Optional[Character],
                 D: int, coeffs: Optional[Dict[Monomial, PadicScalar]] = None,
                 w=None):
        self.ctx = ctx
        self.g = g
        self.weight = weight
        self.D = D
        self.w = Fraction(w) if w is not None else None
        npairs = len(coordinate_pairs(g))
        self.coeffs: Dict[Monomial, PadicScalar] = {}
        if coeffs:
            for mono, c in coeffs.items():
                mono = tuple(mono)
                if len(mono) != npairs:
                    raise ValidationError("monomial arity mismatch")
                if sum(mono) > D:
                    raise ValidationError("degree bound exceeded")
                if c.is_zero() and c.abs_prec >= ctx.m:
                    continue
                self.coeffs[mono] = c

    @classmethod
    def monomial(cls, ctx: PadicContext, g: int, weight, D: int,
                 mono: Monomial, coeff=None) -> "InducedFunction":
        c = coeff if coeff is not None else ctx.one()
        if isinstance(c, int):
            c = ctx.from_int(c)
        return cls(ctx, g, weight, D, {tuple(mono): c})

    def replace(self, coeffs=None, weight=None) -> "InducedFunction":
        return InducedFunction(self.ctx, self.g,
                               weight if weight is not None else self.weight,
                               self.D,
                               coeffs if coeffs is not None else self.coeffs,
                               w=self.w)

    def items(self):
        return sorted(self.coeffs.items(), key=lambda kv: monomial_key(kv[0]))

    def coeff(self, mono: Monomial) -> PadicScalar:
        return self.coeffs.get(tuple(mono), self.ctx.zero())

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def gauss_pival(self, radius_pival: int = None) -> Optional[int]:
        """Norm exponent at polydisc radius p^{-1}: min(v(c) + e|M|) pi-digits."""
        r = self.ctx.e if radius_pival is None else radius_pival
        best = None
        for mono, c in self.coeffs.items():
            if c.val is None:
                continue
            cand = c.val + r * sum(mono)
            if best is None or cand < best:
                best = cand
        return best

    def __add__(self, other):
        if not isinstance(other, InducedFunction):
            return NotImplemented
        out = dict(self.coeffs)
        for mono, c in other.coeffs.items():
            out[mono] = out[mono] + c if mono in out else c
        return self.replace(coeffs=out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "InducedFunction":
        if isinstance(c, int):
            c = self.ctx.from_int(c)
        return self.replace(coeffs={m: v * c for m, v in self.coeffs.items()})

    def eq_prec(self, other, abs_prec: Optional[int] = None) -> bool:
        d = self - other
        return all(v.is_zero() or (abs_prec is not None and v.val >= abs_prec)
                   for v in d.coeffs.values())

    def __repr__(self):
        return f"InducedFunction(g={self.g}, D={self.D}, {len(self.coeffs)} terms)"


# -- dilation operators -------------------------------------------------------


def dilation_exponents(g: int, i: int) -> Dict[Pair, int]:
    """n_{k,l} for d_i: 1 when k >= g-i+1 and l <= g-i, else 0."""
    if not 1 <= i <= g:
        raise IndexOutOfRange(f"delta index {i} outside 1..{g}")
    return {(k, l): (1 if k >= g - i + 1 and l <= g - i else 0)
            for (k, l) in coordinate_pairs(g)}


def delta_slope(g: int, i: int, mono: Monomial) -> int:
    """p-adic valuation of the delta_i eigenvalue on z^mono."""
    n = dilation_exponents(g, i)
    pairs = coordinate_pairs(g)
    return sum(n[pr] * m for pr, m in zip(pairs, mono))


def u_weight(g: int, mono: Monomial) -> int:
    """Composite scaling exponent: sum (k-l) * M_{k,l} (slope of prod delta_i)."""
    pairs = coordinate_pairs(g)
    return sum((k - l) * m for (k, l), m in zip(pairs, mono))


def delta_i(i: int, f: InducedFunction) -> InducedFunction:
    """Substitute z_{k,l} -> p^{n_{k,l}} z_{k,l}; norm non-increasing."""
    g, ctx = f.g, f.ctx
    out = {}
    for mono, c in f.coeffs.items():
        s = delta_slope(g, i, mono)
        out[mono] = c * ctx.pi_pow(ctx.e * s) if s else c
    return f.replace(coeffs=out)


# -- torus action -------------------------------------------------------------


def torus_act(t: Sequence, f: InducedFunction) -> InducedFunction:
    """Diagonal action: z^M picks up weight(t) * prod (t_k t_l^{-1})^{M_{k,l}}."""
    ctx, g = f.ctx, f.g
    ts = []
    for ti in t:
        x = ctx.from_int(ti) if isinstance(ti, int) else ti
        if x.val is None or x.val != 0:
            raise NonUnitTorusPoint("torus point must have unit coordinates")
        ts.append(x)
    wfac = eval_character(f.weight, ts) if f.weight is not None else ctx.one()
    pairs = coordinate_pairs(g)
    ratios = {pr: ts[pr[0] - 1] / ts[pr[1] - 1] for pr in pairs}
    out = {}
    for mono, c in f.coeffs.items():
        fac = wfac
        for pr, m in zip(pairs, mono):
            if m:
                fac = fac * ratios[pr] ** m
        out[mono] = c * fac
    return f.replace(coeffs=out)


def torus_monomial_pival(g: int, mono: Monomial) -> int:
    return 0  # torus factors are units; kept for interface symmetry


# -- lowering fields and theta ------------------------------------------------


def apply_lowering_exact(g: int, i: int, table: Dict[Monomial, object]
                         ) -> Dict[Monomial, object]:
    """One application of d/dz_{i+1,i} + sum_{k>i+1} z_{k,i+1} d/dz_{k,i}
    on an exact (int/Fraction) coefficient table."""
    pairs = coordinate_pairs(g)
    idx = {pr: n for n, pr in enumerate(pairs)}
    out: Dict[Monomial, object] = {}

    def bump(mono, val):
        if val:
            out[mono] = out.get(mono, 0) + val

    j_main = idx[(i + 1, i)]
    for mono, c in table.items():
        if mono[j_main]:
            dm = list(mono)
            dm[j_main] -= 1
            bump(tuple(dm), c * mono[j_main])
        for k in range(i + 2, g + 1):
            j_src = idx[(k, i)]
            if mono[j_src]:
                dm = list(mono)
                dm[j_src] -= 1
                dm[idx[(k, i + 1)]] += 1
                bump(tuple(dm), c * mono[j_src])
    return {m: v for m, v in out.items() if v}


def lowering_field(g: int, i: int):
    """The vector field of X_{-alpha_i} on coefficient tables, as a callable:
    d/dz_{i+1,i} + sum_{k>i+1} z_{k,i+1} d/dz_{k,i}."""
    RootDatum(g)._check(i)

    def field(f: InducedFunction) -> InducedFunction:
        pairs = coordinate_pairs(g)
        idx = {pr: n for n, pr in enumerate(pairs)}
        out: Dict[Monomial, PadicScalar] = {}

        def bump(mono, val):
            out[mono] = out[mono] + val if mono in out else val

        j_main = idx[(i + 1, i)]
        for mono, c in f.coeffs.items():
            if mono[j_main]:
                dm = list(mono)
                dm[j_main] -= 1
                bump(tuple(dm), c * mono[j_main])
            for k in range(i + 2, g + 1):
                j_src = idx[(k, i)]
                if mono[j_src]:
                    dm = list(mono)
                    dm[j_src] -= 1
                    dm[idx[(k, i + 1)]] += 1
                    bump(tuple(dm), c * mono[j_src])
        return f.replace(coeffs=out)

    return field


def dot_character(kappa: Character, i: int, n: int) -> Character:
    """Weight retag s_alpha_i . kappa = kappa - n*alpha_i (n = pairing+1)."""
    ctx = kappa.ctx
    rd = RootDatum(kappa.g)
    if kappa.algebraic is not None:
        return Character.from_algebraic(ctx, rd.dot(kappa.algebraic, i))
    a = rd.alpha(i)
    base = ctx.from_int(1 + ctx.p)
    chi = [(c - n * ai) % (ctx.p - 1) for c, ai in zip(kappa.chi, a)]
    s = [si * base ** (-n * ai) for si, ai in zip(kappa.s, a)]
    return Character(ctx, chi, s)


def theta_alpha(i: int, kappa: Character, f: InducedFunction,
                pairing: Optional[int] = None) -> InducedFunction:
    """Theta_alpha = (X_{-alpha_i})^{<kappa,alpha^vee>+1}, retagged s_alpha.kappa."""
    rd = RootDatum(f.g)
    if pairing is None:
        if kappa.algebraic is None:
            raise NonIntegralPairing(
                "theta needs an algebraic weight or an explicit integer pairing")
        pairing = rd.pairing(kappa.algebraic, i)
    n = pairing + 1
    if n < 0:
        raise NonIntegralPairing(f"pairing+1 = {n} is negative")
    field = lowering_field(f.g, i)
    out = f
    for _ in range(n):
        out = field(out)
    return out.replace(weight=dot_character(kappa, i, n))


def theta_columns_exact(g: int, i: int, n: int, D: int,
                        basis: Optional[List[Monomial]] = None
                        ) -> Dict[Monomial, Dict[Monomial, int]]:
    """Integer matrix of (lowering_i)^n on the degree-<=D monomial basis,
    column by column (source monomial -> target table)."""
    basis = basis if basis is not None else monomial_basis(g, D)
    cols = {}
    for mono in basis:
        table = {mono: 1}
        for _ in range(n):
            table = apply_lowering_exact(g, i, table)
        cols[mono] = table
    return cols


# -- algebraic subspace and BGG check ----------------------------------------


def weyl_dimension(ks: Sequence[int]) -> int:
    """dim V_kappa = prod_{i<j} (k_i - k_j + j - i)/(j - i)."""
    g = len(ks)
    num = 1
    den = 1
    for i in range(g):
        for j in range(i + 1, g):
            num *= ks[i] - ks[j] + (j - i)
            den *= j - i
    return num // den


def _theta_rows(g: int, ks: Sequence[int], D: int, basis: List[Monomial]
                ) -> List[Dict[int, Fraction]]:
    """Stacked theta matrices as sparse rows over the source-monomial index."""
    rd = RootDatum(g)
    col_index = {m: j for j, m in enumerate(basis)}
    rows: List[Dict[int, Fraction]] = []
    for i in range(1, g):
        n = rd.pairing(ks, i) + 1
        if n < 0:
            raise NonIntegralPairing("dominance required")
        cols = theta_columns_exact(g, i, n, D, basis)
        by_target: Dict[Monomial, Dict[int, Fraction]] = {}
        for src, table in cols.items():
            for tgt, val in table.items():
                by_target.setdefault(tgt, {})[col_index[src]] = Fraction(val)
        rows.extend(by_target.values())
    return rows


def algebraic_subspace(kappa: Character, D: int,
                       check_stability: bool = True) -> List[InducedFunction]:
    """Basis of the joint theta kernel = V_kappa on the truncated space.

    Exact integer kernel (theta matrices are integral on monomials); raises
    TruncationTooSmall when the dimension has not stabilized at D -> D+1.
    """
    if kappa.algebraic is None or not kappa.is_dominant():
        raise ValidationError("algebraic dominant weight required")
    ctx = kappa.ctx
    g, ks = kappa.g, kappa.algebraic
    basis = monomial_basis(g, D)
    rows = _theta_rows(g, ks, D, basis)
    kern = linalg.sparse_fraction_kernel(rows, len(basis))
    if check_stability:
        basis2 = monomial_basis(g, D + 1)
        rows2 = _theta_rows(g, ks, D + 1, basis2)
        kern2 = linalg.sparse_fraction_kernel(rows2, len(basis2))
        if len(kern2) != len(kern):
            raise TruncationTooSmall(
                f"kernel dim {len(kern)} at D={D} vs {len(kern2)} at D+1")
    out = []
    for vec in sorted((linalg.clear_denominators(v) for v in kern),
                      key=lambda d: sorted(d.items())):
        coeffs = {basis[j]: ctx.from_int(val) for j, val in vec.items()}
        out.append(InducedFunction(ctx, g, kappa, D, coeffs))
    return out


def bgg_check(kappa: Character, D: int) -> dict:
    """Verify ker(+Theta_alpha) = V_kappa on the truncation, d1 d0 = 0, and
    the delta/theta commutation identity.

    The commutation residual is measured in an internally elevated context
    sized for the dilation valuations at degree D (the operators are exact
    integer data, so the elevation certifies the identity rather than
    inventing digits)."""
    ctx = kappa.ctx
    g, ks = kappa.g, kappa.algebraic
    basis = monomial_basis(g, D)
    kernel = algebraic_subspace(kappa, D)
    # independent oracle: fraction-free rank of the dense stacked matrix
    rows = _theta_rows(g, ks, D, basis)
    dense = [[int(r.get(j, 0)) for j in range(len(basis))] for r in rows]
    rank = linalg.bareiss_rank(dense)
    oracle_dim = len(basis) - rank
    expected = weyl_dimension(ks)
    residual_zero = True
    margin = None
    for f in kernel:
        for i in range(1, g):
            img = theta_alpha(i, kappa, f)
            if not img.is_zero():
                residual_zero = False
            m = min((c.abs_prec for c in img.coeffs.values()), default=ctx.m)
            margin = m if margin is None else min(margin, m)
    commutation_exact = _commutation_residual(kappa, D)
    return {
        "kernel_dim": len(kernel),
        "oracle_dim": oracle_dim,
        "expected_dim": expected,
        "d1_after_d0_zero": residual_zero,
        "commutation_exact": commutation_exact,
        "precision_margin": margin if margin is not None else ctx.m,
        "degree": D,
        "basis_size": len(basis),
    }


def _commutation_residual(kappa: Character, D: int) -> bool:
    """delta_{g-i} Theta_i = p^{k_{i+1}-k_i-1} Theta_i delta_{g-i} on the basis."""
    ctx = kappa.ctx
    g, ks = kappa.g, kappa.algebraic
    spread = max(abs(ks[i] - ks[i + 1]) for i in range(g - 1)) if g > 1 else 0
    wctx = ctx.with_precision(ctx.e * (2 * D + 2 * spread + 6) + ctx.m)
    wkap = Character.from_algebraic(wctx, ks)
    for i in range(1, g):
        factor = wctx.from_int(wctx.p) ** (ks[i] - ks[i - 1] - 1)
        for mono in monomial_basis(g, D):
            f = InducedFunction.monomial(wctx, g, wkap, D, mono)
            lhs = delta_i(g - i, theta_alpha(i, wkap, f))
            rhs = theta_alpha(i, wkap, delta_i(g - i, f)).scale(factor)
            if not lhs.eq_prec(rhs):
                return False
    return True


# -- compact U model ----------------------------------------------------------


def compact_u_matrix(ctx: PadicContext, g: int, D: int,
                     twist: Optional[Tuple[Character, Sequence]] = None
                     ) -> CompactOperatorModel:
    """Matrix of prod_i delta_i on the monomial basis: diagonal with entry
    p^{sum (k-l) M_{k,l}} on z^M.  Column norms decay along the degree
    filtration; the tail bound after degree D is p^{-(D+1)}."""
    basis = monomial_basis(g, D)
    labels = list(basis)
    twist_factors = None
    if twist is not None:
        kappa, t = twist
        twist_factors = []
        ts = [ctx.from_int(x) if isinstance(x, int) else x for x in t]
        wfac = eval_character(kappa, ts)
        pairs = coordinate_pairs(g)
        ratios = [ts[k - 1] / ts[l - 1] for (k, l) in pairs]
        for mono in basis:
            fac = wfac
            for r, m in zip(ratios, mono):
                if m:
                    fac = fac * r ** m
            twist_factors.append(fac)
    n = len(basis)
    mat = linalg.zeros(ctx, n, n)
    col_vals = []
    for j, mono in enumerate(basis):
        wgt = u_weight(g, mono)
        entry = ctx.pi_pow(ctx.e * wgt)
        if twist_factors is not None:
            entry = entry * twist_factors[j]
        mat[j][j] = entry
        col_vals.append(ctx.e * wgt)
    return CompactOperatorModel(ctx, mat, tail_pival=ctx.e * (D + 1),
                                column_pivals=col_vals, labels=labels)


# -- classicity ---------------------------------------------------------------


def classicity_bounds(ks: Sequence[int]) -> List[int]:
    """v_i = k_{g-i} - k_{g-i+1} + 1 for i = 1..g-1 (slope bounds per delta_i)."""
    g = len(ks)
    return [ks[g - i - 1] - ks[g - i] + 1 for i in range(1, g)]


def joint_delta_slopes(f: InducedFunction) -> List[int]:
    """Slopes of a joint delta-eigenvector; NotAnEigenvector if support mixes."""
    g = f.g
    slopes = []
    for i in range(1, g):
        vals = {delta_slope(g, i, m) for m, c in f.coeffs.items()
                if not c.is_zero()}
        if len(vals) > 1:
            raise NotAnEigenvector(
                f"support mixes delta_{i} eigenvalues {sorted(vals)}")
        slopes.append(vals.pop() if vals else 0)
    return slopes


def classicity_filter(kappa: Character, f: InducedFunction,
                      slopes: Optional[Sequence] = None) -> dict:
    """Slope criterion: slopes(delta_i) < v_i for all i forces Theta f = 0,
    hence membership in the algebraic subspace.  Returns a verdict report;
    when the bound fails, no claim is made."""
    if kappa.algebraic is None or not kappa.is_dominant():
        raise ValidationError("algebraic dominant weight required")
    actual = joint_delta_slopes(f)
    if slopes is not None:
        claimed = [Fraction(s) for s in slopes]
        scale = kappa.ctx.e
        if any(Fraction(a, scale) != c for a, c in zip(actual, claimed)):
            raise NotAnEigenvector(
                f"claimed slopes {claimed} do not match computed "
                f"{[Fraction(a, scale) for a in actual]}")
    bounds = classicity_bounds(kappa.algebraic)
    below = all(Fraction(a, kappa.ctx.e) < b for a, b in zip(actual, bounds))
    margin = min((c.abs_prec for c in f.coeffs.values()), default=kappa.ctx.m)
    report = {
        "slopes": [str(Fraction(a, kappa.ctx.e)) for a in actual],
        "bounds": [str(b) for b in bounds],
        "verdict": "no claim",
        "theta_vanishes": None,
        "precision_margin": margin,
    }
    if below:
        vanishes = all(theta_alpha(i, kappa, f).is_zero()
                       for i in range(1, f.g))
        report["verdict"] = "classical" if vanishes else "violation"
        report["theta_vanishes"] = vanishes
    return report


def isotypic_classical_subspace(kappa: Character, D: int) -> List[InducedFunction]:
    """Joint (delta, torus)-isotypic part with slopes below the classicity
    bounds, intersected with ker Theta; equals algebraic_subspace(kappa)."""
    ctx = kappa.ctx
    g, ks = kappa.g, kappa.algebraic
    basis = monomial_basis(g, D)
    bounds = classicity_bounds(ks)
    allowed = []
    for j, m in enumerate(basis):
        ok = all(delta_slope(g, i, m) < bounds[i - 1] for i in range(1, g))
        allowed.append(ok)
    rows = _theta_rows(g, ks, D, basis)
    for j, ok in enumerate(allowed):
        if not ok:
            rows.append({j: Fraction(1)})  # force coordinate to vanish
    kern = linalg.sparse_fraction_kernel(rows, len(basis))
    out = []
    for vec in sorted((linalg.clear_denominators(v) for v in kern),
                      key=lambda d: sorted(d.items())):
        coeffs = {basis[j]: ctx.from_int(val) for j, val in vec.items()}
        out.append(InducedFunction(ctx, g, kappa, D, coeffs))
    return out


def span_equal(a: Sequence[InducedFunction], b: Sequence[InducedFunction],
               D: int) -> bool:
    """Exact span comparison over Q of two integer-coefficient families."""
    if not a and not b:
        return True
    g = (a[0] if a else b[0]).g
    basis = monomial_basis(g, D)
    col = {m: j for j, m in enumerate(basis)}

    def rows_of(fs):
        rows = []
        for f in fs:
            row = {}
            for m, c in f.coeffs.items():
                row[col[m]] = Fraction(c.to_fraction())
            rows.append(row)
        return rows

    ra, rb = rows_of(a), rows_of(b)

    def rank(rows):
        if not rows:
            return 0
        return len(basis) - len(linalg.sparse_fraction_kernel(rows, len(basis)))

    return rank(ra) == rank(rb) == rank(ra + rb)


def torus_matrix(ctx: PadicContext, g: int, kappa: Optional[Character],
                 t: Sequence, D: int) -> List[List[PadicScalar]]:
    """Matrix of the torus action on the monomial basis (diagonal)."""
    basis = monomial_basis(g, D)
    probe = InducedFunction(ctx, g, kappa, D,
                            {m: ctx.one() for m in basis})
    acted = torus_act(t, probe)
    n = len(basis)
    mat = linalg.zeros(ctx, n, n)
    for j, m in enumerate(basis):
        mat[j][j] = acted.coeff(m)
    return mat
