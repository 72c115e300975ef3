"""Coleman spectral theory over a scalar field or a truncated Tate algebra:
Fredholm series of compact operators, Newton slopes, slope-<=h factorization
with coprimality certificates, Riesz projectors by polynomial functional
calculus, fiber eigendata and Hensel lifting of eigenfamilies.

Determinants are characteristic polynomials of finite truncations (Berkowitz,
division-free, so it runs unchanged over the Tate base); certified prefixes
come from tail bounds on the discarded columns.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import linalg
from .errors import (
    DivergentIteration,
    InsufficientPrecision,
    NonCommutingInput,
    NonSplitBlock,
    NotAnEigenvector,
    PrecisionLoss,
    PrefixTooShort,
    RamifiedPoint,
    SlopeOnBoundary,
    SpecializationOutsideDomain,
    TailBoundMissing,
    ValidationError,
)
from .padic import NewtonPolygon, PadicContext, PadicScalar, newton_polygon
from .series import TruncatedSeries

INF_PIVAL = 10 ** 9  # sentinel for an exactly-zero tail

BaseElem = Union[PadicScalar, TruncatedSeries]


class BanachModuleModel:
    """Orthonormalizable model C(I) with sup norm, or a projective direct
    factor of one presented by an explicit idempotent."""

    def __init__(self, ctx: PadicContext, labels: Sequence, base: str = "scalar",
                 idempotent: Optional[List[List[PadicScalar]]] = None):
        self.ctx = ctx
        self.labels = list(labels)
        self.base = base
        self.idempotent = idempotent
        if idempotent is not None:
            n = len(self.labels)
            if len(idempotent) != n:
                raise ValidationError("idempotent size mismatch")
            defect = linalg.mat_sub(linalg.mat_mul(idempotent, idempotent), idempotent)
            if not linalg.mat_zero_to_prec(defect):
                raise ValidationError("projective witness is not idempotent")

    @classmethod
    def orthonormalizable(cls, ctx: PadicContext, labels: Sequence) -> "BanachModuleModel":
        return cls(ctx, labels)

    @classmethod
    def projective(cls, ctx: PadicContext, labels: Sequence,
                   idempotent: List[List[PadicScalar]]) -> "BanachModuleModel":
        return cls(ctx, labels, idempotent=idempotent)

    @property
    def rank(self) -> int:
        return len(self.labels)

    def coord_norm_pival(self, vec: Sequence[PadicScalar]) -> Optional[int]:
        """Norm exponent: sup over coordinates = min pi-valuation."""
        best = None
        for c in vec:
            if c.val is not None and (best is None or c.val < best):
                best = c.val
        return best


class CompactOperatorModel:
    """Finite truncation of a compact operator: N x N matrix over the base,
    certified column valuations and a tail bound for the discarded columns."""

    def __init__(self, ctx: PadicContext, matrix: List[List[BaseElem]],
                 tail_pival: Optional[int] = None,
                 column_pivals: Optional[List[int]] = None,
                 labels: Optional[List] = None):
        self.ctx = ctx
        self.matrix = matrix
        self.N = len(matrix)
        self.tail_pival = tail_pival
        self.labels = labels
        self.base = "scalar"
        if self.N and isinstance(matrix[0][0], TruncatedSeries):
            self.base = "family"
        if column_pivals is None:
            column_pivals = []
            for j in range(self.N):
                best = None
                for i in range(self.N):
                    v = self._entry_pival(matrix[i][j])
                    if v is not None and (best is None or v < best):
                        best = v
                column_pivals.append(best if best is not None else INF_PIVAL)
        self.column_pivals = column_pivals
        self.scaling_pival = 0
        neg = min((v for v in self.column_pivals), default=0)
        if neg < 0:
            # rescale so that stored column norms are <= 1, recording the factor
            fac = ctx.pi_pow(-neg)
            self.matrix = [[x * fac for x in row] for row in self.matrix]
            self.column_pivals = [v - neg for v in self.column_pivals]
            self.scaling_pival = neg

    @staticmethod
    def _entry_pival(x: BaseElem) -> Optional[int]:
        if isinstance(x, TruncatedSeries):
            return x.gauss_pival()
        return x.val

    def truncate(self, n: int) -> "CompactOperatorModel":
        if n > self.N:
            raise ValidationError("cannot grow a truncation")
        tail = self.tail_pival
        dropped = self.column_pivals[n:]
        if dropped:
            tail = min([t for t in dropped] + ([tail] if tail is not None else []))
        return CompactOperatorModel(
            self.ctx, [row[:n] for row in self.matrix[:n]],
            tail_pival=tail, column_pivals=self.column_pivals[:n],
            labels=self.labels[:n] if self.labels else None)

    def specialize(self, point: Dict[str, PadicScalar]) -> "CompactOperatorModel":
        if self.base != "family":
            raise ValidationError("specialize applies to family operators")
        for v in point.values():
            if v.val is not None and v.val < 0:
                raise SpecializationOutsideDomain(
                    "specialization point must lie in the closed unit polydisc")
        mat = [[x.evaluate(point) for x in row] for row in self.matrix]
        return CompactOperatorModel(self.ctx, mat, tail_pival=self.tail_pival,
                                    labels=self.labels)


class FredholmSeries:
    """P(T) = det(1 - TU) on the truncation, with a certified prefix."""

    def __init__(self, ctx: PadicContext, coeffs: List[BaseElem],
                 certified_prefix: int, base: str = "scalar",
                 cert_pivals: Optional[List[int]] = None):
        self.ctx = ctx
        self.coeffs = coeffs
        self.certified_prefix = certified_prefix
        self.base = base
        self.cert_pivals = cert_pivals

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def specialize(self, point: Dict[str, PadicScalar]) -> "FredholmSeries":
        if self.base != "family":
            raise ValidationError("specialize applies to family series")
        for v in point.values():
            if v.val is not None and v.val < 0:
                raise SpecializationOutsideDomain(
                    "specialization point must lie in the closed unit polydisc")
        coeffs = [c.evaluate(point) if isinstance(c, TruncatedSeries) else c
                  for c in self.coeffs]
        return FredholmSeries(self.ctx, coeffs, self.certified_prefix,
                              base="scalar", cert_pivals=self.cert_pivals)

    def serialize(self) -> dict:
        from .weight import serialize_scalar
        if self.base != "scalar":
            raise ValidationError("serialize scalar series only")
        return {
            "coeffs": [serialize_scalar(c) for c in self.coeffs],
            "certified_prefix": self.certified_prefix,
        }


def _ring_one_zero(ctx: PadicContext, sample: BaseElem):
    if isinstance(sample, TruncatedSeries):
        one = TruncatedSeries.constant(ctx, sample.vars, sample.D, 1)
        return one, sample.zero_like()
    return ctx.one(), ctx.zero()


def berkowitz_charpoly(ctx: PadicContext, M: List[List[BaseElem]]) -> List[BaseElem]:
    """Coefficients a_0..a_N with det(1 - TM) = sum a_k T^k (division-free).

    Berkowitz builds det(XI - A) = sum_k a_k X^{N-k} for the leading principal
    submatrices via Toeplitz products; with a_k = (-1)^k e_k these are exactly
    the T-coefficients of det(1 - TM).
    """
    n = len(M)
    if n == 0:
        return [ctx.one()]
    one, zero = _ring_one_zero(ctx, M[0][0])
    V = [one]
    for k in range(1, n + 1):
        a = M[k - 1][k - 1]
        R = [M[k - 1][j] for j in range(k - 1)]
        C = [M[i][k - 1] for i in range(k - 1)]
        B = [[M[i][j] for j in range(k - 1)] for i in range(k - 1)]
        # Toeplitz column: t_0 = 1, t_1 = -a, t_j = -(R B^{j-2} C)
        t = [one, -a]
        w = C
        for _ in range(k - 1):
            dot = zero
            for x, y in zip(R, w):
                dot = dot + x * y
            t.append(-dot)
            w = [sum_prod(B[i], w, zero) for i in range(k - 1)]
        t = t[: k + 1]
        newV = []
        for i in range(k + 1):
            acc = zero
            for j in range(len(t)):
                if 0 <= i - j < len(V):
                    acc = acc + t[j] * V[i - j]
            newV.append(acc)
        V = newV
    return V


def sum_prod(row: Sequence[BaseElem], vec: Sequence[BaseElem], zero: BaseElem) -> BaseElem:
    acc = zero
    for x, y in zip(row, vec):
        acc = acc + x * y
    return acc


def _is_diagonal(matrix) -> bool:
    for i, row in enumerate(matrix):
        for j, x in enumerate(row):
            if i == j:
                continue
            if isinstance(x, TruncatedSeries):
                if not x.is_zero():
                    return False
            elif not x.is_zero():
                return False
    return True


def _diagonal_fredholm(ctx, matrix):
    sample = matrix[0][0] if matrix else ctx.one()
    one, _ = _ring_one_zero(ctx, sample)
    coeffs = [one]
    for i in range(len(matrix)):
        u = matrix[i][i]
        new = [None] * (len(coeffs) + 1)
        for n, c in enumerate(coeffs):
            new[n] = c if new[n] is None else new[n] + c
            t = -(c * u)
            new[n + 1] = t if new[n + 1] is None else new[n + 1] + t
        coeffs = new
    return coeffs


def fredholm_series(U: CompactOperatorModel, N: Optional[int] = None,
                    target_pival: Optional[int] = None,
                    force_berkowitz: bool = False) -> FredholmSeries:
    """det(1 - T U_N) with a certified prefix.

    A coefficient c_n of the infinite determinant differs from the truncated
    one only through minors meeting a discarded column, so the error valuation
    is at least tail + (sum of the n-1 smallest stored column valuations).
    The certified prefix is the longest initial range where that bound clears
    the precision target.  Diagonal truncations take the product shortcut
    unless force_berkowitz is set (the acceptance suite compares both routes).
    """
    if U.tail_pival is None:
        raise TailBoundMissing("compact model lacks a tail bound")
    model = U if N is None or N == U.N else U.truncate(N)
    target = target_pival if target_pival is not None else U.ctx.m
    if not force_berkowitz and _is_diagonal(model.matrix):
        coeffs = _diagonal_fredholm(U.ctx, model.matrix)
    else:
        coeffs = berkowitz_charpoly(U.ctx, model.matrix)
    sorted_cols = sorted(max(v, 0) for v in model.column_pivals)
    cert: List[int] = []
    acc = 0
    for n in range(len(coeffs)):
        if n >= 1:
            cert.append(min(model.tail_pival + acc, INF_PIVAL))
            if n - 1 < len(sorted_cols):
                acc += sorted_cols[n - 1]
        else:
            cert.append(INF_PIVAL)
    n0 = 0
    for n in range(1, len(coeffs)):
        if cert[n] >= target:
            n0 = n
        else:
            break
    return FredholmSeries(U.ctx, coeffs, n0, base=model.base, cert_pivals=cert)


def newton_slopes(P: FredholmSeries, use_certified_only: bool = False) -> NewtonPolygon:
    """Newton polygon of the certified prefix (or the full stored truncation)."""
    if P.base != "scalar":
        raise ValidationError("specialize the family first")
    upto = P.certified_prefix if use_certified_only else P.degree
    if use_certified_only and upto < 1:
        raise PrefixTooShort("no certified coefficients beyond the constant term")
    return newton_polygon(P.coeffs[: upto + 1])


# -- polynomial helpers in the T-convention (constant term 1) -----------------


def poly_mul(ctx: PadicContext, a: List[PadicScalar], b: List[PadicScalar],
             cap: Optional[int] = None) -> List[PadicScalar]:
    n = len(a) + len(b) - 1
    if cap is not None:
        n = min(n, cap + 1)
    out = [None] * n
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            if i + j >= n:
                continue
            p = ai * bj
            out[i + j] = p if out[i + j] is None else out[i + j] + p
    return [c if c is not None else ctx.zero() for c in out]


def poly_sub(ctx: PadicContext, a: List[PadicScalar], b: List[PadicScalar]) -> List[PadicScalar]:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else ctx.zero()
        y = b[i] if i < len(b) else ctx.zero()
        out.append(x - y)
    return out


def series_inverse_coeffs(ctx: PadicContext, a: List[PadicScalar], cap: int) -> List[PadicScalar]:
    """Inverse of a T-series with unit constant term, to degree cap."""
    inv = [a[0].inverse()]
    for n in range(1, cap + 1):
        acc = None
        for k in range(1, min(n, len(a) - 1) + 1):
            t = a[k] * inv[n - k]
            acc = t if acc is None else acc + t
        if acc is None:
            inv.append(ctx.zero())
        else:
            inv.append(-(inv[0] * acc))
    return inv


def _min_pival(coeffs: Sequence[PadicScalar], sigma_e_num: Fraction = None) -> Optional[Fraction]:
    best = None
    for n, c in enumerate(coeffs):
        if c.val is None:
            continue
        v = Fraction(c.val) + (sigma_e_num * n if sigma_e_num is not None else 0)
        if best is None or v < best:
            best = v
    return best


class SlopeFactorization:
    """P = Q R with slopes(Q) <= h < slopes(R), plus coprimality certificates.

    bezout_series: (a, b) with a Q + b R = 1 in the truncated series ring.
    bezout_monic: (astar, bstar) for the reversed pair (Q*, R_N*), the data
    the Riesz projector evaluates on the operator.
    """

    def __init__(self, ctx: PadicContext, h: Fraction, Q: List[PadicScalar],
                 R: List[PadicScalar], bezout_series, bezout_monic,
                 series_residual_pival: Optional[int],
                 monic_residual_pival: Optional[int]):
        self.ctx = ctx
        self.h = h
        self.Q = Q
        self.R = R
        self.bezout_series = bezout_series
        self.bezout_monic = bezout_monic
        self.series_residual_pival = series_residual_pival
        self.monic_residual_pival = monic_residual_pival

    @property
    def deg_Q(self) -> int:
        return len(self.Q) - 1


def slope_factor(P: FredholmSeries, h, side: Optional[str] = None) -> SlopeFactorization:
    """Hensel/Weierstrass factorization separating slopes <= h from > h.

    The factor Q is peeled off one slope block at a time: each block is
    rescaled to slope zero (grid slopes only shift valuations, so no auxiliary
    element of K is needed) where the unit-root split is perfectly
    conditioned, then the Newton pair iteration converges quadratically.
    """
    if P.base != "scalar":
        raise ValidationError("factor scalar series (specialize families first)")
    ctx = P.ctx
    h = Fraction(h)
    poly = newton_slopes(P)
    for s, _ in poly.slopes:
        if s == h:
            if side == "below":
                h = s - Fraction(1, 2 * ctx.e)
            elif side == "above":
                h = s + Fraction(1, 2 * ctx.e)
            else:
                raise SlopeOnBoundary(f"h = {h} is a Newton slope; pass side=")
    d = poly.mass_at_most(h)
    N = P.degree
    coeffs = P.coeffs
    one = ctx.one()
    if d == 0:
        return _certify(ctx, h, [one], list(coeffs), coeffs, N)
    if d == N:
        return _certify(ctx, h, list(coeffs), [one], coeffs, N)
    Q_total = [one]
    remaining = list(coeffs)
    mass_left = d
    while mass_left > 0:
        rp = newton_polygon(remaining)
        s0, d0 = rp.slopes[0]
        next_slope = rp.slopes[1][0] if len(rp.slopes) > 1 else None
        esv = s0 * ctx.e
        if esv.denominator != 1:
            raise InsufficientPrecision(
                f"slope {s0} is off the (1/e)Z grid; no rescaling available")
        esv = int(esv)
        scaled = [c * ctx.pi_pow(-n * esv) for n, c in enumerate(remaining)]
        gap = (next_slope - s0) if next_slope is not None else Fraction(1)
        Qb, Rb = _split_zero_slope(ctx, scaled, d0, gap)
        Qb = [c * ctx.pi_pow(n * esv) for n, c in enumerate(Qb)]
        Rb = [c * ctx.pi_pow(n * esv) for n, c in enumerate(Rb)]
        Q_total = poly_mul(ctx, Q_total, Qb, cap=N)
        remaining = Rb
        mass_left -= d0
    Q = Q_total[: d + 1]
    R = remaining
    return _certify(ctx, h, Q, R, coeffs, N)


def _split_zero_slope(ctx, coeffs, d, gap: Fraction):
    """Factor a series whose first d slopes are 0 and the rest are >= gap > 0."""
    N = len(coeffs) - 1
    one = ctx.one()
    sig_e = (gap / 2) * ctx.e
    Q = list(coeffs[: d + 1])
    R = [one] + [ctx.zero() for _ in range(N - d)]
    E = poly_sub(ctx, coeffs, poly_mul(ctx, Q, R, cap=N))
    last = _min_pival(E, sig_e)
    stall = 0
    for _ in range(2 * ctx.m + 10):
        if all(c.is_zero() for c in E):
            break
        s_corr, r_corr = _pair_correction(ctx, Q, R, E, d, N)
        Q = [a + b for a, b in zip(Q, s_corr + [ctx.zero()] * len(Q))]
        R = [a + b for a, b in zip(R, r_corr + [ctx.zero()] * len(R))]
        E = poly_sub(ctx, coeffs, poly_mul(ctx, Q, R, cap=N))
        cur = _min_pival(E, sig_e)
        if cur is None:
            continue
        if last is not None and cur <= last:
            stall += 1
            if stall >= 2:
                raise DivergentIteration(
                    f"slope split stalled at weighted valuation {cur}")
        else:
            stall = 0
        last = cur
    else:
        raise InsufficientPrecision("slope split failed to terminate")
    # keep the normalization Q(0) = 1 exact
    q0 = Q[0]
    Q = [c / q0 for c in Q]
    R = [c * q0 for c in R]
    return Q, R


def _pair_correction(ctx, Q, R, E, d, N):
    """Solve s R + r Q = E (deg s <= d with s_0 = 0, deg r <= N - d)."""
    ns, nr = d, N - d + 1
    rows = []
    for n in range(N + 1):
        row = []
        for i in range(1, d + 1):          # s_i, i = 1..d
            row.append(R[n - i] if 0 <= n - i < len(R) else ctx.zero())
        for j in range(nr):                # r_j
            row.append(Q[n - j] if 0 <= n - j < len(Q) else ctx.zero())
        rows.append(row)
    rhs = [E[n] if n < len(E) else ctx.zero() for n in range(N + 1)]
    sol = linalg.solve_padic(rows, rhs)
    s_corr = [ctx.zero()] + sol[:ns]
    r_corr = sol[ns:]
    return s_corr, r_corr


def _certify(ctx, h, Q, R, P_coeffs, N) -> SlopeFactorization:
    # series-level certificate: a = 0, b = R^{-1} mod T^{N+1}
    b = series_inverse_coeffs(ctx, R, N)
    a = [ctx.zero()]
    check = poly_mul(ctx, b, R, cap=N)
    check[0] = check[0] - 1
    res_series = INF_PIVAL
    for c in check:
        if c.val is not None:
            res_series = min(res_series, c.val)
    # monic-side certificate for the functional calculus
    d = len(Q) - 1
    bez_monic = None
    res_monic = None
    if 0 < d < N:
        Qs = list(reversed(Q))
        Rn = _ascending_quotient(ctx, P_coeffs, Q, N - d)
        Rs = list(reversed(Rn))
        try:
            astar, bstar = _monic_bezout(ctx, Qs, Rs)
            bez_monic = (astar, bstar, Rs)
            resid = poly_sub(ctx, poly_mul(ctx, astar, Qs), [ctx.one()])
            resid = [x + y for x, y in zip(
                resid + [ctx.zero()] * 8, poly_mul(ctx, bstar, Rs) + [ctx.zero()] * 8)]
            res_monic = INF_PIVAL
            for c in resid:
                if c.val is not None:
                    res_monic = min(res_monic, c.val)
        except Exception:
            bez_monic = None
    return SlopeFactorization(ctx, h, Q, R, (a, b), bez_monic,
                              res_series, res_monic)


def _ascending_quotient(ctx, P_coeffs, Q, deg_out):
    """(P / Q) in ascending powers, truncated at deg_out (Q(0) = 1)."""
    inv = series_inverse_coeffs(ctx, Q, deg_out + len(P_coeffs))
    prod = poly_mul(ctx, P_coeffs, inv, cap=deg_out)
    return prod[: deg_out + 1]


def _monic_bezout(ctx, Qs, Rs):
    """astar Qs + bstar Rs = 1 with deg astar < deg Rs, deg bstar < deg Qs."""
    dq, dr = len(Qs) - 1, len(Rs) - 1
    n = dq + dr
    rows = []
    for k in range(n):
        row = []
        for i in range(dr):     # astar coefficients
            row.append(Qs[k - i] if 0 <= k - i <= dq else ctx.zero())
        for j in range(dq):     # bstar coefficients
            row.append(Rs[k - j] if 0 <= k - j <= dr else ctx.zero())
        rows.append(row)
    rhs = [ctx.one()] + [ctx.zero() for _ in range(n - 1)]
    sol = linalg.solve_padic(rows, rhs)
    return sol[:dr], sol[dr:]


# -- Riesz projector ----------------------------------------------------------


def _poly_at_matrix(ctx, coeffs: List[PadicScalar], M) -> List[List[PadicScalar]]:
    n = len(M)
    out = linalg.mat_scalar(linalg.identity(ctx, n), coeffs[-1])
    for c in reversed(coeffs[:-1]):
        out = linalg.mat_mul(out, M)
        for i in range(n):
            out[i][i] = out[i][i] + c
    return out


def riesz_projector(U: CompactOperatorModel, fact: SlopeFactorization,
                    guard_pival: Optional[int] = None) -> List[List[PadicScalar]]:
    """Idempotent e = bstar(U) Rstar(U) with im e the slope-<=h part.

    On ker Q*(U) the Bezout identity forces bstar(U) Rstar(U) = 1, and on the
    complement R*(U) vanishes by Cayley-Hamilton, so e is the Riesz projector;
    defects beyond the guard raise PrecisionLoss.
    """
    ctx = U.ctx
    d = fact.deg_Q
    n = U.N
    if d == 0:
        return linalg.zeros(ctx, n, n)
    if d == n:
        return linalg.identity(ctx, n)
    if fact.bezout_monic is None:
        raise InsufficientPrecision("no monic Bezout certificate available")
    astar, bstar, Rs = fact.bezout_monic
    RU = _poly_at_matrix(ctx, Rs, U.matrix)
    BU = _poly_at_matrix(ctx, bstar, U.matrix)
    e = linalg.mat_mul(BU, RU)
    guard = guard_pival if guard_pival is not None else 4 * ctx.e
    idem = linalg.mat_sub(linalg.mat_mul(e, e), e)
    comm = linalg.mat_sub(linalg.mat_mul(e, U.matrix), linalg.mat_mul(U.matrix, e))
    for defect, name in ((idem, "e^2 - e"), (comm, "eU - Ue")):
        v = linalg.mat_min_pival(defect)
        if v is not None and v < ctx.m - guard:
            raise PrecisionLoss(f"{name} has valuation {v} < m - guard")
    return e


def projector_rank(ctx: PadicContext, e: List[List[PadicScalar]]) -> int:
    ech = linalg.echelonize(e)
    return ech.rank


def restrict_to_image(ctx: PadicContext, e, ops):
    """Basis of im e (pivot columns) and each operator restricted to it."""
    ech = linalg.echelonize(e)
    cols = sorted(c for _, c in ech.pivots)
    n = len(e)
    B = [[e[i][c] for c in cols] for i in range(n)]  # n x d
    # pick d independent rows of B by elimination on the transpose
    echT = linalg.echelonize([list(r) for r in zip(*B)])
    rows = sorted(c for _, c in echT.pivots)
    Bsq = [[B[r][j] for j in range(len(cols))] for r in rows]
    restricted = []
    for M in ops:
        MB = linalg.mat_mul(M, B)
        MBr = [[MB[r][j] for j in range(len(cols))] for r in rows]
        # solve Bsq * C = MBr column by column
        C = []
        for j in range(len(cols)):
            col = linalg.solve_padic(Bsq, [MBr[i][j] for i in range(len(rows))])
            C.append(col)
        restricted.append([[C[j][i] for j in range(len(cols))]
                           for i in range(len(cols))])
    return B, restricted


def char_series_of_matrix(ctx, M) -> List[PadicScalar]:
    return berkowitz_charpoly(ctx, M)


# -- fibers and families -------------------------------------------------------


def _simple_eigenvalue(ctx, P: FredholmSeries, slope: Fraction) -> Optional[PadicScalar]:
    """Eigenvalue of a multiplicity-one slope via an isolating factorization."""
    try:
        below = slope_factor(P, slope - Fraction(1, 2 * ctx.e))
        upto = slope_factor(P, slope + Fraction(1, 2 * ctx.e))
    except (DivergentIteration, InsufficientPrecision):
        return None
    # Q_upto = Q_below * (1 - lambda T): divide to isolate the linear factor
    q = _ascending_quotient(ctx, upto.Q, below.Q, 1)
    if len(q) < 2 or q[1].val is None:
        return None
    return -q[1]


def fiber_eigendata(U_family: CompactOperatorModel, point: Dict[str, PadicScalar],
                    h, resamples: int = 0) -> dict:
    """Specialize a family at a weight and list (eigenvalue, slope, mult) below h.

    Flatness surrogate: deg Q is re-checked at perturbed sample points when
    resamples > 0.
    """
    h = Fraction(h)
    U0 = U_family.specialize(point)
    P0 = fredholm_series(U0)
    fact = slope_factor(P0, h)
    polyQ = newton_polygon(fact.Q)
    records = []
    for slope, mult in polyQ.slopes:
        lam = None
        if mult == 1:
            lam = _simple_eigenvalue(U0.ctx, P0, slope)
        records.append({"slope": slope, "multiplicity": mult, "eigenvalue": lam})
    flat_degrees = []
    ctx = U0.ctx
    for k in range(resamples):
        pert = {name: v + ctx.pi_pow(ctx.e + k) for name, v in point.items()}
        Pk = fredholm_series(U_family.specialize(pert))
        flat_degrees.append(slope_factor(Pk, h).deg_Q)
    return {
        "records": records,
        "deg_Q": fact.deg_Q,
        "flat_degrees": flat_degrees,
        "flat": all(dg == fact.deg_Q for dg in flat_degrees),
    }


# -- series-matrix helpers for the family lift ---------------------------------


def _series_mat_mul(A, B, zero):
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = zero
            for t in range(k):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def _series_mat_inv(ctx, A, one, zero, D: int):
    """Inverse over K<S>/(deg > D): scalar inverse at S=0, then Newton."""
    n = len(A)
    A0 = [[x.constant_term() for x in row] for row in A]
    X0 = linalg.inverse_padic(A0, ctx)
    X = [[TruncatedSeries.constant(ctx, one.vars, one.D, X0[i][j])
          for j in range(n)] for i in range(n)]
    steps = 1
    while steps <= D:
        AX = _series_mat_mul(A, X, zero)
        two_m = [[(2 - AX[i][j]) if i == j else -AX[i][j]
                  for j in range(n)] for i in range(n)]
        X = _series_mat_mul(X, two_m, zero)
        steps *= 2
    return X


def eigen_family_lift(U_family: CompactOperatorModel, lam0: PadicScalar,
                      point: Optional[Dict[str, PadicScalar]] = None,
                      commuting: Optional[List] = None) -> dict:
    """Lift a simple finite-slope eigenvalue to a family over the Tate base.

    Newton iteration on the bordered system (U(S)v - lam v, ell(v) - 1); the
    unramifiedness surrogate (simple root with invertible bordered Jacobian at
    the fiber) is checked first and RamifiedPoint raised otherwise.
    """
    if U_family.base != "family":
        raise ValidationError("family operator required")
    ctx = U_family.ctx
    sample = U_family.matrix[0][0]
    vars_, D = sample.vars, sample.D
    one = TruncatedSeries.constant(ctx, vars_, D, 1)
    zero = one.zero_like()
    if point is None:
        point = {v: ctx.zero() for v in vars_}
    shifted = point and any(not v.is_zero() for v in point.values())
    if shifted:
        raise ValidationError("lift is centered at the origin of the chart")
    U0 = U_family.specialize(point)
    n = U0.N
    # simplicity check: kernel of (U0 - lam0) is one-dimensional and the
    # derivative of the fiber determinant at the root is nonzero to precision
    A0 = [[U0.matrix[i][j] - (lam0 if i == j else 0) for j in range(n)]
          for i in range(n)]
    kern, _ = linalg.kernel_padic(A0, ctx)
    if len(kern) != 1:
        raise RamifiedPoint(f"eigenspace dimension {len(kern)} != 1")
    P0 = fredholm_series(U0)
    dP = [P0.coeffs[k] * k for k in range(1, len(P0.coeffs))]
    tinv = lam0.inverse()
    acc = ctx.zero()
    tp = ctx.one()
    for c in dP:
        acc = acc + c * tp
        tp = tp * tinv
    if acc.val is None:
        raise RamifiedPoint("dP/dT vanishes at the fiber root to precision")
    v0 = kern[0]
    pivot = max(range(n), key=lambda i: -(v0[i].val if v0[i].val is not None else INF_PIVAL))
    v0 = [x / v0[pivot] for x in v0]
    # bordered Newton over the truncated Tate algebra
    v = [TruncatedSeries.constant(ctx, vars_, D, x) for x in v0]
    lam = TruncatedSeries.constant(ctx, vars_, D, lam0)
    for _ in range(max(2, D.bit_length() + 2)):
        Uv = [sum_prod(U_family.matrix[i], v, zero) for i in range(n)]
        F = [Uv[i] - lam * v[i] for i in range(n)]
        F.append(v[pivot] - 1)
        if all(f.is_zero() for f in F):
            break
        J = [[U_family.matrix[i][j] - (lam if i == j else zero)
              for j in range(n)] + [-v[i]] for i in range(n)]
        J.append([one if j == pivot else zero for j in range(n)] + [zero])
        Jinv = _series_mat_inv(ctx, J, one, zero, D)
        delta = [sum_prod(Jinv[i], F, zero) for i in range(n + 1)]
        v = [v[i] - delta[i] for i in range(n)]
        lam = lam - delta[n]
    Uv = [sum_prod(U_family.matrix[i], v, zero) for i in range(n)]
    resid = [Uv[i] - lam * v[i] for i in range(n)]
    res_pival = None
    for r in resid:
        g = r.gauss_pival()
        if g is not None:
            res_pival = g if res_pival is None else min(res_pival, g)
    if res_pival is not None and res_pival < ctx.m - 6 * ctx.e:
        raise DivergentIteration(f"family residual valuation {res_pival}")
    report = {"eigenvalue": lam, "eigenvector": v, "residual_pival": res_pival}
    if commuting:
        checks = []
        for phi in commuting:
            phiv = [sum_prod(phi[i], v, zero) for i in range(n)]
            mu = phiv[pivot]
            ok = all((phiv[i] - mu * v[i]).is_zero() for i in range(n))
            checks.append(ok)
        report["commuting_eigenfamily"] = checks
    return report


# -- joint eigensystems --------------------------------------------------------


def _extract_eigenvalue(ctx, C) -> Tuple[PadicScalar, int]:
    """Eigenvalue of a block believed isotypic: char series (1 - lam T)^mu."""
    P = berkowitz_charpoly(ctx, C)
    mu = len(C)
    c1 = P[1] if len(P) > 1 else ctx.zero()
    lam = -(c1 / ctx.from_int(mu))
    # verify the binomial pattern
    check = [ctx.one()]
    for _ in range(mu):
        check = poly_mul(ctx, check, [ctx.one(), -lam])
    for a, b in zip(P, check):
        if not a.eq_prec(b):
            raise NonSplitBlock("block characteristic series is not a binomial power")
    return lam, mu


def joint_eigensystems(ctx: PadicContext, ops: List[List[List[PadicScalar]]],
                       projector: List[List[PadicScalar]]) -> List[Tuple]:
    """Simultaneous eigenvalue tuples of commuting operators on im(projector).

    Splits recursively along Newton slopes of each operator; repeated tuples
    appear with multiplicity.  NonCommutingInput/NonSplitBlock on failure.
    """
    B, restricted = restrict_to_image(ctx, projector, ops)
    d = len(restricted[0]) if restricted else 0
    for i in range(len(restricted)):
        for j in range(i + 1, len(restricted)):
            comm = linalg.mat_sub(
                linalg.mat_mul(restricted[i], restricted[j]),
                linalg.mat_mul(restricted[j], restricted[i]))
            if not linalg.mat_zero_to_prec(comm):
                raise NonCommutingInput(
                    f"operators {i} and {j} do not commute on im e")

    results: List[Tuple] = []

    def split(mats: List, prefix: Tuple):
        dim = len(mats[0]) if mats else 0
        if not mats:
            results.append(prefix)
            return
        C = mats[0]
        rest = mats[1:]
        P = berkowitz_charpoly(ctx, C)
        poly = newton_polygon(P)
        slopes = poly.slopes
        if len(slopes) <= 1:
            lam, mu = _extract_eigenvalue(ctx, C)
            sub = _generalized_eigenspace(ctx, C, lam, rest)
            for _ in range(mu):
                if rest:
                    split(sub, prefix + (lam,))
                else:
                    results.append(prefix + (lam,))
            return
        Pf = FredholmSeries(ctx, P, len(P) - 1)
        cut = (slopes[0][0] + slopes[1][0]) / 2
        fact = slope_factor(Pf, cut)
        # project within the block and recurse on both parts
        Ublock = CompactOperatorModel(ctx, C, tail_pival=INF_PIVAL)
        e = riesz_projector(Ublock, fact, guard_pival=ctx.m)
        for part in (e, _complement(ctx, e)):
            Bp, restrict_all = restrict_to_image(ctx, part, [C] + rest)
            if restrict_all and len(restrict_all[0]) > 0:
                split(restrict_all, prefix)

    def _generalized_eigenspace(ctx, C, lam, rest):
        dim = len(C)
        A = [[C[i][j] - (lam if i == j else 0) for j in range(dim)]
             for i in range(dim)]
        Ak = linalg.identity(ctx, dim)
        for _ in range(dim):
            Ak = linalg.mat_mul(Ak, A)
        kern, _ = linalg.kernel_padic(Ak, ctx)
        if len(kern) != dim:
            raise NonSplitBlock("generalized eigenspace is a proper subspace")
        return [_restrict_matrix(ctx, M, kern) for M in rest]

    def _restrict_matrix(ctx, M, basis_vecs):
        cols = [list(v) for v in basis_vecs]
        n = len(M)
        d = len(cols)
        B = [[cols[j][i] for j in range(d)] for i in range(n)]
        echT = linalg.echelonize([list(r) for r in zip(*B)])
        rows = sorted(c for _, c in echT.pivots)
        Bsq = [[B[r][j] for j in range(d)] for r in rows]
        MB = linalg.mat_mul(M, B)
        MBr = [[MB[r][j] for j in range(d)] for r in rows]
        C = []
        for j in range(d):
            col = linalg.solve_padic(Bsq, [MBr[i][j] for i in range(d)])
            C.append(col)
        return [[C[j][i] for j in range(d)] for i in range(d)]

    split(restricted, tuple())
    results.sort(key=lambda tup: tuple(
        (x.val if x.val is not None else INF_PIVAL,
         tuple(x.digits())) for x in tup))
    return results


def _complement(ctx, e):
    n = len(e)
    out = [[-e[i][j] for j in range(n)] for i in range(n)]
    for i in range(n):
        out[i][i] = out[i][i] + 1
    return out


def eigensystem_csv(ctx: PadicContext, characters: List[Tuple]) -> str:
    """CSV table of joint eigensystems, one row per character.

    Columns: the operator index, then per-eigenvalue valuation and digits.
    """
    lines = ["character,operator,valuation,digits"]
    for row, tup in enumerate(characters):
        for op, lam in enumerate(tup):
            val = "inf" if lam.val is None else str(Fraction(lam.val, ctx.e))
            digits = " ".join(map(str, lam.digits()))
            lines.append(f"{row},{op},{val},{digits}")
    return "\n".join(lines) + "\n"
