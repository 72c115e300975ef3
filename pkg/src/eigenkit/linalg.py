"""Linear algebra helpers: valuation-pivoted elimination over p-adic scalars,
and exact integer/rational routines used as independent rank oracles.

The p-adic routines report a precision margin (relative digits of the worst
pivot) so callers can certify downstream claims; the exact routines work over
Q with integer inputs and never touch p-adic precision.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import PrecisionExhausted, ValidationError
from .padic import PadicContext, PadicScalar

Matrix = List[List[PadicScalar]]


# -- basic matrix ops ---------------------------------------------------------


def zeros(ctx: PadicContext, n: int, m: int) -> Matrix:
    return [[ctx.zero() for _ in range(m)] for _ in range(n)]


def identity(ctx: PadicContext, n: int) -> Matrix:
    out = zeros(ctx, n, n)
    for i in range(n):
        out[i][i] = ctx.one()
    return out


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = A[i][0] * B[0][j]
            for t in range(1, k):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(A: Matrix, v: Sequence[PadicScalar]) -> List[PadicScalar]:
    out = []
    for row in A:
        acc = row[0] * v[0]
        for t in range(1, len(v)):
            acc = acc + row[t] * v[t]
        out.append(acc)
    return out


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scalar(A: Matrix, c) -> Matrix:
    return [[a * c for a in row] for row in A]


def mat_min_pival(A: Matrix) -> Optional[int]:
    """pi-valuation of the largest entry (None if all zero to precision)."""
    best = None
    for row in A:
        for a in row:
            if a.val is not None and (best is None or a.val < best):
                best = a.val
    return best


def mat_zero_to_prec(A: Matrix, abs_prec: Optional[int] = None) -> bool:
    return all(a.is_zero() or (abs_prec is not None and a.val >= abs_prec)
               for row in A for a in row)


# -- valuation-pivoted elimination -------------------------------------------


class Echelon:
    """Gauss-Jordan data: reduced rows, pivot positions, precision margin."""

    def __init__(self, rows: Matrix, pivots: List[Tuple[int, int]], margin: Optional[int]):
        self.rows = rows
        self.pivots = pivots        # (row, col), in elimination order
        self.margin = margin        # min relative precision among pivots

    @property
    def rank(self) -> int:
        return len(self.pivots)


def echelonize(A: Matrix) -> Echelon:
    """Full-pivot Gauss-Jordan, choosing the minimal-valuation entry each step."""
    rows = [list(r) for r in A]
    if not rows:
        return Echelon(rows, [], None)
    ncols = len(rows[0])
    done_rows, done_cols = set(), set()
    pivots: List[Tuple[int, int]] = []
    margin: Optional[int] = None
    while True:
        best = None
        for i in range(len(rows)):
            if i in done_rows:
                continue
            for j in range(ncols):
                if j in done_cols:
                    continue
                a = rows[i][j]
                if a.val is not None and (best is None or a.val < best[0]):
                    best = (a.val, i, j)
        if best is None:
            break
        _, pi, pj = best
        piv = rows[pi][pj]
        margin = piv.rel_prec if margin is None else min(margin, piv.rel_prec)
        inv = piv.inverse()
        rows[pi] = [a * inv for a in rows[pi]]
        for i in range(len(rows)):
            if i == pi:
                continue
            f = rows[i][pj]
            if f.is_zero():
                continue
            rows[i] = [a - f * b for a, b in zip(rows[i], rows[pi])]
        done_rows.add(pi)
        done_cols.add(pj)
        pivots.append((pi, pj))
    return Echelon(rows, pivots, margin)


def kernel_padic(A: Matrix, ctx: PadicContext) -> Tuple[List[List[PadicScalar]], Optional[int]]:
    """Kernel basis (one vector per free column) and the precision margin."""
    if not A:
        return [], None
    ech = echelonize(A)
    ncols = len(A[0])
    pivot_by_col = {c: r for r, c in ech.pivots}
    free_cols = [j for j in range(ncols) if j not in pivot_by_col]
    basis = []
    for f in free_cols:
        vec = [ctx.zero() for _ in range(ncols)]
        vec[f] = ctx.one()
        for c, r in pivot_by_col.items():
            vec[c] = -ech.rows[r][f]
        basis.append(vec)
    return basis, ech.margin


def solve_padic(A: Matrix, b: Sequence[PadicScalar]) -> List[PadicScalar]:
    """Solve a square system; raises if a pivot is zero to precision."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    rows = aug
    piv_cols = []
    for step in range(n):
        best = None
        for i in range(step, n):
            for j in range(n):
                if j in piv_cols:
                    continue
                a = rows[i][j]
                if a.val is not None and (best is None or a.val < best[0]):
                    best = (a.val, i, j)
        if best is None:
            raise PrecisionExhausted("singular to working precision")
        _, pi, pj = best
        rows[step], rows[pi] = rows[pi], rows[step]
        inv = rows[step][pj].inverse()
        rows[step] = [a * inv for a in rows[step]]
        for i in range(n):
            if i != step and not rows[i][pj].is_zero():
                f = rows[i][pj]
                rows[i] = [a - f * b2 for a, b2 in zip(rows[i], rows[step])]
        piv_cols.append(pj)
    x = [None] * n
    for step, pj in enumerate(piv_cols):
        x[pj] = rows[step][n]
    return x


def inverse_padic(A: Matrix, ctx: PadicContext) -> Matrix:
    n = len(A)
    cols = []
    for j in range(n):
        e = [ctx.one() if i == j else ctx.zero() for i in range(n)]
        cols.append(solve_padic(A, e))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


# -- exact integer / rational routines ----------------------------------------


def sparse_fraction_kernel(rows: List[Dict[int, Fraction]], ncols: int
                           ) -> List[Dict[int, Fraction]]:
    """Kernel basis of a sparse exact matrix over Q (Gauss-Jordan)."""
    work = [dict(r) for r in rows if r]
    pivot_by_col: Dict[int, Dict[int, Fraction]] = {}
    while work:
        row = work.pop()
        # reduce against existing pivots
        changed = True
        while changed:
            changed = False
            for c in list(row):
                if c in pivot_by_col and row[c]:
                    f = row[c]
                    for cc, vv in pivot_by_col[c].items():
                        row[cc] = row.get(cc, Fraction(0)) - f * vv
                        if not row[cc]:
                            del row[cc]
                    changed = True
                    break
        row = {c: v for c, v in row.items() if v}
        if not row:
            continue
        # normalize on the sparsest... first column for determinism
        pc = min(row)
        pv = row[pc]
        row = {c: v / pv for c, v in row.items()}
        # back-eliminate pc from stored pivot rows
        for c0, r0 in pivot_by_col.items():
            if pc in r0:
                f = r0[pc]
                for cc, vv in row.items():
                    r0[cc] = r0.get(cc, Fraction(0)) - f * vv
                    if not r0[cc]:
                        del r0[cc]
        pivot_by_col[pc] = row
    free = [c for c in range(ncols) if c not in pivot_by_col]
    basis = []
    for f in free:
        vec: Dict[int, Fraction] = {f: Fraction(1)}
        for pc, prow in pivot_by_col.items():
            if f in prow:
                vec[pc] = -prow[f]
        basis.append(vec)
    return basis


def clear_denominators(vec: Dict[int, Fraction]) -> Dict[int, int]:
    from math import gcd, lcm
    den = 1
    for v in vec.values():
        den = lcm(den, v.denominator)
    ints = {c: int(v * den) for c, v in vec.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, abs(v))
    if g > 1:
        ints = {c: v // g for c, v in ints.items()}
    return ints


def bareiss_rank(M: List[List[int]]) -> int:
    """Fraction-free rank of an exact integer matrix (independent oracle)."""
    A = [row[:] for row in M]
    n = len(A)
    if n == 0:
        return 0
    m = len(A[0])
    rank = 0
    prev = 1
    row = 0
    for col in range(m):
        piv = None
        for i in range(row, n):
            if A[i][col]:
                piv = i
                break
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        for i in range(row + 1, n):
            for j in range(col + 1, m):
                A[i][j] = (A[i][j] * A[row][col] - A[i][col] * A[row][j]) // prev
            A[i][col] = 0
        prev = A[row][col]
        rank += 1
        row += 1
        if row == n:
            break
    return rank
