"""Capped-precision arithmetic in a totally ramified extension of Q_p.

A context fixes an odd prime p, a ramification index e (uniformizer pi with
pi^e = p, v(pi) = 1/e, v(p) = 1) and an absolute precision cap of m pi-adic
digits.  Scalars are pi^val * unit with the unit stored as a coordinate
vector in the power basis 1, pi, ..., pi^{e-1}; valuations are integers
counted in pi-digits ("pival"), i.e. e times the p-adic valuation.

Precision is interval-style: each scalar carries the absolute pi-digit
precision it is known to, never exceeding the context cap, and operations
propagate it pessimistically.  Equality means agreement at the joint
warranted precision.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from . import _backend
from .errors import (
    AllCoefficientsZero,
    ContextMismatch,
    DivisionByZeroToPrecision,
    ExponentNotIntegral,
    NonUnitConstantTerm,
    NotOneUnit,
    OutsideConvergenceDomain,
    ValidationError,
    ZeroResidue,
)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _ilog(n: int, base: int) -> int:
    """floor(log_base(n)) for n >= 1."""
    k = 0
    while base ** (k + 1) <= n:
        k += 1
    return k


class PadicContext:
    """Arithmetic context: prime p, ramification e, precision cap m pi-digits."""

    __slots__ = ("p", "e", "m", "q", "pq", "kernel", "_pi", "_one", "_zero")

    def __init__(self, p: int, e: int = 1, m: int = 20):
        if not _is_prime(p) or p < 3:
            raise ValidationError(f"p must be an odd prime, got {p}")
        if e < 1 or m < 1:
            raise ValidationError("need e >= 1 and m >= 1")
        self.p = p
        self.e = e
        self.m = m
        # working modulus: one spare p-digit beyond what m pi-digits need
        self.q = (m + e - 1) // e + 1
        self.pq = p ** self.q
        self.kernel = _backend.select_kernel(p, e, self.pq)
        self._pi = None
        self._one = None
        self._zero = None

    @classmethod
    def default(cls, p: int = 5, m: int = 20) -> "PadicContext":
        """Context with e = 2(p-1), making 1/(p-1) and half-integers representable."""
        return cls(p, 2 * (p - 1), m)

    def same(self, other: "PadicContext") -> bool:
        return (self.p, self.e, self.m) == (other.p, other.e, other.m)

    def compatible(self, other: "PadicContext") -> bool:
        return (self.p, self.e) == (other.p, other.e)

    def with_precision(self, m: int) -> "PadicContext":
        return PadicContext(self.p, self.e, m)

    def __repr__(self):
        return f"PadicContext(p={self.p}, e={self.e}, m={self.m})"

    def __eq__(self, other):
        return isinstance(other, PadicContext) and self.same(other)

    def __hash__(self):
        return hash((self.p, self.e, self.m))

    # -- constructors ------------------------------------------------------

    def zero(self, abs_prec: Optional[int] = None) -> "PadicScalar":
        if abs_prec is None and self._zero is not None:
            return self._zero
        a = self.m if abs_prec is None else min(abs_prec, self.m)
        z = PadicScalar(self, None, (0,) * self.e, a, _normalized=True)
        if abs_prec is None:
            self._zero = z
        return z

    def one(self) -> "PadicScalar":
        if self._one is None:
            self._one = self.from_int(1)
        return self._one

    def pi(self) -> "PadicScalar":
        """The uniformizer."""
        if self._pi is None:
            if self.e == 1:
                self._pi = self.from_int(self.p)
            else:
                u = (1,) + (0,) * (self.e - 1)
                self._pi = PadicScalar(self, 1, u, min(self.m, 1 + self.m))
        return self._pi

    def from_int(self, n: int) -> "PadicScalar":
        if n == 0:
            return self.zero()
        t = self.kernel.vp(abs(n), self.p)
        unit = n // (self.p ** t)
        v = self.e * t
        u = (unit % self.pq,) + (0,) * (self.e - 1)
        return PadicScalar(self, v, u, min(self.m, v + self.m))

    def from_fraction(self, fr: Fraction) -> "PadicScalar":
        return self.from_int(fr.numerator) / self.from_int(fr.denominator)

    def pi_pow(self, k: int) -> "PadicScalar":
        """pi^k for any integer k."""
        if k >= 0:
            u = (1,) + (0,) * (self.e - 1)
            return PadicScalar(self, k, u, min(self.m, k + self.m))
        return self.one() / self.pi_pow(-k)

    def teichmuller(self, x: int) -> "PadicScalar":
        return teichmuller(self, x)


class PadicScalar:
    """Element pi^val * unit known modulo pi^abs_prec (val in pi-digits).

    val is None for an element indistinguishable from zero at abs_prec.
    """

    __slots__ = ("ctx", "val", "unit", "abs_prec")

    def __init__(self, ctx: PadicContext, val: Optional[int], unit: Tuple[int, ...],
                 abs_prec: int, _normalized: bool = False):
        self.ctx = ctx
        if _normalized or val is None:
            self.val = val
            self.unit = unit if val is not None else (0,) * ctx.e
            self.abs_prec = min(abs_prec, ctx.m)
            return
        k = ctx.kernel
        abs_prec = min(abs_prec, ctx.m, val + ctx.m)
        t = k.coord_pival(unit, ctx.p, ctx.e)
        if t is None or val + t >= abs_prec:
            self.val = None
            self.unit = (0,) * ctx.e
            self.abs_prec = abs_prec
            return
        if t:
            unit = k.coord_shift_down(unit, t, ctx.p, ctx.e)
            val += t
        rel = abs_prec - val
        self.val = val
        self.unit = k.coord_reduce(unit, rel, ctx.p, ctx.e)
        self.abs_prec = abs_prec

    # -- predicates and views ---------------------------------------------

    def is_zero(self) -> bool:
        """Zero at this scalar's own precision."""
        return self.val is None

    @property
    def pival(self) -> Optional[int]:
        return self.val

    @property
    def valuation(self):
        """Valuation as a Fraction (v(p) = 1), or +inf for zero-to-precision."""
        if self.val is None:
            return math.inf
        return Fraction(self.val, self.ctx.e)

    @property
    def rel_prec(self) -> int:
        return 0 if self.val is None else self.abs_prec - self.val

    def digits(self) -> List[int]:
        """pi-adic digits of the unit part (length = relative precision)."""
        if self.val is None:
            return []
        ctx = self.ctx
        w = list(self.unit)
        out = []
        for _ in range(self.rel_prec):
            d = w[0] % ctx.p
            out.append(d)
            w[0] -= d
            head = w[0] // ctx.p
            w = w[1:] + [head]
        return out

    def lift_to(self, ctx: PadicContext) -> "PadicScalar":
        """Reinterpret inside another context with the same (p, e).

        Never invents digits: the absolute precision is carried over (and
        clipped when the target cap is lower).
        """
        if not self.ctx.compatible(ctx):
            raise ContextMismatch("lift requires identical (p, e)")
        if self.val is None:
            return ctx.zero(min(self.abs_prec, ctx.m))
        return PadicScalar(ctx, self.val, self.unit, self.abs_prec)

    def to_fraction(self) -> Fraction:
        """Balanced rational representative, only for Z_p-part scalars."""
        ctx = self.ctx
        if self.val is None:
            return Fraction(0)
        if any(self.unit[1:]) or self.val % ctx.e:
            raise ValidationError("scalar is not in the Z_p part")
        u = self.unit[0]
        mod = ctx.p ** ((self.rel_prec + ctx.e - 1) // ctx.e)
        if u > mod // 2:
            u -= mod
        return Fraction(u) * Fraction(ctx.p) ** (self.val // ctx.e)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if not self.ctx.same(other.ctx):
                raise ContextMismatch(f"{self.ctx} vs {other.ctx}")
            return other
        if isinstance(other, int):
            return self.ctx.from_int(other)
        if isinstance(other, Fraction):
            return self.ctx.from_fraction(other)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        a, ctx, k = self, self.ctx, self.ctx.kernel
        if a.val is None:
            absb = min(b.abs_prec, a.abs_prec)
            if b.val is None:
                return ctx.zero(absb)
            return PadicScalar(ctx, b.val, b.unit, absb)
        if b.val is None:
            return PadicScalar(ctx, a.val, a.unit, min(a.abs_prec, b.abs_prec))
        v0 = min(a.val, b.val)
        ua = k.coord_shift_up(a.unit, a.val - v0, ctx.p, ctx.e, ctx.pq)
        ub = k.coord_shift_up(b.unit, b.val - v0, ctx.p, ctx.e, ctx.pq)
        return PadicScalar(ctx, v0, k.coord_add(ua, ub, ctx.pq),
                           min(a.abs_prec, b.abs_prec))

    __radd__ = __add__

    def __neg__(self):
        if self.val is None:
            return self
        return PadicScalar(self.ctx, self.val,
                           self.ctx.kernel.coord_neg(self.unit, self.ctx.pq),
                           self.abs_prec)

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        a, ctx = self, self.ctx
        if a.val is None or b.val is None:
            if a.val is None and b.val is None:
                return ctx.zero(a.abs_prec + b.abs_prec)
            z, nz = (a, b) if a.val is None else (b, a)
            return ctx.zero(z.abs_prec + nz.val)
        v = a.val + b.val
        abs_prec = min(a.abs_prec + b.val, b.abs_prec + a.val)
        u = ctx.kernel.coord_mul(a.unit, b.unit, ctx.p, ctx.e, ctx.pq)
        # product of units is a unit: valuation is exactly v
        return PadicScalar(ctx, v, u, abs_prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicScalar":
        if self.val is None:
            raise DivisionByZeroToPrecision(
                f"divisor is O(pi^{self.abs_prec})")
        ctx, k = self.ctx, self.ctx.kernel
        rel = self.rel_prec
        b = self.unit
        c0 = pow(b[0], -1, ctx.p)
        u = (c0,) + (0,) * (ctx.e - 1)
        prec = 1
        while prec < rel:
            # Hensel: u <- u(2 - b u), doubling pi-adic accuracy
            t = k.coord_mul(b, u, ctx.p, ctx.e, ctx.pq)
            two_minus = k.coord_sub((2,) + (0,) * (ctx.e - 1), t, ctx.pq)
            u = k.coord_mul(u, two_minus, ctx.p, ctx.e, ctx.pq)
            prec *= 2
        return PadicScalar(ctx, -self.val, u, -self.val + rel)

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self * b.inverse()

    def __rtruediv__(self, other):
        a = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        return a * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ctx.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparison --------------------------------------------------------

    def eq_prec(self, other, abs_prec: Optional[int] = None) -> bool:
        """Equality modulo pi^a at the joint warranted precision a."""
        b = self._coerce(other)
        a = min(self.abs_prec, b.abs_prec)
        if abs_prec is not None:
            a = min(a, abs_prec)
        d = self - b
        return d.val is None or d.val >= a

    def __eq__(self, other):
        try:
            return self.eq_prec(other)
        except (ContextMismatch, TypeError):
            return NotImplemented

    __hash__ = None

    def __repr__(self):
        if self.val is None:
            return f"O(pi^{self.abs_prec})"
        ds = self.digits()
        return f"pi^{self.val}*[{','.join(map(str, ds))}] + O(pi^{self.abs_prec})"


# -- transcendental kernels -------------------------------------------------


def _headroom(ctx: PadicContext, extra_digits: int) -> PadicContext:
    return ctx.with_precision(ctx.m + extra_digits)


def teichmuller(ctx: PadicContext, x: int) -> PadicScalar:
    """The (p-1)-th root of unity congruent to x mod pi, to precision m."""
    r = x % ctx.p
    if r == 0:
        raise ZeroResidue("no Teichmueller lift of 0")
    wctx = _headroom(ctx, ctx.e)
    t = wctx.from_int(r)
    for _ in range(wctx.m + 2):
        tp = t ** wctx.p
        if tp.eq_prec(t, wctx.m):
            break
        t = tp
    return t.lift_to(ctx)


def log_one_unit(x: PadicScalar) -> PadicScalar:
    """p-adic logarithm of a 1-unit (v(x-1) > 0)."""
    ctx = x.ctx
    y = x - 1
    if y.val is None:
        return ctx.zero(min(ctx.m, y.abs_prec))
    c = y.val
    if c <= 0:
        raise OutsideConvergenceDomain(f"v(x-1) = {c}/{ctx.e} <= 0")
    # term y^k/k: valuation k*c - e*vp(k); sizing the headroom for the
    # worst denominator among contributing terms
    kmax = (ctx.m // c) + 1
    pad = ctx.e * (_ilog(max(kmax, 1), ctx.p) + 2)
    wctx = _headroom(ctx, pad)
    yw = y.lift_to(wctx)
    target = min(ctx.m, y.abs_prec) + pad
    acc = wctx.zero(wctx.m)
    power = yw
    k = 1
    while power.val is not None and power.val < target:
        term = power / wctx.from_int(k)
        acc = acc + (term if k % 2 == 1 else -term)
        power = power * yw
        k += 1
    return acc.lift_to(ctx)


def exp_small(y: PadicScalar) -> PadicScalar:
    """p-adic exponential; requires v(y) > 1/(p-1)."""
    ctx = y.ctx
    if y.val is None:
        one = ctx.one()
        return PadicScalar(ctx, one.val, one.unit, min(one.abs_prec, y.abs_prec))
    c = y.val
    if c * (ctx.p - 1) <= ctx.e:
        raise OutsideConvergenceDomain(
            f"v(y) = {c}/{ctx.e} <= 1/(p-1)")
    # v(y^k/k!) >= k(c - e/(p-1)) since v(k!) <= (k-1)/(p-1); term valuations
    # dip at k = p^j, so the stopping index comes from this monotone envelope
    denom = c * (ctx.p - 1) - ctx.e  # > 0
    kstop = ((ctx.m + 1) * (ctx.p - 1)) // denom + 2
    pad = ctx.e * (kstop // (ctx.p - 1) + 2)
    wctx = _headroom(ctx, pad)
    yw = y.lift_to(wctx)
    acc = wctx.one()
    term = wctx.one()
    for k in range(1, kstop + 1):
        term = term * yw / wctx.from_int(k)
        acc = acc + term
    return acc.lift_to(ctx)


def _zp_digits(a: PadicScalar, count: int) -> List[int]:
    """Base-p digits of a Z_p-valued scalar (checked), lowest first."""
    ctx = a.ctx
    if a.val is None:
        return [0] * count
    if a.val < 0 or a.val % ctx.e or any(a.unit[1:]):
        raise ExponentNotIntegral(
            "exponent must lie in the Z_p part of the field")
    n = a.unit[0] * ctx.p ** (a.val // ctx.e)
    out = []
    for _ in range(count):
        n, d = divmod(n, ctx.p)
        out.append(d)
    return out


def one_unit_pow(s: PadicScalar, a: PadicScalar) -> PadicScalar:
    """s^a for a 1-unit s and a in Z_p.

    Uses the digit decomposition s^a = prod_j (s^{p^j})^{a_j}, which converges
    on the whole open disc B(1,1^-) of 1-units (the binomial series does not).
    Agrees with repeated multiplication for integer exponents.
    """
    ctx = s.ctx
    sm1 = s - 1
    if sm1.val is not None and sm1.val <= 0:
        raise NotOneUnit(f"v(s-1) = {sm1.val}/{ctx.e} <= 0")
    if isinstance(a, int):
        a = ctx.from_int(a)
    if a.val is None:
        # s^(O(pi^A)) = 1 + O(pi^(A + v(s-1)))
        gain = ctx.m if sm1.val is None else sm1.val
        one = ctx.one()
        return PadicScalar(ctx, one.val, one.unit,
                           min(one.abs_prec, a.abs_prec + gain))
    wctx = _headroom(ctx, ctx.e)
    sw = s.lift_to(wctx)
    # available exponent digits bound the final certified precision
    avail = a.abs_prec // ctx.e if a.val >= 0 else 0
    digits = _zp_digits(a, max(avail, 1))
    result = wctx.one()
    sj = sw
    tail_val = None
    for j in range(len(digits) + wctx.m):
        dev = sj - 1
        if dev.val is None:
            # s^{p^j} is 1 + O(pi^A): remaining factors inject that bound
            if dev.abs_prec < wctx.m:
                tail_val = dev.abs_prec
            break
        if dev.val >= wctx.m:
            break
        if j >= len(digits):
            tail_val = dev.val  # digits exhausted: tail contributes O(pi^val)
            break
        for _ in range(digits[j]):
            result = result * sj
        sj = sj ** wctx.p
    out = result.lift_to(ctx)
    if tail_val is not None:
        out = PadicScalar(ctx, out.val, out.unit, min(out.abs_prec, tail_val))
    return out


# -- Newton polygons ---------------------------------------------------------


class NewtonPolygon:
    """Lower convex hull data: strictly increasing slopes with multiplicities."""

    def __init__(self, slopes: Sequence[Tuple[Fraction, int]],
                 vertices: Sequence[Tuple[int, Fraction]], certified: bool = True):
        self.slopes = list(slopes)
        self.vertices = list(vertices)
        self.certified = certified
        for (s1, m1), (s2, m2) in zip(self.slopes, self.slopes[1:]):
            if not s1 < s2:
                raise ValidationError("slopes must be strictly increasing")
            if m1 <= 0 or m2 <= 0:
                raise ValidationError("multiplicities must be positive")

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.slopes)

    def slope_list(self) -> List[Fraction]:
        out = []
        for s, m in self.slopes:
            out.extend([s] * m)
        return out

    def mass_at_most(self, h: Fraction) -> int:
        return sum(m for s, m in self.slopes if s <= h)

    def __repr__(self):
        return f"NewtonPolygon({self.slopes})"

    def __eq__(self, other):
        return isinstance(other, NewtonPolygon) and self.slopes == other.slopes


def newton_polygon(coeffs: Sequence[PadicScalar]) -> NewtonPolygon:
    """Polygon of sum c_n T^n from the lower hull of (n, v(c_n)).

    Zero-to-precision coefficients are skipped (treated as +inf); the result
    is flagged uncertified if any skipped coefficient's precision bound dips
    below the computed hull.
    """
    if not coeffs:
        raise AllCoefficientsZero("empty coefficient list")
    c0 = coeffs[0]
    if c0.val is None or c0.val != 0:
        raise NonUnitConstantTerm("normalize so that the constant term is a unit")
    e = c0.ctx.e
    pts = [(n, Fraction(c.val, e)) for n, c in enumerate(coeffs)
           if c.val is not None]
    if len(pts) == 1:
        return NewtonPolygon([], [(0, Fraction(0))])
    # monotone chain, keeping only the lower hull
    hull: List[Tuple[int, Fraction]] = []
    for x, y in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (x - x2) >= (y - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((x, y))
    slopes: List[Tuple[Fraction, int]] = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y2 - y1, x2 - x1)
        if slopes and slopes[-1][0] == s:
            slopes[-1] = (s, slopes[-1][1] + (x2 - x1))
        else:
            slopes.append((s, x2 - x1))
    certified = True
    for n, c in enumerate(coeffs):
        if c.val is None and n <= hull[-1][0]:
            bound = Fraction(c.abs_prec, e)
            if bound < _hull_height(hull, n):
                certified = False
    return NewtonPolygon(slopes, hull, certified)


def _hull_height(hull: List[Tuple[int, Fraction]], n: int) -> Fraction:
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= n <= x2:
            return y1 + Fraction(y2 - y1, x2 - x1) * (n - x1)
    return hull[-1][1]
