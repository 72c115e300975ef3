"""Multivariate truncated power series over a p-adic context.

A TruncatedSeries holds polynomial data in named variables with all exponent
vectors of total degree <= D; it stands for a power series known modulo total
degree D+1 (and modulo the per-coefficient scalar precision).  Multiplication
of truncations is exact on the retained range, which is what makes these the
carrier for Tate-algebra and formal-character computations.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from .errors import ValidationError
from .padic import PadicContext, PadicScalar

Monomial = Tuple[int, ...]


def monomial_key(m: Monomial):
    """Graded-lex sort key; fixes every matrix and JSON layout."""
    return (sum(m), m)


class TruncatedSeries:
    __slots__ = ("ctx", "vars", "D", "coeffs")

    def __init__(self, ctx: PadicContext, vars: Sequence[str], D: int,
                 coeffs: Optional[Dict[Monomial, PadicScalar]] = None):
        self.ctx = ctx
        self.vars = tuple(vars)
        self.D = D
        self.coeffs: Dict[Monomial, PadicScalar] = {}
        if coeffs:
            for mono, c in coeffs.items():
                if len(mono) != len(self.vars):
                    raise ValidationError("exponent arity mismatch")
                if sum(mono) > D:
                    continue
                if c.is_zero() and c.abs_prec >= ctx.m:
                    continue  # cap-level zeros carry no information
                self.coeffs[mono] = c

    # -- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, ctx: PadicContext, vars: Sequence[str], D: int, value):
        if isinstance(value, PadicScalar):
            c = value
        elif isinstance(value, Fraction):
            c = ctx.from_fraction(value)
        else:
            c = ctx.from_int(value)
        zero = (0,) * len(tuple(vars))
        return cls(ctx, vars, D, {zero: c})

    @classmethod
    def variable(cls, ctx: PadicContext, vars: Sequence[str], D: int, name: str):
        vars = tuple(vars)
        i = vars.index(name)
        mono = tuple(1 if j == i else 0 for j in range(len(vars)))
        return cls(ctx, vars, D, {mono: ctx.one()})

    def zero_like(self) -> "TruncatedSeries":
        return TruncatedSeries(self.ctx, self.vars, self.D)

    # -- views --------------------------------------------------------------

    def items(self):
        return sorted(self.coeffs.items(), key=lambda kv: monomial_key(kv[0]))

    def coeff(self, mono: Monomial) -> PadicScalar:
        return self.coeffs.get(tuple(mono), self.ctx.zero())

    def constant_term(self) -> PadicScalar:
        return self.coeff((0,) * len(self.vars))

    def degree(self) -> int:
        return max((sum(m) for m in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def gauss_pival(self, weights: Optional[Mapping[str, int]] = None) -> Optional[int]:
        """min over coefficients of pival(c) + sum exp_i * w_i (pi-digit units).

        weights default to 0 (sup norm on the closed unit polydisc); None if
        every coefficient is zero to precision.
        """
        wvec = [0] * len(self.vars)
        if weights:
            wvec = [int(weights.get(v, 0)) for v in self.vars]
        best = None
        for mono, c in self.coeffs.items():
            if c.val is None:
                continue
            cand = c.val + sum(a * w for a, w in zip(mono, wvec))
            if best is None or cand < best:
                best = cand
        return best

    def min_abs_prec(self) -> int:
        """Certified absolute precision across stored coefficients."""
        return min((c.abs_prec for c in self.coeffs.values()), default=self.ctx.m)

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            if other.vars != self.vars or not other.ctx.same(self.ctx):
                raise ValidationError("series domain mismatch")
            return other
        if isinstance(other, (int, PadicScalar, Fraction)):
            v = other
            if isinstance(v, int):
                v = self.ctx.from_int(v)
            elif isinstance(v, Fraction):
                v = self.ctx.from_fraction(v)
            return TruncatedSeries.constant(self.ctx, self.vars, self.D, v)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        D = min(self.D, b.D)
        out = dict(self.coeffs)
        for mono, c in b.coeffs.items():
            out[mono] = out[mono] + c if mono in out else c
        return TruncatedSeries(self.ctx, self.vars, D, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.ctx, self.vars, self.D,
                               {m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, PadicScalar)):
            c = other if isinstance(other, PadicScalar) else self.ctx.from_int(other)
            return TruncatedSeries(self.ctx, self.vars, self.D,
                                   {m: v * c for m, v in self.coeffs.items()})
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        D = min(self.D, b.D)
        out: Dict[Monomial, PadicScalar] = {}
        for ma, ca in self.coeffs.items():
            da = sum(ma)
            for mb, cb in b.coeffs.items():
                if da + sum(mb) > D:
                    continue
                mono = tuple(x + y for x, y in zip(ma, mb))
                prod = ca * cb
                out[mono] = out[mono] + prod if mono in out else prod
        return TruncatedSeries(self.ctx, self.vars, D, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValidationError("series powers take nonnegative integers")
        result = TruncatedSeries.constant(self.ctx, self.vars, self.D, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scalar_div(self, c: PadicScalar) -> "TruncatedSeries":
        inv = c.inverse() if isinstance(c, PadicScalar) else self.ctx.from_int(c).inverse()
        return self * inv

    def inverse(self) -> "TruncatedSeries":
        """Inverse of a series with unit constant term (Newton iteration)."""
        c0 = self.constant_term()
        if c0.val is None or c0.val != 0:
            raise ValidationError("inverse needs a unit constant term")
        x = TruncatedSeries.constant(self.ctx, self.vars, self.D, c0.inverse())
        deg = 1
        while deg <= self.D:
            x = x * (2 - self * x)
            deg *= 2
        return x

    # -- substitution / evaluation ------------------------------------------

    def truncate(self, D: int) -> "TruncatedSeries":
        return TruncatedSeries(self.ctx, self.vars, min(D, self.D),
                               {m: c for m, c in self.coeffs.items() if sum(m) <= D})

    def substitute(self, mapping: Mapping[str, object]) -> "TruncatedSeries":
        """Substitute series or scalars for a subset of the variables.

        Remaining variables stay.  Tail-truncation certification is the
        caller's concern when constant terms are substituted.
        """
        subs = {}
        for name, val in mapping.items():
            if name not in self.vars:
                raise ValidationError(f"unknown variable {name}")
            if isinstance(val, TruncatedSeries):
                subs[name] = val
            else:
                subs[name] = TruncatedSeries.constant(self.ctx, self.vars, self.D, val)
        acc = self.zero_like()
        powers: Dict[Tuple[str, int], TruncatedSeries] = {}

        def var_power(name, k):
            if k == 0:
                return TruncatedSeries.constant(self.ctx, self.vars, self.D, 1)
            key = (name, k)
            if key not in powers:
                if name in subs:
                    base = subs[name]
                else:
                    base = TruncatedSeries.variable(self.ctx, self.vars, self.D, name)
                powers[key] = base ** k
            return powers[key]

        for mono, c in self.coeffs.items():
            term = TruncatedSeries.constant(self.ctx, self.vars, self.D, c)
            for name, k in zip(self.vars, mono):
                if k:
                    term = term * var_power(name, k)
            acc = acc + term
        return acc

    def evaluate(self, point: Mapping[str, PadicScalar]) -> PadicScalar:
        acc = self.ctx.zero()
        for mono, c in self.coeffs.items():
            term = c
            for name, k in zip(self.vars, mono):
                if k:
                    term = term * (point[name] ** k)
            acc = acc + term
        return acc

    def partial(self, name: str) -> "TruncatedSeries":
        i = self.vars.index(name)
        out: Dict[Monomial, PadicScalar] = {}
        for mono, c in self.coeffs.items():
            if mono[i] == 0:
                continue
            dm = tuple(a - 1 if j == i else a for j, a in enumerate(mono))
            term = c * mono[i]
            out[dm] = out[dm] + term if dm in out else term
        return TruncatedSeries(self.ctx, self.vars, self.D, out)

    def drop_vars(self, names: Iterable[str]) -> "TruncatedSeries":
        """Forget variables that no longer occur."""
        names = set(names)
        keep = [i for i, v in enumerate(self.vars) if v not in names]
        for mono in self.coeffs:
            if any(mono[i] for i in range(len(self.vars)) if i not in keep):
                raise ValidationError("variable still occurs")
        out = {}
        for mono, c in self.coeffs.items():
            out[tuple(mono[i] for i in keep)] = c
        return TruncatedSeries(self.ctx, tuple(self.vars[i] for i in keep), self.D, out)

    # -- comparison ----------------------------------------------------------

    def eq_prec(self, other, abs_prec: Optional[int] = None) -> bool:
        b = self._coerce(other)
        d = self - b
        return all(c.is_zero() or (abs_prec is not None and c.val >= abs_prec)
                   for c in d.coeffs.values())

    def __eq__(self, other):
        try:
            return self.eq_prec(other)
        except ValidationError:
            return NotImplemented

    __hash__ = None

    def __repr__(self):
        terms = []
        for mono, c in self.items()[:6]:
            mono_s = "*".join(f"{v}^{k}" for v, k in zip(self.vars, mono) if k) or "1"
            terms.append(f"({c!r})*{mono_s}")
        more = "..." if len(self.coeffs) > 6 else ""
        return f"TruncatedSeries[{'+'.join(terms)}{more}; D={self.D}]"
