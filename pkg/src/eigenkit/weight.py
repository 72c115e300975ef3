"""Weight space machinery: characters of T(Z_p), the involution, analyticity
radii, and the formal universal character on a chart of the weight space.

A character is a finite-order part on T(Z/pZ) (exponents on Teichmueller
generators) together with g one-unit parameters s_i = kappa(1,..,1+p,..,1);
evaluation goes through the decomposition t = teich(t) * (1-unit) and
s^(log x / log(1+p)).
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import (
    NonUnitArgument,
    NotWAnalytic,
    UnrepresentableExponent,
    ValidationError,
)
from .padic import (
    PadicContext,
    PadicScalar,
    log_one_unit,
    one_unit_pow,
    teichmuller,
)
from .series import TruncatedSeries


class Character:
    """Point of the weight space for genus g."""

    __slots__ = ("ctx", "g", "chi", "s", "algebraic")

    def __init__(self, ctx: PadicContext, chi: Sequence[int],
                 s: Sequence[PadicScalar], algebraic: Optional[Sequence[int]] = None):
        self.ctx = ctx
        self.g = len(tuple(chi))
        if len(s) != self.g:
            raise ValidationError("chi and s must have the same length")
        self.chi = tuple(int(c) % (ctx.p - 1) for c in chi)
        self.s = tuple(s)
        for si in self.s:
            d = si - 1
            if d.val is not None and d.val <= 0:
                raise ValidationError("s parameters must be 1-units")
        self.algebraic = tuple(algebraic) if algebraic is not None else None
        if self.algebraic is not None:
            if len(self.algebraic) != self.g:
                raise ValidationError("algebraic tuple length mismatch")
            for k, c in zip(self.algebraic, self.chi):
                if (k - c) % (ctx.p - 1):
                    raise ValidationError("algebraic tag inconsistent with chi")

    @classmethod
    def from_algebraic(cls, ctx: PadicContext, ks: Sequence[int]) -> "Character":
        base = ctx.from_int(1 + ctx.p)
        s = [base ** int(k) for k in ks]
        return cls(ctx, [int(k) for k in ks], s, algebraic=ks)

    @classmethod
    def trivial(cls, ctx: PadicContext, g: int) -> "Character":
        return cls.from_algebraic(ctx, [0] * g)

    def is_dominant(self) -> bool:
        if self.algebraic is None:
            return False
        return all(a >= b for a, b in zip(self.algebraic, self.algebraic[1:]))

    def serialize(self) -> dict:
        return {
            "p": self.ctx.p,
            "e": self.ctx.e,
            "g": self.g,
            "chi": list(self.chi),
            "s": [serialize_scalar(si) for si in self.s],
            "algebraic": list(self.algebraic) if self.algebraic is not None else None,
        }

    def __repr__(self):
        if self.algebraic is not None:
            return f"Character(algebraic={self.algebraic})"
        return f"Character(chi={self.chi}, g={self.g})"


def serialize_scalar(x: PadicScalar) -> dict:
    return {
        "p": x.ctx.p,
        "e": x.ctx.e,
        "val": x.val,
        "digits": x.digits(),
        "abs": x.abs_prec,
    }


def _unit_scalar(ctx: PadicContext, t) -> PadicScalar:
    x = ctx.from_int(t) if isinstance(t, int) else t
    if x.val is None or x.val != 0:
        raise NonUnitArgument(f"torus coordinates must be units, got v={x.valuation}")
    return x


def eval_character(kappa: Character, t: Sequence) -> PadicScalar:
    """kappa(t) = chi(teich part) * prod s_i^(log x_i / log(1+p)).

    Always routes through the Teichmueller/one-unit decomposition so that the
    algebraic fast path never masks a defect in the analytic machinery.
    """
    ctx = kappa.ctx
    if len(t) != kappa.g:
        raise ValidationError("torus point arity mismatch")
    wctx = ctx.with_precision(ctx.m + 4 * ctx.e)
    units = []
    for ti in t:
        if isinstance(ti, int):
            units.append(_unit_scalar(wctx, ti))  # exact input: full headroom
        else:
            units.append(_unit_scalar(ctx, ti).lift_to(wctx))
    log_gen = log_one_unit(wctx.from_int(1 + ctx.p))
    acc = wctx.one()
    for i, ti in enumerate(units):
        tw = ti
        d0 = tw.digits()[0]
        omega = teichmuller(wctx, d0)
        x = tw / omega
        if kappa.chi[i]:
            acc = acc * omega ** kappa.chi[i]
        a = log_one_unit(x) / log_gen
        if kappa.algebraic is not None:
            # s_i = (1+p)^{k_i} is exact; rebuild it with full headroom
            si = wctx.from_int(1 + ctx.p) ** int(kappa.algebraic[i])
        else:
            si = kappa.s[i].lift_to(wctx)
        acc = acc * one_unit_pow(si, a)
    return acc.lift_to(ctx)


def eval_algebraic(kappa: Character, t: Sequence) -> PadicScalar:
    """Monomial formula prod t_i^{k_i}; only for tagged algebraic weights."""
    if kappa.algebraic is None:
        raise ValidationError("not an algebraic weight")
    ctx = kappa.ctx
    acc = ctx.one()
    for ti, k in zip(t, kappa.algebraic):
        x = _unit_scalar(ctx, ti)
        acc = acc * x ** int(k)
    return acc


def involution(kappa: Character) -> Character:
    """kappa -> kappa': reverse and negate; stabilizes the dominant cone."""
    g = kappa.g
    chi = [(-kappa.chi[g - 1 - i]) % (kappa.ctx.p - 1) for i in range(g)]
    s = [kappa.s[g - 1 - i].inverse() for i in range(g)]
    alg = None
    if kappa.algebraic is not None:
        alg = tuple(-kappa.algebraic[g - 1 - i] for i in range(g))
    return Character(kappa.ctx, chi, s, algebraic=alg)


def analyticity_radius(kappa: Character, degree_bound: Optional[int] = None) -> Fraction:
    """Least grid w (in (1/e)Z) where the one-unit power series converge.

    Convergence scan on the binomial coefficient valuations up to the degree
    bound (default 2m); algebraic weights are analytic everywhere and return
    the minimal grid value.
    """
    ctx = kappa.ctx
    grid = Fraction(1, ctx.e)
    if kappa.algebraic is not None:
        return grid
    K = degree_bound or 2 * ctx.m
    wctx = ctx.with_precision(ctx.m + 4 * ctx.e)
    log_gen = log_one_unit(wctx.from_int(1 + ctx.p))
    w_min = grid
    for si in kappa.s:
        d = si - 1
        if d.val is None:
            continue
        beta = log_one_unit(si.lift_to(wctx)) / log_gen
        # A_k = sum_{j<k} v(beta - j) - e*vp(k!), all in pi-digit units;
        # need A_k + k*e*w >= 0 for every k
        A = Fraction(0)
        vfact = 0
        for k in range(1, K + 1):
            bj = beta - (k - 1)
            A += bj.val if bj.val is not None else bj.abs_prec
            if k > 1:
                vfact += ctx.e * ctx.kernel.vp(k, ctx.p)
            need = Fraction(-(A - vfact), k * ctx.e)
            if need > w_min:
                w_min = need
    # round up to the grid
    num = -((-w_min.numerator * ctx.e) // w_min.denominator)
    return Fraction(num, ctx.e)


class UniversalCharacterChart:
    """Chart data for the formal universal character on the w-disc."""

    __slots__ = ("ctx", "g", "w", "D")

    def __init__(self, ctx: PadicContext, g: int, w, D: int):
        self.ctx = ctx
        self.g = g
        self.w = Fraction(w)
        self.D = D
        if self.w <= 0:
            raise ValidationError("w must be positive")
        if (self.w * ctx.e).denominator != 1:
            raise UnrepresentableExponent(f"w={self.w} not on the (1/e)Z grid")
        if (Fraction(2 * ctx.e, ctx.p - 1)).denominator != 1:
            raise UnrepresentableExponent(
                f"2/(p-1) needs e divisible by (p-1)/gcd(2,p-1); e={ctx.e}")

    @property
    def exponent_pival(self) -> int:
        """pi-valuation of the constant p^{-w + 2/(p-1)}."""
        return int(-self.w * self.ctx.e + Fraction(2 * self.ctx.e, self.ctx.p - 1))

    def var_names(self) -> Tuple[List[str], List[str]]:
        svars = [f"S{i+1}" for i in range(self.g)]
        xvars = [f"X{i+1}" for i in range(self.g)]
        return svars, xvars


def universal_character_eval(chart: UniversalCharacterChart) -> TruncatedSeries:
    """prod_i (1 + p^w X_i)^{S_i p^{-w + 2/(p-1)}} to total degree D.

    Constant term 1; every X-degree-k coefficient has valuation at least
    (k+1)/(p-1) (binomial-tail estimate v(k!) <= (k-1)/(p-1)).
    """
    ctx = chart.ctx
    D = chart.D
    pad = ctx.e * ((D // (ctx.p - 1)) + 2)
    wctx = ctx.with_precision(ctx.m + pad)
    svars, xvars = chart.var_names()
    vars = tuple(svars + xvars)
    c = wctx.pi_pow(chart.exponent_pival)        # p^{-w + 2/(p-1)}
    pw_digits = int(chart.w * ctx.e)
    acc = TruncatedSeries.constant(wctx, vars, D, 1)
    for i in range(chart.g):
        u = TruncatedSeries.variable(wctx, vars, D, svars[i]) * c
        factor = TruncatedSeries.constant(wctx, vars, D, 1)
        prod = TruncatedSeries.constant(wctx, vars, D, 1)
        kfact = wctx.one()
        for k in range(1, D + 1):
            prod = prod * (u - (k - 1))
            kfact = kfact * wctx.from_int(k)
            coeff_k = prod.scalar_div(kfact) * wctx.pi_pow(pw_digits * k)
            xk = TruncatedSeries.variable(wctx, vars, D, xvars[i]) ** k
            factor = factor + coeff_k * xk
        acc = acc * factor
    return series_lift(acc, ctx)


def series_lift(series: TruncatedSeries, ctx: PadicContext) -> TruncatedSeries:
    return TruncatedSeries(ctx, series.vars, series.D,
                           {m: c.lift_to(ctx) for m, c in series.coeffs.items()})


def specialization_tail_pival(chart: UniversalCharacterChart) -> int:
    """Certified pi-valuation bound for total-degree-(>D) terms of the chart
    series: v(S^j X^k coeff) >= kw + j(2/(p-1) - w) - v(k!), j <= k,
    minimized over the dropped range j + k > D.
    """
    ctx = chart.ctx
    e, p, D, w = ctx.e, ctx.p, chart.D, chart.w
    best = None
    for k in range(1, 2 * D + 3):
        j_lo = max(0, D + 1 - k)
        if j_lo > k:
            continue
        two = Fraction(2, p - 1)
        for j in (j_lo, k):  # valuation is monotone in j, endpoints suffice
            val = k * w + j * (two - w) - Fraction(k - 1, p - 1)
            if best is None or val < best:
                best = val
    if best is None:
        return ctx.m
    return min(ctx.m, int(e * best))


class SpecializedCharacter:
    """Universal character specialized at a weight: an X-variable series plus
    the precision to which the pairing with eval_character is certified."""

    def __init__(self, series: TruncatedSeries, kappa: Character, chart, certified_pival: int):
        self.series = series
        self.kappa = kappa
        self.chart = chart
        self.certified_pival = certified_pival

    def eval_at(self, xs: Sequence[PadicScalar]) -> PadicScalar:
        _, xvars = self.chart.var_names()
        point = {name: x for name, x in zip(xvars, xs)}
        return self.series.evaluate(point)

    def torus_point(self, xs: Sequence) -> List[PadicScalar]:
        """(1 + p^w x_i) for integral x_i."""
        ctx = self.series.ctx
        pw = ctx.pi_pow(int(self.chart.w * ctx.e))
        out = []
        for x in xs:
            xsc = ctx.from_int(x) if isinstance(x, int) else x
            out.append(ctx.one() + pw * xsc)
        return out


def specialize_universal(series: TruncatedSeries, kappa: Character,
                         chart: UniversalCharacterChart) -> SpecializedCharacter:
    """Substitute the weight coordinates of kappa for the S variables.

    The coordinate is sigma_i = p^{w - 2/(p-1)} log(s_i)/log(1+p); the result
    recovers kappa on the w-ball of the torus, to the certified precision.
    """
    ctx = series.ctx
    if analyticity_radius(kappa) > chart.w:
        raise NotWAnalytic(f"character is not {chart.w}-analytic")
    wctx = ctx.with_precision(ctx.m + 4 * ctx.e)
    log_gen = log_one_unit(wctx.from_int(1 + ctx.p))
    svars, _ = chart.var_names()
    subs = {}
    for i, si in enumerate(kappa.s):
        sigma = wctx.pi_pow(-chart.exponent_pival) * log_one_unit(
            si.lift_to(wctx)) / log_gen
        sigma = sigma.lift_to(ctx)
        if sigma.val is not None and sigma.val < 0:
            raise NotWAnalytic(f"weight coordinate sigma_{i+1} has negative valuation")
        subs[svars[i]] = sigma
    specialized = series.substitute(subs).drop_vars(svars)
    cert = specialization_tail_pival(chart)
    return SpecializedCharacter(specialized, kappa, chart, cert)
