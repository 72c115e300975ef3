"""Batch front-end: config parsing, experiment orchestration and deterministic
machine-readable output.

Reruns with identical configuration produce byte-identical envelopes; wall
time goes to stderr so stdout stays reproducible.  Exit codes: 0 success,
2 validation error, 3 precision exhaustion, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import json
import sys
import time
from fractions import Fraction
from typing import Dict, List, Optional

from . import cech as cech_mod
from . import laind, spectral
from .errors import (
    EigenkitError,
    PrecisionExhausted,
    ValidationError,
)
from .padic import PadicContext
from .series import TruncatedSeries
from .spectral import INF_PIVAL
from .weight import (
    Character,
    UniversalCharacterChart,
    analyticity_radius,
    eval_character,
    involution,
    serialize_scalar,
    universal_character_eval,
)

COMMANDS = ("bgg", "slopes", "factor", "family", "cech", "weights")

DEFAULTS = {
    "p": 5,
    "e": None,          # None: 2(p-1)
    "prec": 20,
    "g": 2,
    "deg": 12,
    "deg_a": 8,
    "n": None,          # Fredholm truncation; None: full degree-D basis
    "h": "1/2",
    "kappa": "3,1",
    "rank": 3,
    "matrix": "[[1+S, 1], [0, p]]",
    "lambda0": "p",
    "side": "",
    "seed": 1,
}


class RunConfig:
    """Validated run parameters with an exact echo for the envelope."""

    def __init__(self, values: Dict):
        self.p = int(values["p"])
        e = values["e"]
        self.e = int(e) if e not in (None, "") else 2 * (self.p - 1)
        self.prec = int(values["prec"])
        self.g = int(values["g"])
        self.deg = int(values["deg"])
        self.deg_a = int(values["deg_a"])
        n = values["n"]
        self.n = int(n) if n not in (None, "") else None
        self.h = Fraction(str(values["h"]))
        self.kappa = tuple(int(x) for x in str(values["kappa"]).split(",") if x != "")
        self.rank = int(values["rank"])
        self.matrix = str(values["matrix"])
        self.lambda0 = str(values["lambda0"])
        self.side = str(values["side"]) or None
        self.seed = int(values["seed"])
        for name in ("p", "e", "prec", "g", "deg", "deg_a", "rank"):
            if getattr(self, name) <= 0 and name != "deg":
                raise ValidationError(f"{name} must be positive")
        if self.deg < 0:
            raise ValidationError("deg must be nonnegative")

    def context(self) -> PadicContext:
        return PadicContext(self.p, self.e, self.prec)

    def character(self, require_dominant: bool = False) -> Character:
        if len(self.kappa) != self.g:
            raise ValidationError(
                f"weight tuple {self.kappa} does not match g={self.g}")
        kap = Character.from_algebraic(self.context(), self.kappa)
        if require_dominant and not kap.is_dominant():
            raise ValidationError(f"weight {self.kappa} is not dominant")
        return kap

    def echo(self) -> Dict:
        return {
            "p": self.p, "e": self.e, "prec": self.prec, "g": self.g,
            "deg": self.deg, "deg_a": self.deg_a, "n": self.n,
            "h": str(self.h), "kappa": list(self.kappa), "rank": self.rank,
            "matrix": self.matrix, "lambda0": self.lambda0,
            "side": self.side, "seed": self.seed,
        }


# -- safe expression parsing for family matrices --------------------------------


def parse_matrix_expr(ctx: PadicContext, text: str, vars=("S",), D: int = 8
                      ) -> List[List[TruncatedSeries]]:
    """Parse [[...]] of integer/S/p expressions into series entries.

    Only literals, S, p, and + - * ** are admitted; anything else is a
    validation error, never evaluated.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"bad matrix expression: {exc}")

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.List):
            return [build(el) for el in node.elts]
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return TruncatedSeries.constant(ctx, vars, D, node.value)
        if isinstance(node, ast.Name):
            if node.id == "p":
                return TruncatedSeries.constant(ctx, vars, D, ctx.p)
            if node.id in vars:
                return TruncatedSeries.variable(ctx, vars, D, node.id)
            raise ValidationError(f"unknown name {node.id!r} in matrix expression")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = build(node.operand)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp) and isinstance(
                node.op, (ast.Add, ast.Sub, ast.Mult, ast.Pow)):
            a, b = build(node.left), build(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if not isinstance(b, TruncatedSeries) or b.degree() != 0:
                raise ValidationError("exponent must be a constant")
            k = b.constant_term().to_fraction()
            if k.denominator != 1 or k < 0:
                raise ValidationError("exponent must be a nonnegative integer")
            return a ** int(k)
        raise ValidationError(f"disallowed syntax in matrix expression: {node!r}")

    rows = build(tree)
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ValidationError("matrix expression must be a list of rows")
    sizes = {len(r) for r in rows}
    if len(sizes) != 1 or len(rows) != sizes.pop():
        raise ValidationError("matrix must be square")
    return rows


def parse_scalar_expr(ctx: PadicContext, text: str):
    """Integer or p-power scalar such as '5', 'p', 'p**2', '1+p'."""
    series = parse_matrix_expr(ctx, f"[[{text}]]")[0][0]
    if series.degree() != 0:
        raise ValidationError("scalar expression must be constant")
    return series.constant_term()


# -- payload builders ------------------------------------------------------------


def _fr(x) -> str:
    return str(Fraction(x))


def _pival_field(v: Optional[int]) -> Optional[str]:
    if v is None or v >= INF_PIVAL:
        return None
    return int(v)


def cmd_weights(cfg: RunConfig) -> Dict:
    kap = cfg.character()
    inv = involution(kap)
    ctx = cfg.context()
    payload = {
        "character": kap.serialize(),
        "involution": inv.serialize(),
        "analyticity_radius": _fr(analyticity_radius(kap)),
        "eval_at_generators": [
            serialize_scalar(eval_character(
                kap, [1 + ctx.p if j == i else 1 for j in range(cfg.g)]))
            for i in range(cfg.g)
        ],
    }
    return payload


def cmd_bgg(cfg: RunConfig) -> Dict:
    kap = cfg.character(require_dominant=True)
    report = laind.bgg_check(kap, cfg.deg)
    return {
        "kernel_dim": report["kernel_dim"],
        "expected_dim": report["expected_dim"],
        "oracle_dim": report["oracle_dim"],
        "d1_after_d0_zero": report["d1_after_d0_zero"],
        "commutation_exact": report["commutation_exact"],
        "precision_margin": report["precision_margin"],
        "degree": report["degree"],
        "basis_size": report["basis_size"],
    }


def _model(cfg: RunConfig):
    ctx = cfg.context()
    U = laind.compact_u_matrix(ctx, cfg.g, cfg.deg)
    if cfg.n is not None:
        U = U.truncate(cfg.n)
    return ctx, U


def cmd_slopes(cfg: RunConfig) -> Dict:
    ctx, U = _model(cfg)
    P = spectral.fredholm_series(U)
    if P.degree >= 1:
        poly = spectral.newton_slopes(P)
        slopes = [[_fr(s), m] for s, m in poly.slopes]
        vertices = [[n, _fr(v)] for n, v in poly.vertices]
    else:
        slopes, vertices = [], []
    return {
        "fredholm": P.serialize(),
        "polygon": {"slopes": slopes, "vertices": vertices},
        "tail_pival": _pival_field(U.tail_pival),
    }


def cmd_factor(cfg: RunConfig) -> Dict:
    ctx, U = _model(cfg)
    P = spectral.fredholm_series(U)
    fact = spectral.slope_factor(P, cfg.h, side=cfg.side)
    return {
        "h": _fr(fact.h),
        "deg_Q": fact.deg_Q,
        "Q": [serialize_scalar(c) for c in fact.Q],
        "R_prefix": [serialize_scalar(c) for c in fact.R[: fact.deg_Q + 3]],
        "bezout_series_residual_pival": _pival_field(fact.series_residual_pival),
        "bezout_monic_residual_pival": _pival_field(fact.monic_residual_pival),
    }


def cmd_family(cfg: RunConfig) -> Dict:
    ctx = cfg.context()
    mat = parse_matrix_expr(ctx, cfg.matrix, D=cfg.deg_a)
    lam0 = parse_scalar_expr(ctx, cfg.lambda0)
    U = spectral.CompactOperatorModel(ctx, mat, tail_pival=INF_PIVAL)
    lift = spectral.eigen_family_lift(U, lam0)
    lam = lift["eigenvalue"]
    return {
        "eigenvalue": [
            {"exps": list(mono), "coeff": serialize_scalar(c)}
            for mono, c in lam.items()
        ],
        "eigenvector": [
            [{"exps": list(mono), "coeff": serialize_scalar(c)}
             for mono, c in comp.items()]
            for comp in lift["eigenvector"]
        ],
        "residual_pival": _pival_field(lift["residual_pival"]),
    }


def cmd_cech(cfg: RunConfig) -> Dict:
    ctx = cfg.context()
    base = cech_mod.AffinoidModel(ctx, cfg.deg_a)
    M = spectral.BanachModuleModel.orthonormalizable(ctx, list(range(cfg.rank)))
    rep = cech_mod.cech_check(M, base, seed=cfg.seed)
    ident = [[{0: ctx.one()} if i == j else {} for j in range(cfg.rank)]
             for i in range(cfg.rank)]
    glue = cech_mod.kiehl_glue(base, cfg.rank, ident)
    return {
        "injective": rep["injective"],
        "middle_defect_pival": _pival_field(rep["middle_defect_pival"]),
        "rounds": rep["rounds"],
        "epsilon_pival": _pival_field(rep["epsilon_pival"]),
        "recovered_rank": glue["recovered_rank_plus"],
        "kernel_dim": rep["kernel_dim"],
        "image_dim": rep["image_dim"],
    }


DISPATCH = {
    "weights": cmd_weights,
    "bgg": cmd_bgg,
    "slopes": cmd_slopes,
    "factor": cmd_factor,
    "family": cmd_family,
    "cech": cmd_cech,
}


# -- envelope and I/O -------------------------------------------------------------


def build_envelope(command: str, cfg: RunConfig, payload: Dict) -> Dict:
    return {
        "command": command,
        "config": cfg.echo(),
        "payload": payload,
        "certificates": {
            "context": {"p": cfg.p, "e": cfg.e, "m": cfg.prec},
            "note": "valuations are pi-digit exponents; nothing beyond m digits is claimed",
        },
    }


def _flatten(prefix: str, obj, rows: List):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, obj))


def render(envelope: Dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(envelope, sort_keys=True, separators=(",", ":")) + "\n"
    rows: List = []
    _flatten("", envelope, rows)
    lines = ["key,value"]
    for k, v in rows:
        lines.append(f"{k},{v}")
    return "\n".join(lines) + "\n"


def load_config(path: Optional[str], command: str) -> Dict:
    values = dict(DEFAULTS)
    if path:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ValidationError(f"config file {path} not found")
        for section in ("run", command):
            if parser.has_section(section):
                for key, val in parser.items(section):
                    k = key.replace("-", "_")
                    if k not in values:
                        raise ValidationError(f"unknown config key {key!r}")
                    values[k] = val
    return values


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="eigenkit",
        description="exact p-adic spectral computations: BGG kernels, "
                    "U-operator slopes, slope factorizations, eigenfamily "
                    "lifts and Cech checks")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="INI file with [run] and per-command sections")
    ap.add_argument("--p", type=int)
    ap.add_argument("--e", type=int)
    ap.add_argument("--prec", type=int, help="precision cap in pi-adic digits")
    ap.add_argument("--g", type=int)
    ap.add_argument("--deg", type=int, help="truncation degree D")
    ap.add_argument("--deg-a", type=int, dest="deg_a",
                    help="Tate-base truncation degree D_A")
    ap.add_argument("--n", type=int, help="Fredholm truncation (columns)")
    ap.add_argument("--h", help="slope cut, a rational like 3/2")
    ap.add_argument("--kappa", help="weight tuple, e.g. 3,1")
    ap.add_argument("--rank", type=int, help="module rank |I| for cech")
    ap.add_argument("--matrix", help="family matrix, e.g. [[1+S,1],[0,p]]")
    ap.add_argument("--lambda0", help="fiber eigenvalue to lift, e.g. p")
    ap.add_argument("--side", choices=["below", "above"],
                    help="convention when h hits a slope")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", choices=["json", "csv"], default="json")
    ap.add_argument("--out-file", dest="out_file")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    t0 = time.monotonic()
    try:
        values = load_config(args.config, args.command)
        for key in DEFAULTS:
            flag = getattr(args, key, None)
            if flag is not None:
                values[key] = flag
        cfg = RunConfig(values)
        payload = DISPATCH[args.command](cfg)
        envelope = build_envelope(args.command, cfg, payload)
        text = render(envelope, args.out)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return 3
    except EigenkitError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    elapsed = time.monotonic() - t0
    if args.out_file:
        with open(args.out_file, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"wall_time_s={elapsed:.3f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
