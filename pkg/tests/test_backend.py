"""Kernel selection and bit-parity between the pure and compiled backends."""

import os
import random

import pytest

from eigenkit import _backend, _pykernel
from eigenkit.padic import PadicContext


requires_compiled = pytest.mark.skipif(
    not _backend.compiled_available(), reason="compiled kernel not built")


def test_wordsize_fallback():
    big = PadicContext(5, 1, 60)  # 5^61 exceeds machine words
    assert big.kernel is _pykernel


def test_forced_python(monkeypatch):
    monkeypatch.setenv("EIGENKIT_KERNEL", "python")
    ctx = PadicContext(5, 8, 20)
    assert ctx.kernel is _pykernel


@requires_compiled
def test_forced_c_rejects_oversized(monkeypatch):
    monkeypatch.setenv("EIGENKIT_KERNEL", "c")
    with pytest.raises(RuntimeError):
        PadicContext(5, 1, 60)


@requires_compiled
def test_coordinate_op_parity():
    from eigenkit import _ckernel
    rng = random.Random(123)
    for p, e, q in ((5, 8, 4), (5, 1, 9), (7, 12, 3), (13, 2, 6)):
        pq = p ** q
        for _ in range(200):
            a = tuple(rng.randrange(pq) for _ in range(e))
            b = tuple(rng.randrange(pq) for _ in range(e))
            assert _ckernel.coord_mul(a, b, p, e, pq) == \
                _pykernel.coord_mul(a, b, p, e, pq)
            assert _ckernel.coord_add(a, b, pq) == _pykernel.coord_add(a, b, pq)
            assert _ckernel.coord_sub(a, b, pq) == _pykernel.coord_sub(a, b, pq)
            assert _ckernel.coord_neg(a, pq) == _pykernel.coord_neg(a, pq)
            assert _ckernel.coord_pival(a, p, e) == _pykernel.coord_pival(a, p, e)
            rel = rng.randrange(1, e * q)
            assert _ckernel.coord_reduce(a, rel, p, e) == \
                _pykernel.coord_reduce(a, rel, p, e)
            t = rng.randrange(0, e * (q - 1))
            assert _ckernel.coord_shift_up(a, t, p, e, pq) == \
                _pykernel.coord_shift_up(a, t, p, e, pq)
            shifted = _pykernel.coord_shift_up(a, t, p, e, pq)
            assert _ckernel.coord_shift_down(shifted, t, p, e) == \
                _pykernel.coord_shift_down(shifted, t, p, e)


@requires_compiled
def test_scalar_pipeline_parity(monkeypatch):
    """Whole-scalar results agree between backends on a mixed workload."""
    results = {}
    for name in ("python", "c"):
        monkeypatch.setenv("EIGENKIT_KERNEL", name)
        ctx = PadicContext(5, 8, 20)
        rng = random.Random(7)
        acc = ctx.one()
        for _ in range(60):
            x = ctx.from_int(rng.randrange(-10 ** 6, 10 ** 6) or 1)
            y = ctx.pi() * rng.randrange(1, 50) + 1
            acc = acc * y + x
        results[name] = (acc.val, acc.unit, acc.abs_prec)
    assert results["python"] == results["c"]
