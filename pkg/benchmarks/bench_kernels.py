#!/usr/bin/env python3
"""Benchmark: compiled kernel vs pure-Python fallback on the hot paths.

Run after `pip install -e . --no-build-isolation`:

    python3 benchmarks/bench_kernels.py

Workloads exercise the layers that dominate real runs: raw unit-coordinate
products, scalar pipelines, truncated-series products, and a Fredholm series
of the compact U model.
"""

import os
import sys
import time


def timed(fn, repeat=3):
    best = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best


def workload_raw_coord_mul(ctx, n=30000):
    import random
    rng = random.Random(0)
    k = ctx.kernel
    p, e, pq = ctx.p, ctx.e, ctx.pq
    pairs = [(tuple(rng.randrange(pq) for _ in range(e)),
              tuple(rng.randrange(pq) for _ in range(e))) for _ in range(64)]

    def run():
        for i in range(n):
            a, b = pairs[i % 64]
            k.coord_mul(a, b, p, e, pq)
    return run


def workload_scalar_mul(ctx, n=20000):
    import random
    rng = random.Random(1)
    xs = [ctx.from_int(rng.randrange(1, 10 ** 9)) + ctx.pi() * rng.randrange(50)
          for _ in range(64)]

    def run():
        acc = ctx.one()
        for i in range(n):
            acc = acc * xs[i % 64]
        return acc
    return run


def workload_scalar_mixed(ctx, n=8000):
    import random
    rng = random.Random(2)
    xs = [ctx.from_int(rng.randrange(1, 10 ** 6)) for _ in range(64)]

    def run():
        acc = ctx.one()
        for i in range(n):
            acc = acc * xs[i % 64] + xs[(i + 7) % 64]
        return acc
    return run


def workload_series_product(ctx, D=10):
    from eigenkit.series import TruncatedSeries
    import random
    rng = random.Random(3)
    vars = ("S", "X")
    coeffs = {}
    for i in range(D + 1):
        for j in range(D + 1 - i):
            coeffs[(i, j)] = ctx.from_int(rng.randrange(1, 500))
    a = TruncatedSeries(ctx, vars, D, coeffs)

    def run():
        return a * a * a
    return run


def workload_fredholm(ctx, D=9):
    from eigenkit.laind import compact_u_matrix
    from eigenkit.spectral import fredholm_series

    def run():
        U = compact_u_matrix(ctx, 3, D)
        return fredholm_series(U)
    return run


def main():
    from eigenkit import _backend
    rows = []
    kernels = ["python"] + (["c"] if _backend.compiled_available() else [])
    for name in kernels:
        os.environ["EIGENKIT_KERNEL"] = name
        from eigenkit.padic import PadicContext
        ctx = PadicContext(5, 8, 24)
        assert ctx.kernel.KERNEL_NAME == name
        for label, maker in (
            ("raw coord_mul (e=8)", workload_raw_coord_mul),
            ("scalar mul (e=8)", workload_scalar_mul),
            ("scalar mixed (e=8)", workload_scalar_mixed),
            ("series product", workload_series_product),
            ("fredholm g=3", workload_fredholm),
        ):
            dt = timed(maker(ctx))
            rows.append((label, name, dt))
    os.environ.pop("EIGENKIT_KERNEL", None)

    print(f"{'workload':<22}{'kernel':<10}{'seconds':<12}{'speedup'}")
    base = {}
    for label, name, dt in rows:
        if name == "python":
            base[label] = dt
    for label, name, dt in rows:
        sp = f"{base[label] / dt:5.2f}x" if name != "python" and base.get(label) else ""
        print(f"{label:<22}{name:<10}{dt:<12.4f}{sp}")
    if len(kernels) == 1:
        print("\ncompiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    sys.exit(main())
