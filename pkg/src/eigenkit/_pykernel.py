"""Pure-Python kernel for ramified-unit coordinate arithmetic.

Elements of O_K / pi^r (K totally ramified of degree e over Q_p, pi^e = p) are
held as length-e integer vectors (b_0, ..., b_{e-1}) encoding sum b_j pi^j,
with b_j in Z_p truncated to the working modulus.  All functions here are
shape-compatible with the compiled twin in _ckernel.pyx; _backend picks one
per context.
"""

KERNEL_NAME = "python"


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def coord_mul(a, b, p, e, pq):
    """Product of coordinate vectors modulo (x^e - p), coefficients mod pq."""
    if e == 1:
        return ((a[0] * b[0]) % pq,)
    out = [0] * e
    for j in range(e):
        aj = a[j]
        if not aj:
            continue
        for k in range(e):
            bk = b[k]
            if not bk:
                continue
            d = j + k
            if d < e:
                out[d] += aj * bk
            else:
                out[d - e] += p * aj * bk
    return tuple(v % pq for v in out)

def coord_add(a, b, pq):
    return tuple((x + y) % pq for x, y in zip(a, b))

def coord_sub(a, b, pq):
    return tuple((x - y) % pq for x, y in zip(a, b))

def coord_neg(a, pq):
    return tuple((-x) % pq for x in a)


def coord_pival(a, p, e):
    """pi-adic valuation of a coordinate vector, or None if all zero.

    v(sum b_j pi^j) = min_j (e*vp(b_j) + j); the minimum is unique because
    the candidates are distinct mod e, so the formula is exact.
    """
    best = None
    for j, aj in enumerate(a):
        if aj:
            cand = e * vp(aj, p) + j
            if best is None or cand < best:
                best = cand
    return best


def coord_shift_down(a, t, p, e):
    """Divide by pi^t.  Requires every step to stay integral."""
    cur = list(a)
    w, r = divmod(t, e)
    if w:
        pw = p ** w
        cur = [c // pw for c in cur]
    for _ in range(r):
        head = cur[0] // p
        cur = cur[1:] + [head]
    return tuple(cur)


def coord_shift_up(a, t, p, e, pq):
    """Multiply by pi^t."""
    cur = list(a)
    w, r = divmod(t, e)
    if w:
        pw = p ** w
        cur = [(c * pw) % pq for c in cur]
    for _ in range(r):
        cur = [(cur[-1] * p) % pq] + cur[:-1]
    return tuple(cur)


def coord_reduce(a, rel, p, e):
    """Canonical form at relative precision rel pi-digits.

    Coordinate j carries pi^j, so it is determined mod p^ceil((rel-j)/e);
    coordinates at or beyond rel are unknown and zeroed.
    """
    out = []
    for j, aj in enumerate(a):
        k = rel - j
        if k <= 0:
            out.append(0)
        else:
            out.append(aj % (p ** ((k + e - 1) // e)))
    return tuple(out)
