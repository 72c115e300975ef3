# cython: language_level=3
"""Compiled twin of _pykernel: unit-coordinate arithmetic on machine words.

Only selected for contexts whose working modulus p^q stays below 2^31 (and
e <= 64), so every product of two reduced coordinates fits in 64 bits.  The
function signatures and results are bit-identical to the pure kernel.
"""

KERNEL_NAME = "c"


def vp(n, p):
    """p-adic valuation of a nonzero integer (handles big ints)."""
    cdef long long v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def coord_mul(a, b, p_, e_, pq_):
    cdef long long p = p_, pq = pq_
    cdef int e = e_
    cdef long long abuf[64]
    cdef long long bbuf[64]
    cdef long long out[64]
    cdef int j, k, d
    cdef long long aj, pa
    if e == 1:
        return ((<long long> a[0] * <long long> b[0]) % pq,)
    for j in range(e):
        abuf[j] = a[j]
        bbuf[j] = b[j]
        out[j] = 0
    for j in range(e):
        aj = abuf[j]
        if aj == 0:
            continue
        pa = (p * aj) % pq
        for k in range(e):
            if bbuf[k] == 0:
                continue
            d = j + k
            if d < e:
                out[d] = (out[d] + aj * bbuf[k]) % pq
            else:
                out[d - e] = (out[d - e] + pa * bbuf[k]) % pq
    return tuple([out[j] for j in range(e)])


def coord_add(a, b, pq_):
    cdef long long pq = pq_
    cdef int e = len(a), j
    return tuple([(<long long> a[j] + <long long> b[j]) % pq for j in range(e)])


def coord_sub(a, b, pq_):
    cdef long long pq = pq_
    cdef int e = len(a), j
    return tuple([(<long long> a[j] - <long long> b[j]) % pq for j in range(e)])


def coord_neg(a, pq_):
    cdef long long pq = pq_
    cdef int e = len(a), j
    return tuple([(-<long long> a[j]) % pq for j in range(e)])


def coord_pival(a, p_, e_):
    cdef long long p = p_
    cdef int e = e_
    cdef int j
    cdef long long aj, v, cand
    cdef long long best = -1
    for j in range(e):
        aj = a[j]
        if aj != 0:
            v = 0
            while aj % p == 0:
                aj //= p
                v += 1
            cand = e * v + j
            if best < 0 or cand < best:
                best = cand
    if best < 0:
        return None
    return best


def coord_shift_down(a, t, p, e):
    w, r = divmod(t, e)
    cur = list(a)
    if w:
        pw = p ** w
        cur = [c // pw for c in cur]
    for _ in range(r):
        head = cur[0] // p
        cur = cur[1:] + [head]
    return tuple(cur)


def coord_shift_up(a, t, p, e, pq):
    w, r = divmod(t, e)
    cur = list(a)
    if w:
        pw = pow(p, w, pq)
        cur = [(c * pw) % pq for c in cur]
    for _ in range(r):
        cur = [(cur[-1] * p) % pq] + cur[:-1]
    return tuple(cur)


def coord_reduce(a, rel, p, e):
    out = []
    for j in range(e):
        k = rel - j
        if k <= 0:
            out.append(0)
        else:
            out.append(a[j] % (p ** ((k + e - 1) // e)))
    return tuple(out)
