"""Kernel selection: compiled extension when present and applicable.

The C kernel works on machine words, so it is only eligible when the working
modulus p^q fits comfortably below 2^31 (products and e-term carry sums then
stay inside int64).  EIGENKIT_KERNEL=python|c forces a choice; forcing "c"
when it is unavailable or ineligible raises at context construction.
"""

import os

from . import _pykernel

try:
    from . import _ckernel
except ImportError:
    _ckernel = None

_WORD_LIMIT = 1 << 31
_E_LIMIT = 64


def compiled_available() -> bool:
    return _ckernel is not None


def eligible_for_compiled(p: int, e: int, pq: int) -> bool:
    return _ckernel is not None and pq < _WORD_LIMIT and e <= _E_LIMIT


def select_kernel(p: int, e: int, pq: int):
    forced = os.environ.get("EIGENKIT_KERNEL", "").strip().lower()
    if forced == "python":
        return _pykernel
    if forced == "c":
        if _ckernel is None:
            raise RuntimeError("EIGENKIT_KERNEL=c but the compiled kernel is not built")
        if not eligible_for_compiled(p, e, pq):
            raise RuntimeError(
                f"EIGENKIT_KERNEL=c but context (p={p}, e={e}) exceeds word-size limits"
            )
        return _ckernel
    if eligible_for_compiled(p, e, pq):
        return _ckernel
    return _pykernel
