"""Exact Gray-code walks over multi-limb integers (numba).

Integers are split into ``L`` limbs of ``LIMB_BITS`` bits: limbs ``0..L-2``
hold unsigned digits in ``[0, 2**LIMB_BITS)``, the top limb is signed.
Sums of two normalized values plus a carry stay below ``2**62``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

LIMB_BITS = 60
LIMB_MASK = (1 << LIMB_BITS) - 1
# stands in for +infinity in threshold arrays
INF_TOP = 1 << 62


def n_limbs(frac_bits: int, magnitude_bits: int = 40) -> int:
    # the signed top limb absorbs up to 62 bits, so ceil() leaves headroom
    return max(2, -(-(frac_bits + magnitude_bits) // LIMB_BITS))


def to_limbs(v: int, L: int) -> np.ndarray:
    out = np.empty(L, dtype=np.int64)
    for l in range(L - 1):
        out[l] = (v >> (LIMB_BITS * l)) & LIMB_MASK
    top = v >> (LIMB_BITS * (L - 1))
    if not -(1 << 62) < top < (1 << 62):
        raise OverflowError("value does not fit the limb layout")
    out[L - 1] = top
    return out


def from_limbs(a) -> int:
    L = len(a)
    v = int(a[L - 1]) << (LIMB_BITS * (L - 1))
    for l in range(L - 1):
        v += int(a[l]) << (LIMB_BITS * l)
    return v


def threshold_limbs(values, L: int) -> np.ndarray:
    """Rows of nonnegative thresholds; ``None`` means +infinity."""
    out = np.zeros((max(1, len(values)), L), dtype=np.int64)
    for t, v in enumerate(values):
        if v is None:
            out[t, L - 1] = INF_TOP
        else:
            out[t] = to_limbs(v, L)
    return out


@njit(cache=True, nogil=True, inline="always")
def _abs_into(s, a, L):
    if s[L - 1] >= 0:
        for l in range(L):
            a[l] = s[l]
        return
    carry = 0
    for l in range(L - 1):
        t = -s[l] + carry
        a[l] = t & LIMB_MASK
        carry = t >> LIMB_BITS
    a[L - 1] = -s[L - 1] + carry


@njit(cache=True, nogil=True, inline="always")
def _add_row(s, d, i, L):
    carry = 0
    for l in range(L - 1):
        t = s[l] + d[i, l] + carry
        s[l] = t & LIMB_MASK
        carry = t >> LIMB_BITS
    s[L - 1] = s[L - 1] + d[i, L - 1] + carry


@njit(cache=True, nogil=True, inline="always")
def _cmp_row(a, b, r, L):
    for l in range(L - 1, -1, -1):
        if a[l] < b[r, l]:
            return -1
        if a[l] > b[r, l]:
            return 1
    return 0


@njit(cache=True, nogil=True)
def scan_block(
    dpos,  # (n, L) limbs of +2 x_i
    dneg,  # (n, L) limbs of -2 x_i
    s_init,  # (L,) limbs of <sigma_0, x>
    signs,  # (n,) int8 current sigma, modified in place
    star,  # (n,) int8 reference partition
    dist_init,
    mask_init,
    lexbit,  # (n,) int64, bit of coordinate i in the lexicographic key
    free,  # (m,) coordinates walked by the Gray code
    thr,  # (T, L) thresholds for counting
    n_thr,
    zbest,  # (n+1, L) best |<sigma,x>| per distance
    zmask,  # (n+1,) int64 lexicographic key of that sigma
    zfound,  # (n+1,) bool
    counts,  # (T,) int64
    lvl_t,  # index into thr for level-set collection, -1 for none
    lvl_buf,  # (cap,) int64
    lvl_count,  # (1,) int64, may exceed cap
    dthr_t,  # index into thr for per-distance counts, -1 for none
    dcounts,  # (n+1,) int64
):
    L = s_init.shape[0]
    top = L - 1
    s = s_init.copy()
    a = np.empty(L, dtype=np.int64)
    dist = dist_init
    mask = mask_init
    m = free.shape[0]
    cap = lvl_buf.shape[0]
    total = np.int64(1) << m
    # largest top limb any threshold could accept
    thr_top = np.int64(-1)
    for k in range(n_thr):
        if thr[k, top] > thr_top:
            thr_top = thr[k, top]
    if lvl_t >= 0 and thr[lvl_t, top] > thr_top:
        thr_top = thr[lvl_t, top]
    if dthr_t >= 0 and thr[dthr_t, top] > thr_top:
        thr_top = thr[dthr_t, top]
    for t in range(total):
        if t > 0:
            low = t & -t
            j = 0
            while low > 1:
                low >>= 1
                j += 1
            i = free[j]
            if signs[i] == star[i]:
                dist += 1
            else:
                dist -= 1
            if signs[i] > 0:
                _add_row(s, dneg, i, L)
                signs[i] = -1
            else:
                _add_row(s, dpos, i, L)
                signs[i] = 1
            mask ^= lexbit[i]
        # lower bound on the top limb of |s|
        st = s[top]
        atop = st if st >= 0 else -st - 1
        if zfound[dist] and atop > zbest[dist, top] and atop > thr_top:
            continue
        _abs_into(s, a, L)
        if not zfound[dist]:
            zfound[dist] = True
            for l in range(L):
                zbest[dist, l] = a[l]
            zmask[dist] = mask
        else:
            c = _cmp_row(a, zbest, dist, L)
            if c < 0 or (c == 0 and mask < zmask[dist]):
                for l in range(L):
                    zbest[dist, l] = a[l]
                zmask[dist] = mask
        if a[top] > thr_top:
            continue
        for k in range(n_thr):
            if _cmp_row(a, thr, k, L) <= 0:
                counts[k] += 1
        if dthr_t >= 0:
            if _cmp_row(a, thr, dthr_t, L) <= 0:
                dcounts[dist] += 1
        if lvl_t >= 0:
            if _cmp_row(a, thr, lvl_t, L) <= 0:
                idx = lvl_count[0]
                if idx < cap:
                    lvl_buf[idx] = mask
                lvl_count[0] = idx + 1
    return s


@njit(cache=True, nogil=True)
def walk_trace(dpos, dneg, s_init, signs, mask_init, lexbit, free):
    """Running sums and keys at every step of the walk (for testing)."""
    L = s_init.shape[0]
    m = free.shape[0]
    total = np.int64(1) << m
    sums = np.empty((total, L), dtype=np.int64)
    masks = np.empty(total, dtype=np.int64)
    s = s_init.copy()
    mask = mask_init
    for t in range(total):
        if t > 0:
            low = t & -t
            j = 0
            while low > 1:
                low >>= 1
                j += 1
            i = free[j]
            if signs[i] > 0:
                _add_row(s, dneg, i, L)
                signs[i] = -1
            else:
                _add_row(s, dpos, i, L)
                signs[i] = 1
            mask ^= lexbit[i]
        for l in range(L):
            sums[t, l] = s[l]
        masks[t] = mask
    return sums, masks
