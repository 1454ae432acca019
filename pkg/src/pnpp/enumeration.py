"""Exhaustive landscape scans over canonical partitions.

The walk pins coordinate 0 to +1 and runs a binary-reflected Gray code over
the remaining coordinates, so each of the 2^(n-1) canonical partitions is
visited once with an O(1) update of <sigma, x>. A scan may be split into
blocks by fixing the leading ``prefix_bits`` free coordinates; blocks are
independent and their results merge associatively.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .core import (
    BudgetError,
    DimensionError,
    Energy,
    Instance,
    Partition,
    canonicalize,
    hamiltonian,
    inner_product,
)

MAX_SCAN_N = 30
DEFAULT_LEVEL_CAP = 10**6
DEFAULT_BALL_BUDGET = 10**7
# largest block collected at once when building level sets
_LEVEL_BLOCK_BITS = 16


@dataclass
class ScanResult:
    n: int
    sigma_star: Partition
    global_min: tuple  # (Partition, Energy), canonical partition
    global_min_excl: tuple  # (Partition, Energy) over partitions other than +-sigma_star
    zeta: list  # zeta[k] = min energy at distance exactly k, k = 0..n
    zeta_argmin: list  # partition at distance k attaining zeta[k]
    count_below: dict  # Energy threshold -> number of canonical partitions with H <= threshold
    count_at_distance: Optional[list] = None  # over all of Sigma_n, for ``distance_threshold``

    @property
    def profile(self) -> list:
        """zeta[1..n-1]."""
        return self.zeta[1 : self.n]


@dataclass
class LevelSet:
    threshold: Energy
    members: list = field(default_factory=list)
    truncated: bool = False


@dataclass(frozen=True)
class OgpQuery:
    m: int
    beta: float
    eta: float
    threshold_exponent: float
    tau_grid: tuple

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if not 0 < self.eta < self.beta < 1:
            raise ValueError("need 0 < eta < beta < 1")
        grid = list(self.tau_grid)
        if grid != sorted(grid) or any(not 0 <= t <= math.pi / 2 for t in grid):
            raise ValueError("tau grid must be sorted within [0, pi/2]")


# --------------------------------------------------------------------------
# scan plumbing
# --------------------------------------------------------------------------


class _Prepared:
    def __init__(self, inst: Instance, star: Partition):
        n = inst.n
        self.n = n
        self.inst = inst
        self.L = K.n_limbs(inst.frac_bits, max(40, max(abs(v) for v in inst.x).bit_length() - inst.frac_bits + 8 + n.bit_length()))
        self.dpos = np.stack([K.to_limbs(2 * v, self.L) for v in inst.x])
        self.dneg = np.stack([K.to_limbs(-2 * v, self.L) for v in inst.x])
        self.star = star.signs.astype(np.int8)
        self.lexbit = np.array([1 << (n - 1 - i) for i in range(n)], dtype=np.int64)

    def block(self, prefix_bits: int, p: int):
        """Start state for block ``p``: coordinates 1..prefix_bits set from p."""
        n = self.n
        signs = np.ones(n, dtype=np.int8)
        for j in range(prefix_bits):
            # coordinate 1 is the most significant prefix bit
            if (p >> (prefix_bits - 1 - j)) & 1:
                signs[1 + j] = -1
        sigma = Partition.from_signs(signs.tolist())
        s0 = K.to_limbs(inner_product(sigma, self.inst), self.L)
        dist = int(np.count_nonzero(signs != self.star))
        free = np.arange(n - 1, prefix_bits, -1, dtype=np.int64)
        return s0, signs, dist, sigma.bits, free


def _run_blocks(prep: _Prepared, prefix_bits: int, blocks, thr, n_thr, dthr_t, workers: int):
    n, L = prep.n, prep.L

    def one(p):
        s0, signs, dist, mask, free = prep.block(prefix_bits, p)
        zbest = np.zeros((n + 1, L), dtype=np.int64)
        zmask = np.zeros(n + 1, dtype=np.int64)
        zfound = np.zeros(n + 1, dtype=np.bool_)
        counts = np.zeros(max(1, n_thr), dtype=np.int64)
        dcounts = np.zeros(n + 1, dtype=np.int64)
        K.scan_block(
            prep.dpos, prep.dneg, s0, signs, prep.star, dist, mask, prep.lexbit, free,
            thr, n_thr, zbest, zmask, zfound, counts,
            -1, np.zeros(0, dtype=np.int64), np.zeros(1, dtype=np.int64),
            dthr_t, dcounts,
        )
        return zbest, zmask, zfound, counts, dcounts

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, blocks))
    return [one(p) for p in blocks]


def _better(a_val: int, a_key: int, b_val: int, b_key: int) -> bool:
    return a_val < b_val or (a_val == b_val and a_key < b_key)


def _as_threshold(t, n: int, frac_bits: int) -> Energy:
    if isinstance(t, Energy):
        if (t.n, t.frac_bits) != (n, frac_bits):
            raise DimensionError("threshold energy built for another (n, frac_bits)")
        return t
    from .core import energy_threshold

    return energy_threshold(n, t, frac_bits)


def full_scan(
    inst: Instance,
    sigma_star: Optional[Partition] = None,
    thresholds: Sequence = (),
    *,
    distance_threshold=None,
    prefix_bits: int = 0,
    workers: int = 1,
    max_n: int = MAX_SCAN_N,
) -> ScanResult:
    """Exact minima, distance profile and threshold counts for ``inst``.

    ``thresholds`` are Energies (or reals); counts are over canonical
    partitions. ``distance_threshold`` additionally counts, for every
    distance k, the members of Sigma_n at distance k with H below it.
    """
    n = inst.n
    if n > max_n:
        raise BudgetError(f"n={n} exceeds the exhaustive scan limit {max_n}")
    if sigma_star is None:
        sigma_star = inst.planted.sigma_star if inst.planted is not None else Partition.ones(n)
    if sigma_star.n != n:
        raise DimensionError("sigma_star has the wrong dimension")
    prefix_bits = max(0, min(prefix_bits, n - 1))
    thresholds = [_as_threshold(t, n, inst.frac_bits) for t in thresholds]
    all_thr = list(thresholds)
    dthr_t = -1
    if distance_threshold is not None:
        all_thr.append(_as_threshold(distance_threshold, n, inst.frac_bits))
        dthr_t = len(all_thr) - 1
    prep = _Prepared(inst, sigma_star)
    thr = K.threshold_limbs([t.inner for t in all_thr], prep.L)
    parts = _run_blocks(prep, prefix_bits, range(1 << prefix_bits), thr, len(thresholds), dthr_t, workers)

    # merge per-distance minima over canonical partitions
    best = [None] * (n + 1)  # (value, key)
    counts = np.zeros(max(1, len(thresholds)), dtype=np.int64)
    dcounts = np.zeros(n + 1, dtype=np.int64)
    for zbest, zmask, zfound, c, dc in parts:
        counts += c
        dcounts += dc
        for k in range(n + 1):
            if zfound[k]:
                v, key = K.from_limbs(zbest[k]), int(zmask[k])
                if best[k] is None or _better(v, key, *best[k]):
                    best[k] = (v, key)

    # canonical sigma at distance k also contributes -sigma at distance n-k
    zeta, zeta_arg, zeta_canon = [], [], []
    for k in range(n + 1):
        cands = []
        if best[k] is not None:
            cands.append((best[k][0], best[k][1], False))
        if best[n - k] is not None:
            cands.append((best[n - k][0], best[n - k][1], True))
        v, key, flipped = min(cands, key=lambda c: (c[0], c[1]))
        canon = Partition(n, key)
        zeta.append(Energy(n, v, inst.frac_bits))
        zeta_arg.append(-canon if flipped else canon)
        zeta_canon.append((v, key))

    def pick(ks):
        v, key = min((zeta_canon[k] for k in ks), key=lambda c: c)
        return Partition(n, key), Energy(n, v, inst.frac_bits)

    gmin = pick(range(n + 1))
    gmin_excl = pick(range(1, n)) if n > 1 else (None, Energy.infinity(n, inst.frac_bits))
    count_below = {t: int(counts[i]) for i, t in enumerate(thresholds)}
    count_at_distance = None
    if dthr_t >= 0:
        count_at_distance = [int(dcounts[k] + dcounts[n - k]) for k in range(n + 1)]
    return ScanResult(n, sigma_star, gmin, gmin_excl, zeta, zeta_arg, count_below, count_at_distance)


def walk_sums(inst: Instance) -> tuple:
    """Every running <sigma, x> of the sequential walk, with the visited keys."""
    prep = _Prepared(inst, Partition.ones(inst.n))
    s0, signs, _, mask, free = prep.block(0, 0)
    sums, masks = K.walk_trace(prep.dpos, prep.dneg, s0, signs, mask, prep.lexbit, free)
    return [K.from_limbs(row) for row in sums], [int(m) for m in masks]


# --------------------------------------------------------------------------
# Hamming balls and level sets
# --------------------------------------------------------------------------


def ball_min(inst: Instance, sigma_star: Partition, d: int, budget: int = DEFAULT_BALL_BUDGET):
    """Exact min of H over 1 <= d_H(sigma, sigma_star) <= d."""
    n = inst.n
    if sigma_star.n != n:
        raise DimensionError("sigma_star has the wrong dimension")
    if not 1 <= d <= n:
        raise ValueError("ball radius must satisfy 1 <= d <= n")
    size = sum(math.comb(n, k) for k in range(1, d + 1))
    if size > budget:
        raise BudgetError(f"ball of radius {d} has {size} points, budget {budget}")
    base = inner_product(sigma_star, inst)
    signs = sigma_star.signs.tolist()
    w = [2 * s * v for s, v in zip(signs, inst.x)]
    best = None  # (value, canonical key, flip set)
    for k in range(1, d + 1):
        for flips in itertools.combinations(range(n), k):
            v = abs(base - sum(w[i] for i in flips))
            if best is not None and v > best[0]:
                continue
            mask = sigma_star.bits
            for i in flips:
                mask ^= 1 << (n - 1 - i)
            ckey = canonicalize(Partition(n, mask)).bits
            if best is None or _better(v, ckey, best[0], best[1]):
                best = (v, ckey, mask)
    return Partition(n, best[2]), Energy(n, best[0], inst.frac_bits)


def extract_level_set(inst: Instance, threshold, cap: int = DEFAULT_LEVEL_CAP, max_n: int = MAX_SCAN_N) -> LevelSet:
    """Canonical partitions with H <= threshold, in lexicographic order."""
    n = inst.n
    if n > max_n:
        raise BudgetError(f"n={n} exceeds the exhaustive scan limit {max_n}")
    threshold = _as_threshold(threshold, n, inst.frac_bits)
    prep = _Prepared(inst, Partition.ones(n))
    thr = K.threshold_limbs([threshold.inner], prep.L)
    prefix_bits = max(0, n - 1 - _LEVEL_BLOCK_BITS)
    block_size = 1 << (n - 1 - prefix_bits)
    out = LevelSet(threshold)
    for p in range(1 << prefix_bits):
        s0, signs, dist, mask, free = prep.block(prefix_bits, p)
        buf = np.zeros(block_size, dtype=np.int64)
        cnt = np.zeros(1, dtype=np.int64)
        K.scan_block(
            prep.dpos, prep.dneg, s0, signs, prep.star, dist, mask, prep.lexbit, free,
            thr, 0, np.zeros((n + 1, prep.L), dtype=np.int64), np.zeros(n + 1, dtype=np.int64),
            np.zeros(n + 1, dtype=np.bool_), np.zeros(1, dtype=np.int64),
            0, buf, cnt, -1, np.zeros(n + 1, dtype=np.int64),
        )
        for key in np.sort(buf[: int(cnt[0])]).tolist():
            if len(out.members) == cap:
                out.truncated = True
                return out
            out.members.append(Partition(n, key))
    return out


# --------------------------------------------------------------------------
# overlap structure
# --------------------------------------------------------------------------


def _keys(parts) -> np.ndarray:
    return np.array([p.bits for p in parts], dtype=np.uint64)


def _overlaps(key: int, keys: np.ndarray, n: int) -> np.ndarray:
    return n - 2 * np.bitwise_count(keys ^ np.uint64(key)).astype(np.int64)


def overlap_histogram(ls) -> dict:
    """Counts of n * overlap over all unordered pairs of members."""
    members = ls.members if isinstance(ls, LevelSet) else list(ls)
    if len(members) < 2:
        raise ValueError("need at least two members")
    n = members[0].n
    keys = _keys(members)
    hist: dict = {}
    for i in range(len(keys) - 1):
        vals, cnt = np.unique(_overlaps(int(keys[i]), keys[i + 1 :], n), return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            hist[v] = hist.get(v, 0) + c
    return dict(sorted(hist.items()))


def cross_overlap_histogram(a, b) -> dict:
    """Counts of n * overlap over pairs (sigma, sigma') in a x b."""
    a = a.members if isinstance(a, LevelSet) else list(a)
    b = b.members if isinstance(b, LevelSet) else list(b)
    hist: dict = {}
    if not a or not b:
        return hist
    n = a[0].n
    kb = _keys(b)
    for p in a:
        vals, cnt = np.unique(_overlaps(p.bits, kb, n), return_counts=True)
        for v, c in zip(vals.tolist(), cnt.tolist()):
            hist[v] = hist.get(v, 0) + c
    return dict(sorted(hist.items()))


def _decimal(v) -> Fraction:
    # floats are read as the decimal they print as, so 0.6 means 6/10
    return Fraction(repr(v)) if isinstance(v, float) else Fraction(v)


def overlap_window(n: int, beta, eta) -> tuple:
    """Integer numerator range [lo, hi] with beta - eta <= num/n <= beta."""
    lo = _decimal(beta) - _decimal(eta)
    hi = _decimal(beta)
    return math.ceil(lo * n), math.floor(hi * n)


def tuple_candidates(sets, forbid: Optional[Partition] = None, both_signs: bool = True) -> list:
    """Per-set candidate keys in search order.

    With ``both_signs`` each canonical member of sets 2..m also stands for
    its negation; set 1 stays canonical since a global flip preserves every
    pairwise overlap.
    """
    out = []
    for i, s in enumerate(sets):
        members = s.members if isinstance(s, LevelSet) else list(s)
        keys = []
        for p in members:
            variants = [p, -p] if both_signs and i > 0 else [p]
            for v in variants:
                if forbid is not None and v.bits in (forbid.bits, (-forbid).bits):
                    continue
                keys.append(v.bits)
        out.append(keys)
    return out


def find_m_tuple(sets, beta, eta, forbid: Optional[Partition] = None, both_signs: bool = True):
    """An m-tuple with pairwise overlaps in [beta - eta, beta], or None.

    The search is exhaustive: members of later sets are bucketed by their
    overlap with the current choice for set 1 and pruned by forward
    checking, so ``None`` certifies that no such tuple exists.
    """
    if not sets:
        raise ValueError("need at least one set")
    cands = tuple_candidates(sets, forbid, both_signs)
    if any(len(c) == 0 for c in cands):
        return None
    n = next(iter(sets[0].members if isinstance(sets[0], LevelSet) else sets[0])).n
    lo, hi = overlap_window(n, beta, eta)
    if lo > hi:
        return None
    arrays = [np.array(c, dtype=np.uint64) for c in cands]
    m = len(arrays)

    def ok(key, pool):
        ov = _overlaps(key, pool, n)
        return pool[(ov >= lo) & (ov <= hi)]

    def dfs(chosen, pools):
        i = len(chosen)
        if i == m:
            return chosen
        for key in pools[0].tolist():
            rest = [ok(key, p) for p in pools[1:]]
            if any(r.size == 0 for r in rest):
                continue
            found = dfs(chosen + [key], rest)
            if found is not None:
                return found
        return None

    for first in arrays[0].tolist():
        pools = [ok(first, a) for a in arrays[1:]]
        if any(p.size == 0 for p in pools):
            continue
        found = dfs([first], pools)
        if found is not None:
            return [Partition(n, k) for k in found]
    return None


def find_m_tuple_naive(sets, beta, eta, forbid: Optional[Partition] = None, both_signs: bool = True):
    """Nested-loop reference for :func:`find_m_tuple`, same search order."""
    cands = tuple_candidates(sets, forbid, both_signs)
    n = next(iter(sets[0].members if isinstance(sets[0], LevelSet) else sets[0])).n
    lo, hi = overlap_window(n, beta, eta)
    for combo in itertools.product(*cands):
        if all(
            lo <= n - 2 * (combo[i] ^ combo[j]).bit_count() <= hi
            for i in range(len(combo))
            for j in range(i + 1, len(combo))
        ):
            return [Partition(n, k) for k in combo]
    return None


def brute_force_profile(inst: Instance, sigma_star: Partition) -> list:
    """Per-distance minima by direct enumeration of Sigma_n (slow, for checks)."""
    n = inst.n
    best = [None] * (n + 1)
    for bits in range(1 << n):
        p = Partition(n, bits)
        k = (bits ^ sigma_star.bits).bit_count()
        e = hamiltonian(p, inst)
        if best[k] is None or e < best[k]:
            best[k] = e
    return best
