"""Polynomial-time solvers and the success / stability / anti-concentration probes."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import (
    Energy,
    Instance,
    Partition,
    canonicalize,
    energy_pow,
    hamiltonian,
    hamming_distance,
    inner_product,
)
from .rng import substream
from .sampler import PlantedSpec, _planted_from_rng, correlated_pair


@dataclass(frozen=True)
class Algorithm:
    """A deterministic map (instance, seed) -> partition."""

    name: str
    solve: Callable[[Instance, int], Partition]

    def __call__(self, inst: Instance, seed: int = 0) -> Partition:
        out = self.solve(inst, seed)
        if out.n != inst.n:
            raise ValueError(f"{self.name} returned a partition of the wrong dimension")
        return out


@dataclass(frozen=True)
class StabilityRecord:
    trial: int
    rho: float
    dist_sq: float
    d_h: int
    bound_ok: bool


# --------------------------------------------------------------------------
# solvers
# --------------------------------------------------------------------------


def _sign_adjust(colors, inst: Instance) -> Partition:
    # colors act on |x_i|; fold the sign of x_i back in
    return Partition.from_signs(c if v >= 0 else -c for c, v in zip(colors, inst.x))


def ldm_with_residue(inst: Instance) -> tuple:
    """Largest differencing; returns (partition, exact residue numerator)."""
    n = inst.n
    heap = [(-abs(v), i) for i, v in enumerate(inst.x)]
    heapq.heapify(heap)
    adj = [[] for _ in range(n)]
    while len(heap) > 1:
        a, ia = heapq.heappop(heap)
        b, ib = heapq.heappop(heap)
        # a <= b as negated keys, so -a >= -b
        adj[ia].append(ib)
        adj[ib].append(ia)
        heapq.heappush(heap, (a - b, ia))
    residue, root = -heap[0][0], heap[0][1]
    colors = [0] * n
    colors[root] = 1
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if colors[v] == 0:
                colors[v] = -colors[u]
                queue.append(v)
    return canonicalize(_sign_adjust(colors, inst)), residue


def ldm(inst: Instance, seed: int = 0) -> Partition:
    return ldm_with_residue(inst)[0]


def greedy(inst: Instance, seed: int = 0) -> Partition:
    """Largest first, each number to the currently lighter side (ties to side A)."""
    order = sorted(range(inst.n), key=lambda i: (-abs(inst.x[i]), i))
    colors = [0] * inst.n
    side_a = side_b = 0
    for i in order:
        if side_a <= side_b:
            side_a += abs(inst.x[i])
            colors[i] = 1
        else:
            side_b += abs(inst.x[i])
            colors[i] = -1
    return canonicalize(_sign_adjust(colors, inst))


def random_search(inst: Instance, budget: int, seed: int = 0) -> Partition:
    """Best of ``budget`` uniform canonical partitions.

    A budget covering all 2^(n-1) canonical partitions enumerates them
    instead of sampling.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    n = inst.n
    if budget >= 1 << (n - 1):
        keys = range(1 << (n - 1))
    else:
        rng = substream(seed, 0x5EA)
        keys = (int(k) for k in rng.integers(0, 1 << (n - 1), size=budget, dtype=np.int64))
    best = None
    for key in keys:
        p = Partition(n, key)
        e = abs(inner_product(p, inst))
        if best is None or (e, key) < best:
            best = (e, key)
    return Partition(n, best[1])


def exact_solver(inst: Instance, seed: int = 0) -> Partition:
    from .enumeration import full_scan

    return full_scan(inst).global_min[0]


def constant_algorithm(sigma: Partition, name: Optional[str] = None) -> Algorithm:
    return Algorithm(name or f"constant[{sigma}]", lambda inst, seed: sigma)


def sign_first_gadget(inst: Instance, seed: int = 0) -> Partition:
    """All +1 when x_1 >= 0, otherwise only the first coordinate flipped."""
    signs = [1] * inst.n
    if inst.x[0] < 0:
        signs[0] = -1
    return Partition.from_signs(signs)


ALGORITHMS = {
    "ldm": Algorithm("ldm", ldm),
    "greedy": Algorithm("greedy", greedy),
    "random": Algorithm("random", lambda inst, seed: random_search(inst, 1000, seed)),
    "exact": Algorithm("exact", exact_solver),
    "constant": Algorithm("constant", lambda inst, seed: Partition.ones(inst.n)),
    "sign_first": Algorithm("sign_first", sign_first_gadget),
}


def get_algorithm(name: str) -> Algorithm:
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None


# --------------------------------------------------------------------------
# probes
# --------------------------------------------------------------------------


def _planted_trials(spec: PlantedSpec, trials: int):
    for t in range(trials):
        yield t, _planted_from_rng(spec, substream(spec.seed, t))


def success_energies(alg: Algorithm, spec: PlantedSpec, trials: int) -> list:
    """Energy of the algorithm's output on each planted trial."""
    return [hamiltonian(alg(inst, t), inst) for t, inst in _planted_trials(spec, trials)]


def success_probe(alg: Algorithm, spec: PlantedSpec, eps: float, trials: int) -> float:
    """Fraction of planted trials with H(alg(X), X) <= 2^(-eps n), exactly."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    thr = energy_pow(spec.n, 2, eps * spec.n, spec.frac_bits)
    hits = sum(e <= thr for e in success_energies(alg, spec, trials))
    return hits / trials


def stability_probe(
    alg: Algorithm, n: int, rho: float, f: float, L: float, trials: int, seed: int
) -> list:
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    out = []
    for t in range(trials):
        x, y = correlated_pair(n, rho, substream(seed, t))
        scale = 2.0 ** -x.frac_bits
        dist_sq = sum((float(a - b) * scale) ** 2 for a, b in zip(x.x, y.x))
        d_h = hamming_distance(alg(x, t), alg(y, t))
        out.append(StabilityRecord(t, rho, dist_sq, d_h, d_h <= f + L * dist_sq))
    return out


def anticoncentration_probe(alg: Algorithm, spec: PlantedSpec, trials: int) -> float:
    """Fraction of planted trials whose output is neither sigma* nor -sigma*."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    star = spec.sigma_star
    miss = 0
    for t, inst in _planted_trials(spec, trials):
        out = alg(inst, t)
        if out.bits not in (star.bits, (-star).bits):
            miss += 1
    return miss / trials


def flip_probability(rho: float) -> float:
    """P[sign(X_1) != sign(Y_1)] for correlation rho."""
    return math.acos(rho) / math.pi
