"""Unplanted, planted, ensemble, interpolated and correlated instances.

Planting uses exact linear conditioning: with ``S = <sigma*, Z>`` and a
target ``T`` drawn from the conditional law, ``X = Z + sigma* (T - S)/n``.
The division is done in integers and the remainder is spread one ulp at a
time over the leading coordinates, so ``<sigma*, X> == T`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_FRAC_BITS,
    DimensionError,
    Instance,
    Partition,
    PlantingInfo,
    inner_product,
    quantize,
    quantize_value,
    satisfies_planting,
)
from .rng import substream

UNIFORM_BOUND = 1e-6


@dataclass(frozen=True)
class PlantedSpec:
    n: int
    seed: int
    base_c: float = 3.0
    sigma_star: Optional[Partition] = None
    frac_bits: int = DEFAULT_FRAC_BITS
    # square of the multiplier on the planting bound; 2 gives sqrt(2) * C^-n
    bound_sq: Fraction = Fraction(1)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.base_c > 2:
            raise ValueError("base_c must exceed 2")
        if self.sigma_star is None:
            object.__setattr__(self, "sigma_star", Partition.ones(self.n))
        elif self.sigma_star.n != self.n:
            raise DimensionError("sigma_star has the wrong dimension")


@dataclass(frozen=True)
class EnsembleSpec(PlantedSpec):
    replicas: int = field(default=1, kw_only=True)

    def __post_init__(self):
        super().__post_init__()
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return substream(int(seed_or_rng))


def sample_unplanted(n: int, seed, frac_bits: int = DEFAULT_FRAC_BITS) -> Instance:
    if n < 1:
        raise ValueError("n must be positive")
    return quantize(_rng(seed).standard_normal(n), frac_bits)


def sample_truncated_std_normal(bound: float, rng: np.random.Generator) -> float:
    """N(0, 1) conditioned on [-bound, bound].

    Below ``UNIFORM_BOUND`` the density is flat to within a factor
    ``1 + bound**2 / 2`` and a uniform draw is returned.
    """
    if not bound > 0:
        raise ValueError("bound must be positive")
    if bound <= UNIFORM_BOUND:
        return float(rng.uniform(-bound, bound))
    if bound >= 1.0:
        while True:
            z = float(rng.standard_normal())
            if abs(z) <= bound:
                return z
    # uniform proposal, accept with the Gaussian density ratio
    while True:
        u = float(rng.uniform(-bound, bound))
        if rng.random() <= math.exp(-0.5 * u * u):
            return u


def _plant(z: list, star: Partition, target: int) -> list:
    n = len(z)
    signs = star.signs
    s = sum(v if sg > 0 else -v for v, sg in zip(z, signs))
    q, r = divmod(target - s, n)
    out = []
    for i, (v, sg) in enumerate(zip(z, signs)):
        d = q + (1 if i < r else 0)
        out.append(v + d if sg > 0 else v - d)
    return out


def _planted_from_rng(spec: PlantedSpec, rng: np.random.Generator) -> Instance:
    n, F = spec.n, spec.frac_bits
    z = [quantize_value(v, F) for v in rng.standard_normal(n).tolist()]
    bound = math.sqrt(float(spec.bound_sq)) * spec.base_c ** (-n)
    if bound == 0.0 or bound * math.sqrt(n) * 2.0**F < 2**16:
        raise ValueError(f"frac_bits={F} too coarse to plant at n={n}, C={spec.base_c}")
    g = sample_truncated_std_normal(bound, rng)
    target = quantize_value(Fraction(g) * Fraction(math.sqrt(n)), F)
    # pull back inside the exact bound if rounding pushed it out
    while not satisfies_planting(target, n, spec.base_c, F, spec.bound_sq):
        target -= 1 if target > 0 else -1
    x = _plant(z, spec.sigma_star, target)
    info = PlantingInfo(spec.sigma_star, spec.base_c, target, Fraction(spec.bound_sq))
    return Instance(n, tuple(x), F, info)


def sample_planted(spec: PlantedSpec) -> Instance:
    return _planted_from_rng(spec, substream(spec.seed))


def sample_planted_ensemble(spec: EnsembleSpec) -> list:
    """``replicas + 1`` independent planted instances X_0..X_m.

    Replica ``j`` draws from substream ``(seed, j)``.
    """
    return [_planted_from_rng(spec, substream(spec.seed, j)) for j in range(spec.replicas + 1)]


def _round_lin(c: Fraction, s: Fraction, a: int, b: int) -> int:
    return round(c * a + s * b)


def interpolated_instance(x0: Instance, xi: Instance, tau: float) -> Instance:
    """Y(tau) = cos(tau) X_0 + sin(tau) X_i, coordinate-wise.

    cos/sin are evaluated in double precision, then every coordinate is
    formed exactly and rounded half-to-even. The endpoints return the
    inputs unchanged.
    """
    if x0.n != xi.n:
        raise DimensionError("interpolation endpoints differ in dimension")
    if x0.frac_bits != xi.frac_bits:
        raise ValueError("frac_bits mismatch")
    if not 0.0 <= tau <= math.pi / 2:
        raise ValueError("tau must lie in [0, pi/2]")
    if tau == 0.0:
        return x0.unplanted()
    if tau == math.pi / 2:
        return xi.unplanted()
    c, s = Fraction(math.cos(tau)), Fraction(math.sin(tau))
    return Instance(x0.n, tuple(_round_lin(c, s, a, b) for a, b in zip(x0.x, xi.x)), x0.frac_bits)


def correlated_pair(n: int, rho: float, seed, frac_bits: int = DEFAULT_FRAC_BITS):
    """(X, Y) with Y = rho X + sqrt(1 - rho^2) W."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    rng = _rng(seed)
    x = rng.standard_normal(n)
    w = rng.standard_normal(n)
    y = rho * x + math.sqrt(1.0 - rho * rho) * w
    return quantize(x, frac_bits), quantize(y, frac_bits)


def planted_inner_ok(inst: Instance) -> bool:
    """Both planting invariants, checked exactly."""
    p = inst.planted
    if p is None:
        return False
    inner = inner_product(p.sigma_star, inst)
    return inner == p.target_inner and satisfies_planting(inner, inst.n, p.base_c, inst.frac_bits, p.bound_sq)
