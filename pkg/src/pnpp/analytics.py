"""Closed-form predictors, parameter prescriptions and exact identity checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .core import Partition, overlap

LOG2_3 = math.log2(3)
# 1 / (3 sqrt(2 pi)): cubic Taylor coefficient of P[|Z| <= z]
GAUSS_BOX_C = 1.0 / (3.0 * math.sqrt(2.0 * math.pi))
DEFAULT_C2 = 2.0
MAX_BINOM_N = 200

# rational enclosure of pi for exact comparisons
_PI_LO = Fraction(3141592653589793, 10**15)
_PI_HI = Fraction(3141592653589794, 10**15)


@dataclass(frozen=True)
class OgpParams:
    eps: float
    delta: float
    m: int
    c: float
    beta: float
    eta: float


@dataclass(frozen=True)
class MomentPrediction:
    n: int
    rho: float
    scale: float
    expected_count: float
    regime: str


@dataclass(frozen=True)
class StableHardnessParams:
    """Parameters of the stable-algorithm lower bound.

    ``T`` is a double exponential, so only ``loglog2_T = log2 log2 T`` is
    stored; each probability is ``2 ** (log2_prefactor - log2 T)``.
    """

    C1: float
    Q: float
    loglog2_T: float
    log2_pf_prefactor: float
    log2_pst_prefactor: float
    log2_pl_prefactor: float
    rho: float

    @property
    def log2_T(self) -> float:
        try:
            return 2.0**self.loglog2_T
        except OverflowError:
            return math.inf


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def inverse_binary_entropy(h: float) -> float:
    """The root p in [0, 1/2] of binary_entropy(p) = h."""
    if not 0.0 <= h <= 1.0:
        raise ValueError("h must lie in [0, 1]")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    return brentq(lambda p: binary_entropy(p) - h, 1e-300, 0.5, xtol=1e-16, rtol=4 * np.finfo(float).eps)


def binom_exact(n: int, k: int) -> int:
    if not 0 <= k <= n <= MAX_BINOM_N:
        raise ValueError(f"need 0 <= k <= n <= {MAX_BINOM_N}")
    return math.comb(n, k)


# --------------------------------------------------------------------------
# exact binomial identities and bounds
# --------------------------------------------------------------------------


def _entropy_power(n: int, k: int) -> Fraction:
    """2^(n h_b(k/n)) = n^n / (k^k (n-k)^(n-k)), exactly."""
    return Fraction(n**n, k**k * (n - k) ** (n - k))


def vandermonde_identity_check(n: int, p) -> bool:
    """sum_k C(pn, k) C((1-p)n, k) == C(n, pn), in exact integers."""
    p = Fraction(p)
    if not 0 <= p <= Fraction(1, 2) or (p * n).denominator != 1:
        raise ValueError("need p <= 1/2 with p*n integral")
    a = int(p * n)
    b = n - a
    return sum(math.comb(a, k) * math.comb(b, k) for k in range(a + 1)) == math.comb(n, a)


def binomial_sandwich_check(n: int, k: int) -> tuple:
    """(lower_ok, upper_ok) for sqrt(n/(8k(n-k))) R <= C(n,k) <= sqrt(n/(pi k(n-k))) R."""
    if not 1 <= k <= n - 1:
        raise ValueError("need 1 <= k <= n-1")
    r2 = _entropy_power(n, k) ** 2
    c2 = math.comb(n, k) ** 2
    lower_ok = Fraction(n, 8 * k * (n - k)) * r2 <= c2
    # upper: pi <= n R^2 / (k (n-k) C^2), decided against a rational enclosure of pi
    q = n * r2 / (k * (n - k) * c2)
    if q >= _PI_HI:
        upper_ok = True
    elif q < _PI_LO:
        upper_ok = False
    else:
        raise ArithmeticError("comparison falls inside the pi enclosure")
    return lower_ok, upper_ok


def binomial_sum_bound_check(n: int, k: int) -> bool:
    """sum_{i <= k} C(n, i) <= 2^(n h_b(k/n)) for k <= n/2, exactly."""
    if not 0 <= 2 * k <= n:
        raise ValueError("need 0 <= k <= n/2")
    total = sum(math.comb(n, i) for i in range(k + 1))
    if k == 0:
        return total <= 1
    return total <= _entropy_power(n, k)


def sublinear_binomial_ratio(n: int, d: int) -> float:
    """log2 C(n, d) / (d log2(n/d))."""
    return math.log2(math.comb(n, d)) / (d * math.log2(n / d))


# --------------------------------------------------------------------------
# Gaussian box probabilities
# --------------------------------------------------------------------------


# The true gaps of the Gaussian brackets can sit below double resolution
# (about z^5 at z = 1e-4), so bounds are widened by a few ulps.
_ULPS = 8


def _down(v: float) -> float:
    return v - _ULPS * math.ulp(v)


def _up(v: float) -> float:
    return v + _ULPS * math.ulp(v)


def gauss_box_1(z: float) -> tuple:
    """(lower, upper, approx) for P[|Z| <= z], 0 < z < 1."""
    if not 0.0 < z < 1.0:
        raise ValueError("need 0 < z < 1")
    approx = math.sqrt(2.0 / math.pi) * z
    return _down(approx - GAUSS_BOX_C * z**3), _up(approx), approx


def gauss_box_2(z1: float, z2: float, rho: float, printed_form: bool = False) -> tuple:
    """(lower, upper) for P[|Z| <= z1, |Z_rho| <= z2].

    The lower bound is ``upper * (1 - (z1^2 + z2^2)/(1 - rho^2))``, which is
    what ``exp(-u) >= 1 - u`` gives over the box. ``printed_form`` divides by
    ``sqrt(1 - rho^2)`` instead; that variant is not a valid bound once
    ``rho`` exceeds about 0.986.
    """
    if z1 <= 0 or z2 <= 0:
        raise ValueError("need z1, z2 > 0")
    if not 0.0 <= rho < 1.0:
        raise ValueError("need 0 <= rho < 1")
    root = math.sqrt(1.0 - rho * rho)
    if (z1 * z1 + z2 * z2) / root >= 1.0:
        raise ValueError("bracket requires (z1^2 + z2^2)/sqrt(1 - rho^2) < 1")
    upper = 2.0 * z1 * z2 / (math.pi * root)
    denom = root if printed_form else 1.0 - rho * rho
    return _down(upper * (1.0 - (z1 * z1 + z2 * z2) / denom)), _up(upper)


# --------------------------------------------------------------------------
# spectra and determinants
# --------------------------------------------------------------------------


def sigma_prime(rho: float) -> np.ndarray:
    rb = 1.0 - 2.0 * rho
    return np.array([[1.0, rb * rb, rb], [rb * rb, 1.0, rb], [rb, rb, 1.0]])


def lambda_rho(rho: float) -> float:
    """Smallest eigenvalue of sigma_prime(rho).

    For rho > 1/2 (negative rho_bar) the smallest root uses |rho_bar|.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("need 0 < rho < 1")
    rb = abs(1.0 - 2.0 * rho)
    return (rb * rb + 2.0 - rb * math.sqrt(rb * rb + 8.0)) / 2.0


def gram_det3(s1: Partition, s2: Partition, s3: Partition) -> Fraction:
    """Exact determinant of the normalized overlap Gram matrix."""
    trio = (s1, s2, s3)
    n = s1.n
    for i in range(3):
        for j in range(i + 1, 3):
            if trio[i].bits in (trio[j].bits, (-trio[j]).bits):
                raise ValueError("partitions must be pairwise distinct and non-antipodal")
    g = [[overlap(a, b).numerator for b in trio] for a in trio]
    det = (
        g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
        - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
    )
    return Fraction(det, n**3)


# --------------------------------------------------------------------------
# moment predictors
# --------------------------------------------------------------------------


def first_moment_zeta(n: int, rho: float, scale: float) -> MomentPrediction:
    """Leading-order E_pl of #{sigma : d_H(sigma, sigma*) = rho n, H <= scale sqrt(n) 2^(-n h_b(rho))}."""
    k = rho * n
    if not (0.0 < rho <= 0.5) or abs(k - round(k)) > 1e-9:
        raise ValueError("need 0 < rho <= 1/2 with rho*n integral")
    k = int(round(k))
    rb = 1.0 - 2.0 * rho
    log2_count = (
        math.log2(math.comb(n, k))
        + math.log2(2.0 * scale)
        + 0.5 * math.log2(n)
        - n * binary_entropy(rho)
        - 0.5 * math.log2(2.0 * math.pi * (1.0 - rb * rb))
    )
    count = 2.0**log2_count
    return MomentPrediction(n, rho, scale, count, "diverging" if count >= 1.0 else "vanishing")


def first_moment_ground(n: int, scale: float) -> MomentPrediction:
    """Leading-order E_pl of #{sigma != +-sigma* : H <= scale 2^-n}."""
    total = 0.0
    for k in range(1, n):
        rb = 1.0 - 2.0 * k / n
        total += math.comb(n, k) * 2.0 * scale * 2.0**-n / math.sqrt(2.0 * math.pi * (1.0 - rb * rb))
    return MomentPrediction(n, math.nan, scale, total, "diverging" if total >= 1.0 else "vanishing")


# --------------------------------------------------------------------------
# parameter prescriptions
# --------------------------------------------------------------------------


def ogp_parameters(eps: float, delta: float) -> OgpParams:
    if not 0.0 <= delta < eps <= 1.0:
        raise ValueError("need 0 <= delta < eps <= 1")
    gap = eps - delta
    m = math.ceil(8.0 * (1.0 + LOG2_3) / gap)
    c = gap / 2.0
    target = gap / 4.0

    def phi(beta):
        return binary_entropy((1.0 - beta) / 2.0 + (1.0 - beta) / (4.0 * m)) - target

    if not (phi(0.0) > 0.0 > phi(1.0 - 1e-15)):
        raise ArithmeticError("beta root is not bracketed")
    beta = brentq(phi, 0.0, 1.0 - 1e-15, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    eta = (1.0 - beta) / (2.0 * m)
    assert eta < (1.0 - beta) / m
    return OgpParams(eps, delta, m, c, beta, eta)


def chaos_eta_star(eps: float) -> float:
    """eta* with h_b(eta*/2) = eps/2."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("need 0 < eps <= 1")
    return 2.0 * inverse_binary_entropy(eps / 2.0)


def stability_bound_parameters(eps: float, L: float, eta: float, m: int, n: int = 0, c2: float = DEFAULT_C2):
    """Stable-hardness parameters for a given m-OGP (eta, m) and stability slope L.

    ``n`` only enters p_f through its 3^-n factor.
    """
    if min(eps, L, eta, m) <= 0:
        raise ValueError("inputs must be positive")
    C1 = eta * eta / 1600.0
    Q = 40.0 * c2 * math.pi * math.sqrt(L) / eta
    loglog = 4.0 * m * Q * math.log2(Q)
    return StableHardnessParams(
        C1=C1,
        Q=Q,
        loglog2_T=loglog,
        log2_pf_prefactor=-n * LOG2_3 - math.log2(108.0 * Q * math.sqrt(math.pi)),
        log2_pst_prefactor=math.log2(math.pi / (648.0 * Q * Q)),
        log2_pl_prefactor=-math.log2(54.0),
        rho=math.cos(math.pi / (2.0 * Q)),
    )


def report(pred) -> str:
    """key=value lines for any predictor dataclass."""
    lines = []
    for k, v in vars(pred).items():
        lines.append(f"{k}={format(v, '.17g') if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"
