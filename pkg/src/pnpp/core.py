"""Exact partitions, fixed-point instances, energies and overlaps.

Numbers are stored as integer numerators over ``2**frac_bits``; inner
products are exact integer sums. The ``1/sqrt(n)`` factor of the
Hamiltonian is never applied to the stored value, so two energies on the
same instance compare as plain integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from numbers import Rational
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_FRAC_BITS = 128
# quantize() refuses inputs at or above this magnitude
MAX_INPUT_MAGNITUDE = 2**20


class DimensionError(ValueError):
    """Two objects that must share a dimension do not."""


def _check_dims(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} != {b}")


# --------------------------------------------------------------------------
# Partition
# --------------------------------------------------------------------------


@total_ordering
@dataclass(frozen=True)
class Partition:
    """A sign vector in {-1, +1}^n packed into an int.

    Bit ``n-1-i`` is set iff coordinate ``i`` (0-based) is ``-1``, so integer
    order on ``bits`` is the lexicographic order of the ``+``/``-`` string.
    """

    n: int
    bits: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError("bits out of range for n")

    @classmethod
    def from_signs(cls, signs: Iterable[int]) -> "Partition":
        signs = list(signs)
        n = len(signs)
        bits = 0
        for i, s in enumerate(signs):
            if s == -1:
                bits |= 1 << (n - 1 - i)
            elif s != 1:
                raise ValueError(f"entry {i} is {s}, expected +1 or -1")
        return cls(n, bits)

    @classmethod
    def from_string(cls, text: str) -> "Partition":
        text = text.strip()
        if not text or set(text) - {"+", "-"}:
            raise ValueError(f"not a partition string: {text!r}")
        return cls.from_signs(1 if c == "+" else -1 for c in text)

    @classmethod
    def ones(cls, n: int) -> "Partition":
        return cls(n, 0)

    @property
    def signs(self) -> np.ndarray:
        shifts = np.arange(self.n - 1, -1, -1, dtype=np.uint64)
        if self.n <= 64:
            raw = (np.uint64(self.bits) >> shifts) & np.uint64(1)
        else:
            raw = np.array([(self.bits >> int(s)) & 1 for s in shifts], dtype=np.uint64)
        return (1 - 2 * raw.astype(np.int8)).astype(np.int8)

    def sign(self, i: int) -> int:
        return -1 if (self.bits >> (self.n - 1 - i)) & 1 else 1

    def __neg__(self) -> "Partition":
        return Partition(self.n, self.bits ^ ((1 << self.n) - 1))

    def __lt__(self, other: "Partition") -> bool:
        _check_dims(self.n, other.n)
        return self.bits < other.bits

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b").replace("0", "+").replace("1", "-")

    def is_canonical(self) -> bool:
        return not (self.bits >> (self.n - 1)) & 1


def canonicalize(sigma: Partition) -> Partition:
    """Representative of {sigma, -sigma} with first coordinate +1."""
    return sigma if sigma.is_canonical() else -sigma


def hamming_distance(a: Partition, b: Partition) -> int:
    _check_dims(a.n, b.n)
    return (a.bits ^ b.bits).bit_count()


@dataclass(frozen=True)
class OverlapValue:
    """Normalized overlap ``numerator / n`` on the grid {(n - 2k)/n}."""

    n: int
    numerator: int

    def __post_init__(self):
        if not -self.n <= self.numerator <= self.n or (self.numerator - self.n) % 2:
            raise ValueError(f"{self.numerator} is not on the overlap grid for n={self.n}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.n)

    def __float__(self) -> float:
        return self.numerator / self.n


def overlap(a: Partition, b: Partition) -> OverlapValue:
    return OverlapValue(a.n, a.n - 2 * hamming_distance(a, b))


# --------------------------------------------------------------------------
# Fixed-point numbers and instances
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedReal:
    """``value * 2**-frac_bits``; add/sub/neg are exact."""

    value: int
    frac_bits: int = DEFAULT_FRAC_BITS

    def _same(self, other: "FixedReal") -> None:
        if self.frac_bits != other.frac_bits:
            raise ValueError("frac_bits mismatch")

    def __add__(self, other: "FixedReal") -> "FixedReal":
        self._same(other)
        return FixedReal(self.value + other.value, self.frac_bits)

    def __sub__(self, other: "FixedReal") -> "FixedReal":
        self._same(other)
        return FixedReal(self.value - other.value, self.frac_bits)

    def __neg__(self) -> "FixedReal":
        return FixedReal(-self.value, self.frac_bits)

    def __float__(self) -> float:
        return math.ldexp(float(self.value), -self.frac_bits) if abs(self.value) < 2**1000 else float(
            self.as_fraction()
        )

    def as_fraction(self) -> Fraction:
        return Fraction(self.value, 1 << self.frac_bits)


@dataclass(frozen=True)
class PlantingInfo:
    """Metadata attached to a planted instance.

    ``target_inner`` is the exact numerator of ``<sigma_star, x>``; the
    realized normalized value ``n**-0.5 * <sigma_star, x>`` is ``target_g``.
    """

    sigma_star: Partition
    base_c: float
    target_inner: int
    bound_sq: Fraction = Fraction(1)

    def target_g(self, n: int, frac_bits: int) -> float:
        return float(FixedReal(self.target_inner, frac_bits)) / math.sqrt(n)


@dataclass(frozen=True)
class Instance:
    n: int
    x: tuple  # int numerators over 2**frac_bits
    frac_bits: int = DEFAULT_FRAC_BITS
    planted: Optional[PlantingInfo] = field(default=None, compare=True)

    def __post_init__(self):
        if self.n < 1 or len(self.x) != self.n:
            raise DimensionError(f"instance of length {len(self.x)} declared with n={self.n}")
        if self.planted is not None:
            star = self.planted.sigma_star
            _check_dims(star.n, self.n)
            if inner_product(star, self) != self.planted.target_inner:
                raise ValueError("planted target does not match <sigma_star, x>")

    def values(self) -> np.ndarray:
        """Float view of the numbers (lossy)."""
        f = -self.frac_bits
        return np.array([math.ldexp(float(v), f) for v in self.x])

    def fixed(self, i: int) -> FixedReal:
        return FixedReal(self.x[i], self.frac_bits)

    def unplanted(self) -> "Instance":
        return Instance(self.n, self.x, self.frac_bits)


def inner_product(sigma: Partition, inst: Instance) -> int:
    """Exact numerator of <sigma, x>."""
    _check_dims(sigma.n, inst.n)
    total = 0
    bits = sigma.bits
    n = sigma.n
    for i, v in enumerate(inst.x):
        if (bits >> (n - 1 - i)) & 1:
            total -= v
        else:
            total += v
    return total


# --------------------------------------------------------------------------
# Energy
# --------------------------------------------------------------------------


@total_ordering
@dataclass(frozen=True)
class Energy:
    """H = |<sigma, x>| / sqrt(n), held as the exact numerator of |<sigma, x>|.

    ``inner`` is ``None`` for +infinity (used as a threshold).
    """

    n: int
    inner: Optional[int]
    frac_bits: int = DEFAULT_FRAC_BITS

    def __post_init__(self):
        if self.inner is not None and self.inner < 0:
            raise ValueError("energy numerator must be nonnegative")

    @classmethod
    def infinity(cls, n: int, frac_bits: int = DEFAULT_FRAC_BITS) -> "Energy":
        return cls(n, None, frac_bits)

    @property
    def is_infinite(self) -> bool:
        return self.inner is None

    def _key(self, other: "Energy"):
        if (self.n, self.frac_bits) != (other.n, other.frac_bits):
            raise ValueError("energies on different (n, frac_bits) are not comparable")
        return (self.inner is None, self.inner or 0), (other.inner is None, other.inner or 0)

    def __lt__(self, other: "Energy") -> bool:
        a, b = self._key(other)
        return a < b

    def __le__(self, other: "Energy") -> bool:
        a, b = self._key(other)
        return a <= b

    def __eq__(self, other) -> bool:
        if not isinstance(other, Energy):
            return NotImplemented
        return (self.n, self.frac_bits, self.inner) == (other.n, other.frac_bits, other.inner)

    def __hash__(self):
        return hash((self.n, self.frac_bits, self.inner))

    @property
    def log2_value(self) -> float:
        if self.inner is None:
            return math.inf
        if self.inner == 0:
            return -math.inf
        return math.log2(self.inner) - self.frac_bits - 0.5 * math.log2(self.n)

    @property
    def value(self) -> float:
        if self.inner is None:
            return math.inf
        return math.ldexp(float(self.inner), -self.frac_bits) / math.sqrt(self.n)


def hamiltonian(sigma: Partition, inst: Instance) -> Energy:
    return Energy(inst.n, abs(inner_product(sigma, inst)), inst.frac_bits)


def energy_threshold(n: int, t, frac_bits: int = DEFAULT_FRAC_BITS) -> Energy:
    """Largest representable energy <= t, so ``H <= t`` iff ``H <= result``.

    ``t`` is taken as an exact rational (floats are converted exactly);
    ``math.inf`` gives the infinite threshold.
    """
    if isinstance(t, float) and math.isinf(t):
        if t < 0:
            raise ValueError("threshold must be nonnegative")
        return Energy.infinity(n, frac_bits)
    q = Fraction(t)
    if q < 0:
        raise ValueError("threshold must be nonnegative")
    # floor(t * sqrt(n) * 2^F) == isqrt(floor(t^2 * n * 4^F))
    sq = q * q * n * (1 << (2 * frac_bits))
    return Energy(n, math.isqrt(sq.numerator // sq.denominator), frac_bits)


def energy_pow(n: int, base, exponent, frac_bits: int = DEFAULT_FRAC_BITS) -> Energy:
    """Threshold ``base ** -exponent``.

    Exact when ``base`` is rational and ``exponent`` an integer; otherwise the
    power is evaluated with mpmath at ``frac_bits + 64`` bits.
    """
    if isinstance(exponent, int) or (isinstance(exponent, Rational) and Fraction(exponent).denominator == 1):
        return energy_threshold(n, Fraction(base) ** -int(exponent), frac_bits)
    if isinstance(exponent, float) and exponent.is_integer():
        return energy_threshold(n, Fraction(base) ** -int(exponent), frac_bits)
    import mpmath

    with mpmath.workprec(frac_bits + 64 + int(abs(float(exponent)) * math.log2(max(float(base), 2.0)))):
        y = mpmath.power(mpmath.mpf(base), -mpmath.mpf(exponent)) * mpmath.sqrt(n) * mpmath.mpf(2) ** frac_bits
        return Energy(n, int(mpmath.floor(y)), frac_bits)


def satisfies_planting(inner: int, n: int, base_c, frac_bits: int, bound_sq=1) -> bool:
    """Exact test of ``|inner| 2^-F / sqrt(n) <= sqrt(bound_sq) * base_c**-n``."""
    c = Fraction(base_c)
    lhs = inner * inner * c ** (2 * n)
    return lhs <= Fraction(bound_sq) * n * (1 << (2 * frac_bits))


# --------------------------------------------------------------------------
# Quantization and serialization
# --------------------------------------------------------------------------


def quantize_value(v, frac_bits: int = DEFAULT_FRAC_BITS) -> int:
    if isinstance(v, float):
        if not abs(v) < MAX_INPUT_MAGNITUDE:
            raise OverflowError(f"|{v}| >= 2^20 cannot be quantized")
        # a float is num / 2^k exactly; shift, rounding half to even
        num, den = v.as_integer_ratio()
        shift = den.bit_length() - 1 - frac_bits
        if shift <= 0:
            return num << -shift
        q, r = divmod(num, 1 << shift)
        half = 1 << (shift - 1)
        if r > half or (r == half and q & 1):
            q += 1
        return q
    q = Fraction(v)
    if abs(q) >= MAX_INPUT_MAGNITUDE:
        raise OverflowError(f"|{float(q)}| >= 2^20 cannot be quantized")
    # round() on a Fraction is round-half-to-even
    return round(q * (1 << frac_bits))


def quantize(values: Sequence, frac_bits: int = DEFAULT_FRAC_BITS) -> Instance:
    """Round each real to the nearest multiple of ``2**-frac_bits``."""
    if isinstance(values, np.ndarray):
        values = values.tolist()
    nums = tuple(quantize_value(v, frac_bits) for v in values)
    return Instance(len(nums), nums, frac_bits)


def dequantize(inst: Instance) -> list:
    """Exact rational values of the instance."""
    return [Fraction(v, 1 << inst.frac_bits) for v in inst.x]


def format_instance(inst: Instance) -> str:
    head = f"{inst.n} {inst.frac_bits}"
    lines = []
    if inst.planted is not None:
        p = inst.planted
        head += f" {p.base_c!r}"
        lines.append(f"# sigma_star {p.sigma_star}")
        lines.append(f"# target_inner {p.target_inner}")
        if p.bound_sq != 1:
            lines.append(f"# bound_sq {p.bound_sq}")
    return "\n".join([head, *lines, *(str(v) for v in inst.x)]) + "\n"


def parse_instance(text: str) -> Instance:
    rows = [r.strip() for r in text.splitlines() if r.strip()]
    if not rows:
        raise ValueError("empty instance file")
    head = rows[0].split()
    if len(head) not in (2, 3):
        raise ValueError(f"bad header: {rows[0]!r}")
    n, frac_bits = int(head[0]), int(head[1])
    meta = {}
    values = []
    for r in rows[1:]:
        if r.startswith("#"):
            key, _, val = r[1:].strip().partition(" ")
            meta[key] = val.strip()
        else:
            values.append(int(r))
    if len(values) != n:
        raise DimensionError(f"header says n={n} but {len(values)} values follow")
    planted = None
    if len(head) == 3:
        planted = PlantingInfo(
            sigma_star=Partition.from_string(meta["sigma_star"]),
            base_c=float(head[2]),
            target_inner=int(meta["target_inner"]),
            bound_sq=Fraction(meta.get("bound_sq", "1")),
        )
    return Instance(n, tuple(values), frac_bits, planted)


class BudgetError(RuntimeError):
    """An exhaustive computation would exceed its configured budget."""
