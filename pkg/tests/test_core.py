from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pnpp.core import (
    DimensionError,
    Energy,
    FixedReal,
    Instance,
    Partition,
    canonicalize,
    dequantize,
    energy_pow,
    energy_threshold,
    format_instance,
    hamiltonian,
    hamming_distance,
    inner_product,
    overlap,
    parse_instance,
    quantize,
    quantize_value,
    satisfies_planting,
)
from pnpp.sampler import PlantedSpec, sample_planted, sample_unplanted

P = Partition.from_string


def partitions(n_min=1, n_max=40):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.integers(0, (1 << n) - 1).map(lambda b: Partition(n, b))
    )


def test_hamiltonian_worked_example():
    inst = quantize([1.5, 0.5, -0.25, 0.75], 8)
    sigma = P("+-+-")
    assert inner_product(sigma, inst) == 0
    assert hamiltonian(sigma, inst).inner == 0
    assert hamiltonian(sigma, inst).value == 0.0


def test_hamiltonian_zero_instance():
    inst = Instance(5, (0,) * 5)
    for bits in range(32):
        assert hamiltonian(Partition(5, bits), inst).inner == 0


def test_hamiltonian_sign_symmetry():
    rng = np.random.default_rng(1)
    for seed in range(100):
        inst = sample_unplanted(16, seed)
        sigma = Partition(16, int(rng.integers(0, 1 << 16)))
        assert hamiltonian(sigma, inst) == hamiltonian(-sigma, inst)


def test_dimension_mismatch():
    inst = Instance(3, (1, 2, 3))
    with pytest.raises(DimensionError):
        inner_product(P("++"), inst)
    with pytest.raises(DimensionError):
        hamming_distance(P("++"), P("+++"))


def test_overlap_examples():
    a = P("++++")
    assert overlap(a, a).numerator == 4
    assert overlap(a, -a).numerator == -4
    assert overlap(a, P("++--")).value == 0


def test_hamming_examples():
    a = P("++++")
    assert hamming_distance(a, a) == 0
    assert hamming_distance(a, -a) == 4
    assert hamming_distance(a, P("+-+-")) == 2


@given(partitions(), st.data())
def test_overlap_hamming_relation(a, data):
    b = Partition(a.n, data.draw(st.integers(0, (1 << a.n) - 1)))
    assert overlap(a, b).numerator == a.n - 2 * hamming_distance(a, b)
    assert (overlap(a, b).numerator - a.n) % 2 == 0


def test_canonicalize_examples():
    assert str(canonicalize(P("+--"))) == "+--"
    assert str(canonicalize(P("-++"))) == "+--"


@given(partitions())
def test_canonicalize_idempotent(sigma):
    c = canonicalize(sigma)
    assert canonicalize(c) == c
    assert c.is_canonical()
    assert c in (sigma, -sigma)


@given(partitions())
def test_partition_roundtrip(sigma):
    assert P(str(sigma)) == sigma
    assert Partition.from_signs(sigma.signs.tolist()) == sigma
    assert set(sigma.signs.tolist()) <= {-1, 1}
    assert len(sigma.signs) == sigma.n


def test_partition_order_is_lexicographic():
    strings = ["+++", "++-", "+-+", "+--", "-++"]
    assert sorted(P(s) for s in reversed(strings)) == [P(s) for s in strings]


def test_quantize_examples():
    assert quantize([0.5], 1).x == (1,)
    assert quantize([Fraction(1, 3)], 2).x == (1,)
    # ties go to even
    assert quantize_value(Fraction(1, 8), 2) == 0
    assert quantize_value(Fraction(3, 8), 2) == 2


def test_quantize_roundtrip_and_determinism():
    inst = sample_unplanted(20, 3)
    assert quantize(dequantize(inst), inst.frac_bits) == inst
    vals = np.random.default_rng(0).standard_normal(10)
    assert quantize(vals) == quantize(vals.copy())


def test_fixed_real_exact():
    a, b = FixedReal(3, 4), FixedReal(-7, 4)
    assert (a + b).value == -4
    assert (a - b).value == 10
    assert (-a).value == -3
    assert float(FixedReal(1, 1)) == 0.5
    with pytest.raises(ValueError):
        a + FixedReal(1, 5)


def test_no_overflow_at_max_magnitude():
    n = 30
    inst = Instance(n, tuple([2**10 << 128] * n))
    assert inner_product(Partition.ones(n), inst) == n * 2**138


def test_energy_ordering_exact():
    e1, e2 = Energy(10, 5), Energy(10, 6)
    assert e1 < e2 and e2 > e1 and e1 != e2
    assert Energy(10, 5) == Energy(10, 5)
    assert Energy(10, 10**40) < Energy.infinity(10)
    with pytest.raises(ValueError):
        Energy(10, 1) < Energy(11, 1)


def test_energy_log2():
    e = Energy(16, 3 << 120, 128)
    expected = np.log2(3) - 8 - 2
    assert abs(e.log2_value - expected) <= 1e-12 * abs(expected)
    assert Energy(4, 0).log2_value == -np.inf


def test_energy_threshold_exact():
    # floor(t sqrt(n) 2^F) with t = 1/2, n = 4: exactly 2^F
    assert energy_threshold(4, Fraction(1, 2), 10).inner == 1024
    # sqrt(2) * 2^10 = 1448.15...
    assert energy_threshold(2, 1, 10).inner == 1448
    thr = energy_pow(20, 3, 20)
    # H <= 3^-20  <=>  |<s,x>| <= 3^-20 sqrt(20) 2^128
    assert thr.inner**2 <= 20 * 2**256 // 3**40 < (thr.inner + 1) ** 2


def test_satisfies_planting_exact():
    n, F = 10, 64
    inner = energy_pow(n, 3, n, F).inner
    assert satisfies_planting(inner, n, 3, F)
    assert not satisfies_planting(inner + 1, n, 3, F)


def test_instance_format_roundtrip():
    inst = sample_planted(PlantedSpec(12, 5))
    text = format_instance(inst)
    assert parse_instance(text) == inst
    plain = sample_unplanted(7, 1)
    assert parse_instance(format_instance(plain)) == plain


def test_instance_rejects_bad_target():
    inst = sample_planted(PlantedSpec(8, 1))
    bad = inst.planted.__class__(inst.planted.sigma_star, 3.0, inst.planted.target_inner + 1)
    with pytest.raises(ValueError):
        Instance(8, inst.x, inst.frac_bits, bad)
