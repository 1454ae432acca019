import itertools
import math

import numpy as np
import pytest
from scipy import integrate, stats

from pnpp.core import Partition, hamiltonian, inner_product, quantize
from pnpp.enumeration import full_scan
from pnpp.heuristics import (
    ALGORITHMS,
    Algorithm,
    anticoncentration_probe,
    constant_algorithm,
    exact_solver,
    flip_probability,
    get_algorithm,
    greedy,
    ldm,
    ldm_with_residue,
    random_search,
    sign_first_gadget,
    stability_probe,
    success_energies,
    success_probe,
)
from pnpp.sampler import PlantedSpec, sample_unplanted

# P[sign X != sign Y] at rho = 0.99, from the bivariate normal orthant probability
FLIP_099 = 0.0450534


def _orthant_flip(rho):
    # 2 * P[X > 0, Y < 0] by integrating the conditional law of Y given X
    f = lambda x: stats.norm.pdf(x) * stats.norm.cdf(-rho * x / math.sqrt(1 - rho * rho))
    return 2 * integrate.quad(f, 0, np.inf)[0]


def test_flip_oracle():
    assert abs(_orthant_flip(0.99) - FLIP_099) < 1e-7
    assert abs(flip_probability(0.99) - _orthant_flip(0.99)) < 1e-9


def _brute_min(inst):
    return min(abs(inner_product(Partition.from_signs(s), inst)) for s in itertools.product((1, -1), repeat=inst.n))


def test_ldm_examples():
    inst = quantize([4, 5, 6, 7], 8)
    p, r = ldm_with_residue(inst)
    assert r == 0 and hamiltonian(p, inst).inner == 0
    assert {inst.x[i] for i in range(4) if p.sign(i) == p.sign(3)} == {7 << 8, 4 << 8}
    assert _brute_min(inst) == 0
    inst = quantize([5, 3], 0)
    p, r = ldm_with_residue(inst)
    assert r == 2
    assert abs(hamiltonian(p, inst).value - math.sqrt(2)) < 1e-12
    inst = quantize([-2.5], 4)
    assert hamiltonian(ldm(inst), inst).value == 2.5


def test_ldm_residue_identity_and_negatives():
    for s in range(200):
        inst = sample_unplanted(int(3 + s % 40), s)
        p, r = ldm_with_residue(inst)
        assert abs(inner_product(p, inst)) == r
        assert p.is_canonical()


def test_ldm_never_beats_optimum():
    for s in range(200):
        inst = sample_unplanted(14, 1000 + s)
        assert hamiltonian(ldm(inst), inst) >= full_scan(inst).global_min[1]


def test_greedy_examples():
    inst = quantize([4, 5, 6, 7], 0)
    p = greedy(inst)
    assert hamiltonian(p, inst).inner == 0
    assert str(p) == "+--+"
    assert hamiltonian(greedy(quantize([3.0], 2)), quantize([3.0], 2)).value == 3.0
    for s in range(100):
        inst = sample_unplanted(14, s)
        assert hamiltonian(greedy(inst), inst) >= full_scan(inst).global_min[1]


def test_random_search():
    inst = sample_unplanted(10, 2)
    assert hamiltonian(random_search(inst, 2**9), inst) == full_scan(inst).global_min[1]
    a = random_search(inst, 1, seed=5)
    b = random_search(inst, 50, seed=5)
    assert hamiltonian(b, inst) <= hamiltonian(a, inst)
    assert random_search(inst, 50, seed=5) == b
    with pytest.raises(ValueError):
        random_search(inst, 0)


def test_random_search_worse_than_ldm():
    r, l = [], []
    for s in range(100):
        inst = sample_unplanted(20, s)
        r.append(hamiltonian(random_search(inst, 1000, s), inst).log2_value)
        l.append(hamiltonian(ldm(inst), inst).log2_value)
    assert np.median(r) > np.median(l)


def test_algorithm_wrapper_checks_dimension():
    bad = Algorithm("bad", lambda inst, seed: Partition.ones(inst.n + 1))
    with pytest.raises(ValueError):
        bad(sample_unplanted(4, 0))
    with pytest.raises(ValueError):
        get_algorithm("nope")
    assert set(ALGORITHMS) >= {"ldm", "greedy", "random", "exact", "constant", "sign_first"}


def test_success_probe():
    exact = get_algorithm("exact")
    spec = PlantedSpec(12, 3)
    assert success_probe(exact, spec, 1.0, 20) == 1.0
    const = constant_algorithm(Partition.from_string("+-" * 12))
    assert success_probe(const, PlantedSpec(24, 4), 0.9, 100) == 0.0
    ldm_alg = get_algorithm("ldm")
    fr = [success_probe(ldm_alg, PlantedSpec(16, 5), e, 30) for e in (0.1, 0.3, 0.6, 1.0)]
    assert fr == sorted(fr, reverse=True)
    assert success_energies(ldm_alg, spec, 5) == success_energies(ldm_alg, spec, 5)


def test_stability_probe():
    recs = stability_probe(get_algorithm("constant"), 12, 0.5, 0, 1, 50, 1)
    assert all(r.d_h == 0 and r.bound_ok for r in recs)
    recs = stability_probe(Algorithm("sf", sign_first_gadget), 8, 0.99, 0, 0, 10**4, 2)
    moved = np.mean([r.d_h > 0 for r in recs])
    sd = math.sqrt(FLIP_099 * (1 - FLIP_099) / 1e4)
    assert abs(moved - FLIP_099) < 4 * sd
    mean_sq = np.mean([r.dist_sq for r in recs]) / 8
    assert abs(mean_sq - 2 * (1 - 0.99)) < 0.002
    assert recs == stability_probe(Algorithm("sf", sign_first_gadget), 8, 0.99, 0, 0, 10**4, 2)


def test_anticoncentration_probe():
    spec = PlantedSpec(12, 6)
    assert anticoncentration_probe(constant_algorithm(spec.sigma_star), spec, 20) == 0.0
    other = Partition.from_string("+-" * 6)
    assert anticoncentration_probe(constant_algorithm(other), spec, 20) == 1.0
    frac = anticoncentration_probe(get_algorithm("ldm"), PlantedSpec(20, 3), 200)
    assert 0.0 <= frac <= 1.0
    print(f"ldm anticoncentration at n=20, C=3: {frac}")


def test_exact_solver():
    inst = sample_unplanted(9, 0)
    assert hamiltonian(exact_solver(inst), inst).inner == _brute_min(inst)
