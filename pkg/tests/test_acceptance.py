"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line; the lines are also collected into the
terminal summary by conftest.py. The seed is fixed in advance.
"""

import math
import subprocess
import sys
from fractions import Fraction

import mpmath
import numpy as np

from conftest import report
from pnpp import analytics as A
from pnpp.core import Energy, Partition, energy_pow, hamiltonian, inner_product, satisfies_planting
from pnpp.enumeration import LevelSet, find_m_tuple, find_m_tuple_naive, full_scan
from pnpp.experiments import ExperimentConfig, run
from pnpp.heuristics import ldm, ldm_with_residue
from pnpp.rng import path_key, substream
from pnpp.sampler import PlantedSpec, interpolated_instance, sample_planted, sample_unplanted

SEED = 7
mpmath.mp.dps = 20


def _in(v, lo, hi):
    return lo <= v <= hi


# 1 -------------------------------------------------------------------------


def test_c01_planted_ground_state_scaling():
    r = run(ExperimentConfig("ground_state_scaling", n_list=tuple(range(16, 27, 2)), trials=200, seed=SEED, planted=True))
    slope = r.summary["fit"]["slope"]
    ok = _in(slope, -1.15, -0.85)
    report(1, "planted ground-state slope in [-1.15, -0.85]", ok, f"slope={slope:.4f} wall={r.wall_clock:.0f}s")
    assert ok


# 2 -------------------------------------------------------------------------


def test_c02_unplanted_ground_state_scaling():
    r = run(ExperimentConfig("ground_state_scaling", n_list=tuple(range(16, 27, 2)), trials=200, seed=SEED, planted=False))
    slope = r.summary["fit"]["slope"]
    ok = _in(slope, -1.15, -0.85)
    report(2, "unplanted ground-state slope in [-1.15, -0.85]", ok, f"slope={slope:.4f} wall={r.wall_clock:.0f}s")
    assert ok


# 3 -------------------------------------------------------------------------


def test_c03_zeta_scaling():
    quarter = run(ExperimentConfig("zeta_scaling", n_list=(16, 20, 24), trials=200, seed=SEED, rho=0.25))
    half = run(ExperimentConfig("zeta_scaling", n_list=(16, 20, 24), trials=200, seed=SEED, rho=0.5))
    s1, s2 = quarter.summary["fit"]["slope"], half.summary["fit"]["slope"]
    ok = _in(s1, -0.91, -0.71) and _in(s2, -1.15, -0.85)
    report(3, "zeta slopes: rho=1/4 in [-0.91, -0.71], rho=1/2 in [-1.15, -0.85]", ok, f"rho=1/4 {s1:.4f}, rho=1/2 {s2:.4f}")
    assert ok


# 4 -------------------------------------------------------------------------


def test_c04_isolation():
    r = run(ExperimentConfig("isolation", n_list=(24,), trials=100, seed=SEED, eps=0.5, beta_entropy=0.4))
    v = r.summary["violations"]
    expected = r.summary["radius"][24]["expected_violations_per_trial"] * 100
    ok = v == 0
    report(4, "isolation: zero violations over 100 trials at n=24", ok,
           f"violations={v}, d={r.summary['radius'][24]['d']}, first-moment expectation={expected:.2f}")
    assert ok


# 5 -------------------------------------------------------------------------


def test_c05_sampler_exactness():
    bad_bound = bad_target = 0
    thr = energy_pow(20, 3, 20)
    for s in range(10**4):
        inst = sample_planted(PlantedSpec(20, path_key(SEED, s)))
        p = inst.planted
        inner = inner_product(p.sigma_star, inst)
        bad_target += inner != p.target_inner
        bad_bound += not (hamiltonian(p.sigma_star, inst) <= thr and satisfies_planting(inner, 20, 3, inst.frac_bits))
    ok = bad_bound == 0 and bad_target == 0
    report(5, "sampler: H(sigma*) <= 3^-n and target match in 10^4 samples", ok, f"bound={bad_bound}, target={bad_target}")
    assert ok


# 6 -------------------------------------------------------------------------


def test_c06_exact_identities():
    vand = all(A.vandermonde_identity_check(n, Fraction(a, n)) for n in range(1, 61) for a in range(n // 2 + 1))
    sandwich = all(A.binomial_sandwich_check(n, k) == (True, True) for n in range(2, 101) for k in range(1, n))
    sums = all(A.binomial_sum_bound_check(n, k) for n in range(1, 61) for k in range(n // 2 + 1))
    rng = substream(SEED, 6)
    det_bad = checked = 0
    while checked < 10_000:
        n = int(rng.integers(3, 61))
        trio = [Partition(n, int(rng.integers(0, 1 << 62)) & ((1 << n) - 1)) for _ in range(3)]
        if len({min(p.bits, p.bits ^ ((1 << n) - 1)) for p in trio}) < 3:
            continue
        det_bad += A.gram_det3(*trio) < Fraction(1, n**3)
        checked += 1
    ok = vand and sandwich and sums and det_bad == 0
    report(6, "exact identities: Vandermonde, sandwich, determinant, sum bound", ok,
           f"vandermonde={vand} sandwich={sandwich} sum={sums} det_violations={det_bad}")
    assert ok


# 7 -------------------------------------------------------------------------


def _box1_truth(z):
    return mpmath.erf(mpmath.mpf(z) / mpmath.sqrt(2))


def _box2_truth(z1, z2, rho):
    r = mpmath.mpf(rho)
    s = mpmath.sqrt(1 - r * r)
    f = lambda x: mpmath.npdf(x) * (mpmath.ncdf((z2 - r * x) / s) - mpmath.ncdf((-z2 - r * x) / s))
    return mpmath.quad(f, [-z1, 0, z1])


def test_c07_gaussian_brackets():
    rng = substream(SEED, 7)
    bad = 0
    for z in np.geomspace(1e-4, 0.5, 100):
        lo, hi, _ = A.gauss_box_1(float(z))
        bad += not (mpmath.mpf(lo) <= _box1_truth(z) <= mpmath.mpf(hi))
    for _ in range(100):
        rho = float(rng.uniform(0, 0.995))
        r = float(rng.uniform(0.01, 0.99)) * math.sqrt(math.sqrt(1 - rho * rho))
        a = float(rng.uniform(0.05, 0.95)) * math.pi / 2
        z1, z2 = r * math.cos(a), r * math.sin(a)
        lo, hi = A.gauss_box_2(z1, z2, rho)
        bad += not (mpmath.mpf(lo) <= _box2_truth(z1, z2, rho) <= mpmath.mpf(hi))
    ok = bad == 0
    report(7, "Gaussian brackets contain quadrature truth on 100-point grids", ok, f"violations={bad}")
    assert ok


# 8 -------------------------------------------------------------------------


def test_c08_lambda_and_hoffman_wielandt():
    err = max(abs(A.lambda_rho(r) - np.linalg.eigvalsh(A.sigma_prime(r))[0]) for r in np.linspace(0.0005, 0.9995, 1000))
    rng = substream(SEED, 8)
    bad = 0
    for _ in range(1000):
        a = rng.standard_normal((3, 3))
        a = a + a.T
        e = rng.standard_normal((3, 3)) * rng.uniform(1e-6, 2)
        e = e + e.T
        d = np.linalg.eigvalsh(a) - np.linalg.eigvalsh(a + e)
        bad += np.linalg.norm(d) > np.linalg.norm(e, "fro") + 1e-9
    ok = err <= 1e-10 and bad == 0
    report(8, "lambda(rho) within 1e-10; Hoffman-Wielandt holds", ok, f"max_err={err:.2e} hw_violations={bad}")
    assert ok


# 9 -------------------------------------------------------------------------


def test_c09_ldm():
    resid_bad = 0
    for s in range(1000):
        inst = sample_unplanted(2 + s % 60, path_key(SEED, 9, s))
        p, r = ldm_with_residue(inst)
        resid_bad += abs(inner_product(p, inst)) != r
    beat = 0
    for s in range(300):
        inst = sample_unplanted(2 + s % 13, path_key(SEED, 90, s))
        beat += hamiltonian(ldm(inst), inst) < full_scan(inst).global_min[1]
    ns = (64, 128, 256, 512)
    med = [float(np.median([hamiltonian(ldm(x), x).log2_value for x in (sample_unplanted(n, path_key(SEED, 91, n, t)) for t in range(100))])) for n in ns]
    x = [math.log2(n) ** 2 for n in ns]
    corr = float(np.corrcoef(x, med)[0, 1])
    decreasing = all(b < a for a, b in zip(med, med[1:]))
    ok = resid_bad == 0 and beat == 0 and decreasing and corr <= -0.9
    report(9, "LDM residue identity, never beats optimum, log-squared decay", ok,
           f"residue_bad={resid_bad} beat={beat} medians={[round(m, 2) for m in med]} corr={corr:.4f}")
    assert ok


# 10 ------------------------------------------------------------------------


def test_c10_interpolation():
    x0 = sample_planted(PlantedSpec(20, path_key(SEED, 10, 0)))
    xi = sample_planted(PlantedSpec(20, path_key(SEED, 10, 1)))
    ends = interpolated_instance(x0, xi, 0.0).x == x0.x and interpolated_instance(x0, xi, math.pi / 2).x == xi.x
    q = 10
    a0, b0 = sample_unplanted(10**5, path_key(SEED, 10, 2)), sample_unplanted(10**5, path_key(SEED, 10, 3))
    target = math.cos(math.pi / (2 * q))
    ys = [interpolated_instance(a0, b0, math.pi * k / (2 * q) if k < q else math.pi / 2).values() for k in range(q + 1)]
    worst = max(abs(np.corrcoef(u, v)[0, 1] - target) for u, v in zip(ys, ys[1:]))
    starts = all(
        run(ExperimentConfig("interpolation_trajectory", n_list=(12,), trials=5, seed=SEED, Q=q, replicas=3, algorithm=alg)).summary["start_overlaps_all_one"]
        for alg in ("ldm", "greedy")
    )
    ok = ends and worst <= 0.01 and starts
    report(10, "interpolation endpoints exact, adjacent correlation, O(tau0)=1", ok,
           f"endpoints={ends} max_corr_dev={worst:.4f} start_overlap_one={starts}")
    assert ok


# 11 ------------------------------------------------------------------------


def test_c11_ogp_and_chaos_probes():
    rng = substream(SEED, 11)
    mismatch = 0
    for q in range(100):
        n = int(rng.integers(6, 11))
        m = int(rng.integers(2, 4))
        sets = []
        for _ in range(m):
            keys = sorted(set(int(k) for k in rng.integers(0, 1 << (n - 1), size=int(rng.integers(1, 51)))))
            sets.append(LevelSet(Energy(n, 0), [Partition(n, k) for k in keys]))
        beta, eta = float(rng.uniform(-0.5, 1.0)), float(rng.uniform(0.0, 0.6))
        forbid = Partition(n, int(rng.integers(0, 1 << n))) if q % 3 == 0 else None
        mismatch += find_m_tuple(sets, beta, eta, forbid, bool(q % 2)) != find_m_tuple_naive(sets, beta, eta, forbid, bool(q % 2))
    root_err = max(abs(A.binary_entropy(A.chaos_eta_star(e) / 2) - e / 2) for e in np.linspace(0.05, 1.0, 20))
    r = run(ExperimentConfig("level_set_ogp", n_list=(20,), trials=1, seed=SEED, eps=0.6, Q=10, replicas=3))
    hist = r.extra["histogram"]
    keys_ok = len(hist.rows) > 0 and all(isinstance(row[2], int) and (row[2] - 20) % 2 == 0 for row in hist.rows)
    lines = hist.to_csv().splitlines()[1:]
    csv_ok = all(line.split(",")[2].lstrip("-").isdigit() for line in lines)
    ok = mismatch == 0 and root_err <= 1e-10 and keys_ok and csv_ok
    report(11, "find_m_tuple matches oracle, eta* root, n=20 histograms with integer keys", ok,
           f"mismatches={mismatch} root_err={root_err:.1e} histogram_rows={len(hist.rows)}")
    assert ok


# 12 ------------------------------------------------------------------------

CLI_COMMANDS = [
    ["scan", "--n", "12", "--seed", str(SEED), "--planted", "--c", "3"],
    ["sample", "--n", "16", "--seed", str(SEED)],
    ["zeta", "--n", "16", "--seed", str(SEED), "--trials", "5"],
    ["chaos", "--n", "12", "--seed", str(SEED), "--trials", "3"],
    ["distinguish", "--n", "12", "--seed", str(SEED), "--trials", "4"],
]


def test_c12_cli_reproducible():
    same = []
    for args in CLI_COMMANDS:
        cmd = [sys.executable, "-m", "pnpp.cli", *args]
        a = subprocess.run(cmd, capture_output=True, check=True).stdout
        b = subprocess.run(cmd, capture_output=True, check=True).stdout
        same.append(a == b and len(a) > 0)
    ok = all(same)
    report(12, "CLI output byte-identical across runs", ok, f"{sum(same)}/{len(same)} commands")
    assert ok
