"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records a ``criterion`` property; conftest prints one PASS/FAIL
line per criterion in the terminal summary.  Run with ``-s`` to also see
the measured numbers as each test finishes.
"""

import filecmp
import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from petallab.cli import load_config, run
from petallab.compacts import CompactSet, Disk
from petallab.domains import HorizontalStrip, UnitDisk, UpperHalfPlane
from petallab.energy import condenser_capacity, equilibrium
from petallab.experiments import check, strong_markov_green, strong_markov_harmonic, t_sweep
from petallab.fekete import EuclideanMetric, HyperbolicMetric, caph_estimate, n_diameter, tuple_log_product
from petallab.wos import WosConfig, green_mc, harmonic_measure_mc, robin_density_mc

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _report(record_property, label: str, ok: bool, detail: str) -> None:
    record_property("criterion", label)
    print(f"\ncriterion {label}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture(scope="module")
def slitstrip():
    return load_config(FIXTURES / "slitstrip.toml").sweep


def test_criterion_01_wos_oracles(record_property):
    cfg = WosConfig(epsilon_shell=1e-3, n_walks=100_000, seed=0)
    cases = [
        ("omega(0.8)", lambda: harmonic_measure_mc(0.8, CompactSet((Disk(0j, 0.5),)), UnitDisk(), 0.0, cfg),
         math.log(0.8) / math.log(0.5)),
        ("g(0.5,0)", lambda: green_mc(0.5, 0.0, UnitDisk(), 0.0, cfg), math.log(2.0)),
        ("lambda(i;H)", lambda: robin_density_mc(1j, UpperHalfPlane(), 0.0, cfg), 0.5),
        ("lambda(i pi/2;strip)", lambda: robin_density_mc(0.5j * math.pi, HorizontalStrip(0.0, math.pi), 0.0, cfg),
         0.5),
    ]
    ok, parts = True, []
    for name, fn, exact in cases:
        t0 = time.perf_counter()
        est = fn()
        dt = time.perf_counter() - t0
        err = abs(est.value - exact)
        good = err <= 3 * est.std_err and err <= 0.01 and dt < 30
        ok &= good
        parts.append(f"{name}={est.value:.5f}+-{est.std_err:.5f} vs {exact:.5f} in {dt:.1f}s")
    _report(record_property, "1: walk-on-spheres oracle agreement", ok, "; ".join(parts))
    assert ok


def test_criterion_02_capacity_oracle(record_property):
    t0 = time.perf_counter()
    res = condenser_capacity(CompactSet((Disk(0j, 0.5),)), UnitDisk(), 0.0, m=64, kernel="oracle")
    dt = time.perf_counter() - t0
    exact = 2 * math.pi / math.log(2.0)
    rel = abs(res.capacity - exact) / exact
    spread = float(np.max(np.abs(res.weights - 1.0 / 64)))
    ok = rel <= 0.02 and spread <= 1e-3 and dt < 5
    _report(record_property, "2: capacity oracle", ok,
            f"Cap={res.capacity:.5f} vs {exact:.5f} (rel {rel:.4f}), weight spread {spread:.1e}, {dt:.2f}s")
    assert ok


def test_criterion_03_transfinite_diameter(record_property):
    K = CompactSet((Disk(0j, 0.5),))
    value, _ = caph_estimate(K, UnitDisk(), 0.0, n_max=10)
    V = equilibrium(K, UnitDisk(), 0.0, m=64).energy
    rel = abs(value - math.exp(-V)) / math.exp(-V)
    ok = 0.49 <= value <= 0.51 and rel <= 0.02
    _report(record_property, "3: caph identity", ok, f"caph={value:.6f}, exp(-V)={math.exp(-V):.6f}, rel {rel:.4f}")
    assert ok


def _brute(L, n):
    best = -math.inf
    for idx in itertools.combinations(range(L.shape[0]), n):
        best = max(best, sum(L[i, j] for i, j in itertools.combinations(idx, 2)))
    return best


def test_criterion_04_fekete_brute_force(record_property):
    rng = np.random.default_rng(2024)
    worst, cases = 0.0, 0
    grids = [np.array([-1.0, 0.0, 1.0, -0.5, 0.5], dtype=complex)]
    grids += [rng.uniform(-1, 1, N) + 1j * rng.uniform(-1, 1, N) for N in (8, 16, 24, 40, 64)]
    for grid in grids:
        for metric, pts in ((EuclideanMetric(), grid), (HyperbolicMetric(UnitDisk()), 0.6 * grid)):
            cands = np.unique(np.round(pts, 15))
            L, _ = metric.log_matrix(cands)
            for n in (2, 3, 4):
                if n == 4 and cands.size > 40:
                    continue
                res = n_diameter(None, n, metric, candidates=pts, polish=False)
                idx = [int(np.nonzero(cands == z)[0][0]) for z in res.tuple]
                worst = max(worst, abs(tuple_log_product(L, idx) - _brute(L, n)))
                cases += 1
    # the 64-point, n = 4 case runs against a vectorized enumeration
    big = np.unique(np.round(grids[-1], 15))
    L, _ = EuclideanMetric().log_matrix(big)
    combos = np.array(list(itertools.combinations(range(big.size), 4)))
    pair = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    sums = sum(L[combos[:, a], combos[:, b]] for a, b in pair)
    res = n_diameter(None, 4, candidates=big, polish=False)
    idx = [int(np.nonzero(big == z)[0][0]) for z in res.tuple]
    worst = max(worst, abs(tuple_log_product(L, idx) - float(sums.max())))
    cases += 1
    d3 = n_diameter(CompactSet.from_config({"polylines": [[[-1, 0], [1, 0]]]}), 3).diameter
    ok = worst <= 1e-12 and abs(d3 - 2 ** (1 / 3)) <= 1e-12
    _report(record_property, "4: Fekete brute-force equivalence", ok,
            f"{cases} cases, worst log-product gap {worst:.1e}, d3([-1,1])={d3:.12f}")
    assert ok


@pytest.mark.slow
def test_criterion_05_t1(record_property, slitstrip):
    t0 = time.perf_counter()
    verdict, _ = check("T1", slitstrip)
    dt = time.perf_counter() - t0
    ok = verdict.status == "pass" and dt < 600
    _report(record_property, "5: T1 monotone harmonic measure", ok, f"{verdict.status}, margin {verdict.margin:.4g}, {dt:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_06_limits(record_property, slitstrip):
    statuses = {}
    for name in ("T2", "T3", "T5", "T6"):
        verdict, _ = check(name, slitstrip)
        statuses[name] = (verdict.status, verdict.margin)
    ok = all(s == "pass" for s, _ in statuses.values())
    _report(record_property, "6: T2/T3/T5/T6 limits at t=-30", ok,
            ", ".join(f"{k} {s} ({m:.3g})" for k, (s, m) in statuses.items()))
    assert ok


@pytest.mark.slow
def test_criterion_07_t4(record_property, slitstrip):
    verdict, _ = check("T4", slitstrip)
    ok = verdict.status == "pass"
    _report(record_property, "7: T4 hyperbolic 4-diameter trend", ok, f"{verdict.status}, margin {verdict.margin:.4g}")
    assert ok


@pytest.mark.slow
def test_criterion_08_t7(record_property):
    cfg = load_config(FIXTURES / "expcusp.toml").sweep
    verdict, _ = check("T7", cfg)
    items = ", ".join(f"{d['item']}:{'ok' if d['ok'] else 'no'}" for d in verdict.details)
    ok = verdict.status == "pass"
    _report(record_property, "8: T7 degenerate petal", ok, f"{verdict.status}; {items}")
    assert ok


def test_criterion_09_strong_markov(record_property):
    t0 = time.perf_counter()
    _, _, rh = strong_markov_harmonic(n_nodes=200)
    _, _, rg = strong_markov_green(n_nodes=200)
    dt = time.perf_counter() - t0
    ok = rh <= 1e-3 and rg <= 1e-3 and dt < 5
    _report(record_property, "9: strong Markov identities", ok, f"SM-H {rh:.1e}, SM-G {rg:.1e}, {dt:.2f}s")
    assert ok


def test_criterion_10_group_invariance(record_property):
    cfg = load_config(FIXTURES / "strip_group.toml").sweep
    mc = cfg.replace(kernel="monte-carlo", walks={"harmonic": 20000, "density": 20000, "green": 20000,
                                                  "area": 1000, "n_diameter": 1000, "capacity": 1000})
    ok, spreads = True, {}
    for label, c in (("oracle", cfg), ("monte-carlo", mc)):
        rep = t_sweep(c)
        for name in rep.quantity_names():
            _, v, se, vals = rep.series(name)
            if all(x.exact for x in vals):
                good = np.ptp(v) <= 1e-12 * max(1.0, float(np.max(np.abs(v))))
            else:
                # every row must sit within 2 sigma of the t = 0 row
                good = bool(np.all(np.abs(v - v[0]) <= 2 * np.hypot(se, se[0]) + 1e-12))
            ok &= good
            spreads[label] = max(spreads.get(label, 0.0), float(np.ptp(v)))
    _report(record_property, "10: group-fixture invariance", ok,
            ", ".join(f"max t-spread {k} {v:.1e}" for k, v in spreads.items()))
    assert ok


@pytest.mark.slow
def test_criterion_11_determinism(record_property, tmp_path):
    config = str(FIXTURES / "slitstrip.toml")
    codes = [run(["check", "--name", "T1", "--config", config, "--out", str(tmp_path / d)]) for d in ("a", "b")]
    names = ["report.csv", "report.json", "report.svg"]
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    codes += [run(["check", "--name", "SM-H", "--out", str(tmp_path / d)]) for d in ("c", "d")]
    match2, _, _ = filecmp.cmpfiles(tmp_path / "c", tmp_path / "d", names, shallow=False)
    ok = codes == [0, 0, 0, 0] and len(match) == 3 and len(match2) == 3
    _report(record_property, "11: bit-identical reports", ok, f"exit codes {codes}, identical {match + match2}")
    assert ok
