import math

import numpy as np
import pytest

from petallab import oracles
from petallab.compacts import CompactSet, Disk
from petallab.domains import HorizontalStrip, SlitStrip, UnitDisk, UpperHalfPlane
from petallab.hypgeom import quasi_density
from petallab.wos import (
    WosConfig,
    derive_seed,
    green_mc,
    harmonic_measure_mc,
    hyp_distance_mc,
    robin_density_mc,
    run_walks,
    walk_keys,
    wos_exit,
)

CFG = WosConfig(n_walks=20_000, seed=11)
SLIT = SlitStrip(2 * math.pi, ((math.pi, 0.0),))
INNER_DISK = CompactSet((Disk(0j, 0.5),))


def _within(est, exact, k=3.0):
    return abs(est.value - exact) <= k * est.std_err + 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        WosConfig(epsilon_shell=0.0)
    with pytest.raises(ValueError):
        WosConfig(n_walks=1)
    with pytest.raises(ValueError):
        WosConfig(max_steps=0)
    assert CFG.with_walks(500).n_walks == 500 and CFG.with_walks(None) is CFG


def test_rng_is_counter_based():
    keys = walk_keys(7, np.arange(10))
    assert np.array_equal(keys, walk_keys(7, np.arange(10)))
    assert np.array_equal(keys[3:5], walk_keys(7, np.array([3, 4])))
    assert not np.array_equal(keys, walk_keys(8, np.arange(10)))
    assert derive_seed(1, 2) == derive_seed(1, 2) != derive_seed(1, 3)


def test_determinism_and_seed_sensitivity():
    a = harmonic_measure_mc(0.8, INNER_DISK, UnitDisk(), 0.0, CFG)
    b = harmonic_measure_mc(0.8, INNER_DISK, UnitDisk(), 0.0, CFG)
    c = harmonic_measure_mc(0.8, INNER_DISK, UnitDisk(), 0.0, WosConfig(n_walks=20_000, seed=12))
    assert a == b
    assert a.value != c.value


def test_single_walk_matches_batch():
    starts = np.full(5, 0.1 + 0.2j)
    batch = run_walks(starts, walk_keys(3, np.arange(5)), UnitDisk(), None, WosConfig(seed=3))
    for i in range(5):
        point, kind = wos_exit(0.1 + 0.2j, UnitDisk(), None, WosConfig(seed=3), i)
        assert point == batch.exits[i]
        assert kind == "outer"
        assert abs(abs(point) - 1.0) < 1e-12


@pytest.mark.parametrize("r", [0.6, 0.8, 0.95])
def test_concentric_disk_oracle(r):
    est = harmonic_measure_mc(r, INNER_DISK, UnitDisk(), 0.0, CFG)
    assert _within(est, math.log(r) / math.log(0.5))


def test_reflection_symmetry():
    # a K symmetric about the imaginary axis sees z and -conj(z) alike
    K = CompactSet((Disk(2j, 0.5),))
    a = harmonic_measure_mc(1.0 + 1.0j, K, UpperHalfPlane(), 0.0, CFG)
    b = harmonic_measure_mc(-1.0 + 1.0j, K, UpperHalfPlane(), 0.0, WosConfig(n_walks=20_000, seed=99))
    assert abs(a.value - b.value) <= 3 * math.hypot(a.std_err, b.std_err)


def test_green_and_density_oracles():
    g = green_mc(0.5, 0.0, UnitDisk(), 0.0, CFG)
    assert _within(g, math.log(2.0))
    lam = robin_density_mc(0.5j * math.pi, HorizontalStrip(0.0, math.pi), 0.0, CFG)
    assert _within(lam, 0.5)
    d = hyp_distance_mc(0.0, 0.5, UnitDisk(), 0.0, CFG)
    assert _within(d, math.atanh(0.5))


def test_green_symmetry_in_slit_strip():
    z, w = 2 + 1j, 1 + 2j
    a = green_mc(z, w, SLIT, -3.0, CFG)
    b = green_mc(w, z, SLIT, -3.0, CFG)
    assert abs(a.value - b.value) <= 3 * math.hypot(a.std_err, b.std_err)


def test_koebe_sandwich_for_density():
    for w, t in [(1 + 1j, 0.0), (3 + 1.5j, -5.0), (2 + 4.5j, 0.0)]:
        lam = robin_density_mc(w, SLIT, t, CFG)
        q = quasi_density(w, SLIT, t)
        assert q / 4 - 3 * lam.std_err <= lam.value <= q + 3 * lam.std_err


def test_translation_matches_shifted_start():
    # walks in D - t from w are walks in D from w + t
    a = green_mc(2 + 1j, 3 + 1.5j, SLIT, -4.0, CFG)
    b = green_mc(-2 + 1j, -1 + 1.5j, SLIT, 0.0, CFG)
    assert a.value == pytest.approx(b.value, abs=1e-9)


def test_truncation_is_flagged():
    est = harmonic_measure_mc(0.8, INNER_DISK, UnitDisk(), 0.0, WosConfig(n_walks=2000, max_steps=1, seed=1))
    assert "truncation" in est.flags and est.n_truncated > 0


def test_invalid_starts():
    with pytest.raises(ValueError):
        harmonic_measure_mc(0.3, INNER_DISK, UnitDisk(), 0.0, CFG)
    with pytest.raises(ValueError):
        green_mc(0.5, 0.5, UnitDisk(), 0.0, CFG)
    with pytest.raises(ValueError):
        robin_density_mc(-1 + 1j * math.pi, SLIT, 0.0, CFG)


def test_oracle_distance_consistency():
    # the MC distance in the half-plane lands on the closed form
    d = hyp_distance_mc(1j, 1 + 2j, UpperHalfPlane(), 0.0, CFG)
    assert _within(d, oracles.halfplane_metrics(1j, 1 + 2j).distance)
