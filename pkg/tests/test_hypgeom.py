import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from petallab import oracles
from petallab.compacts import CompactSet, Disk, Polyline
from petallab.domains import ExpCusp, HorizontalStrip, SlitStrip, UnitDisk
from petallab.hypgeom import (
    distance_lower_bound,
    green_upper_bound,
    green_upper_bound_array,
    hyp_area,
    hyp_density,
    quasi_density,
    quasi_segment_length,
)
from petallab.wos import WosConfig

STRIP = HorizontalStrip(0.0, math.pi)
strip_pts = st.builds(complex, st.floats(-5, 5), st.floats(0.05, math.pi - 0.05))


def test_disk_area_closed_form():
    # integral of (1 - |z|^2)^-2 over |z| < r is pi r^2 / (1 - r^2)
    res = hyp_area(CompactSet((Disk(0j, 0.5),)), UnitDisk(), 0.0, m=256)
    assert res.value == pytest.approx(math.pi / 3, rel=1e-7)
    assert res.refinement_error < 1e-6
    assert res.source == "oracle"


def test_area_of_segment_is_zero():
    res = hyp_area(CompactSet((Polyline((-0.5 + 0j, 0.5 + 0j)),)), ExpCusp(), -4.0)
    assert res.value == 0.0 and res.n_nodes == 0


def test_monte_carlo_area_matches_strip_oracle():
    K = CompactSet((Disk(0.5j * math.pi, 0.3),))
    exact = hyp_area(K, STRIP, 0.0, m=64)
    mc = hyp_area(K, STRIP, 0.0, WosConfig(n_walks=2000, seed=4), m=64, kernel="monte-carlo")
    assert mc.source == "monte-carlo"
    assert abs(mc.value - exact.value) <= 3 * mc.std_err


@settings(max_examples=60, deadline=None)
@given(w=strip_pts)
def test_koebe_quasi_sandwich(w):
    lam = float(hyp_density(w, STRIP, 0.0).values[0])
    q = quasi_density(w, STRIP, 0.0)
    assert q / 4 <= lam <= q


@settings(max_examples=60, deadline=None)
@given(z=strip_pts, w=strip_pts)
def test_bounds_are_on_the_safe_side(z, w):
    if abs(z - w) < 1e-6:
        return
    exact = oracles.strip_metrics(z, w, 0.0, math.pi)
    assert distance_lower_bound(z, w, STRIP, 0.0) <= exact.distance + 1e-12
    assert green_upper_bound(z, w, STRIP, 0.0) >= exact.green - 1e-12
    # hyperbolic distance is at most the quasi-hyperbolic length of any path
    assert exact.distance <= quasi_segment_length(z, w, STRIP, 0.0) * (1 + 1e-9)


def test_expcusp_bound_values():
    assert distance_lower_bound(0j, 1 + 0j, ExpCusp(), -4.0) == pytest.approx(1.0045786, abs=1e-7)
    assert green_upper_bound(0j, 1 + 0j, ExpCusp(), -4.0) == pytest.approx(0.2698286, abs=1e-7)
    assert quasi_density(0j, ExpCusp(), -4.0) == pytest.approx(54.607, abs=1e-3)


def test_green_bound_array_matches_scalar():
    z = np.array([0j, 1 + 0j, -0.5 + 0j])
    G = green_upper_bound_array(z[:, None], z[None, :], ExpCusp(), -3.0)
    assert np.all(np.isinf(np.diag(G)))
    assert G[0, 1] == pytest.approx(green_upper_bound(0j, 1 + 0j, ExpCusp(), -3.0), rel=1e-13)
    assert np.allclose(G, G.T)


def test_quasi_segment_rejects_exits():
    slit = SlitStrip(2 * math.pi, ((math.pi, 0.0),))
    with pytest.raises(ValueError):
        quasi_segment_length(-1 + 1j, -1 + 5j, slit, 0.0)
    with pytest.raises(ValueError):
        quasi_segment_length(1 + 1j, -3 + 5j, slit, 0.0)
    # passing just right of the slit tip is fine
    assert quasi_segment_length(0.05 + 1j, 0.05 + 5j, slit, 0.0) > 0
    with pytest.raises(ValueError):
        distance_lower_bound(1j, 1j, STRIP, 0.0)


def test_density_requires_config_without_closed_form():
    slit = SlitStrip(2 * math.pi, ((math.pi, 0.0),))
    with pytest.raises(ValueError):
        hyp_density(1 + 1j, slit, 0.0)
    with pytest.raises(ValueError):
        hyp_density(1 + 1j, slit, 0.0, kernel="oracle")
