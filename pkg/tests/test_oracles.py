import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from petallab import oracles
from petallab.domains import HorizontalStrip, UnitDisk, UpperHalfPlane, translate


def test_disk_values():
    m = oracles.disk_metrics(0j, 0.5 + 0j)
    assert m.green == pytest.approx(math.log(2.0), abs=1e-15)
    assert m.distance == pytest.approx(math.atanh(0.5), abs=1e-15)
    assert m.density == 1.0


def test_halfplane_and_strip_values():
    assert oracles.halfplane_metrics(1j, 2j).distance == pytest.approx(0.5 * math.log(2.0), abs=1e-14)
    assert oracles.halfplane_metrics(1j, 2j).density == 0.5
    s = oracles.strip_metrics(0.5j * math.pi, 0.5j * math.pi + 1.0, 0.0, math.pi)
    assert s.density == pytest.approx(0.5)
    # the exponential map sends the midline of strip(0, pi) onto the imaginary axis of H
    h = oracles.halfplane_metrics(1j, 1j * math.e)
    assert s.distance == pytest.approx(h.distance, rel=1e-13)


def test_green_distance_inverse():
    d = np.array([1e-6, 0.1, 1.0, 5.0, 15.0])
    e = np.exp(-2.0 * d)
    # -log tanh d, written to keep precision for large d
    g = np.log1p(e) - np.log1p(-e)
    assert np.allclose(oracles.distance_from_green(g), d, rtol=1e-9)
    assert oracles.distance_from_green(math.inf) == 0.0
    assert oracles.distance_from_green(0.0) == math.inf
    assert oracles.disk_metrics(0.3j, 0.3j).coincident


disk_pts = st.builds(lambda r, a: r * complex(math.cos(a), math.sin(a)), st.floats(0, 0.95), st.floats(0, 2 * math.pi))


@settings(max_examples=80, deadline=None)
@given(a=disk_pts, b=disk_pts, c=disk_pts)
def test_disk_triangle_inequality_and_symmetry(a, b, c):
    d = lambda z, w: oracles.disk_metrics(z, w).distance
    assert d(a, b) == pytest.approx(d(b, a), abs=1e-12)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-9


@settings(max_examples=60, deadline=None)
@given(z=disk_pts, w=disk_pts, a=disk_pts, theta=st.floats(0, 2 * math.pi))
def test_disk_mobius_invariance(z, w, a, theta):
    def phi(u):
        return complex(math.cos(theta), math.sin(theta)) * (u - a) / (1 - a.conjugate() * u)

    d0 = oracles.disk_metrics(z, w).distance
    d1 = oracles.disk_metrics(phi(z), phi(w)).distance
    assert d1 == pytest.approx(d0, rel=1e-6, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-3, 3), y=st.floats(0.1, 1.4), u=st.floats(-3, 3), v=st.floats(0.1, 1.4))
def test_domain_monotonicity(x, y, u, v):
    # strip(0, 1.5) is inside strip(0, 3) which is inside H
    z, w = complex(x, y), complex(u, v)
    if z == w:
        return
    g_small = oracles.strip_metrics(z, w, 0.0, 1.5).green
    g_big = oracles.strip_metrics(z, w, 0.0, 3.0).green
    g_h = oracles.halfplane_metrics(z, w).green
    assert g_small <= g_big + 1e-12 <= g_h + 2e-12


def test_green_dispatch_handles_translation():
    strip = HorizontalStrip(0.0, math.pi)
    z, w = 2 + 1j, -1 + 2j
    assert oracles.green(translate(strip, -7.0), z, w) == pytest.approx(oracles.strip_metrics(z, w, 0, math.pi).green)
    shifted = translate(UpperHalfPlane(y0=1.0), 0.5)
    # translation is horizontal, so the boundary line stays at Im w = 1
    assert oracles.density(shifted, 2j) == pytest.approx(0.5)
    assert oracles.has_oracle(UnitDisk()) and oracles.has_oracle(shifted)


def test_strip_green_far_apart_does_not_overflow():
    g = oracles.strip_metrics(0.5j, 400 + 0.5j, 0.0, 1.0).green
    assert 0 < g < 1e-100 or g == 0.0


def test_harmonic_measures():
    assert oracles.strip_harmonic_measure(0.25j * math.pi, 0.0, math.pi) == pytest.approx(0.25)
    assert oracles.strip_harmonic_measure(0.25j * math.pi, 0.0, math.pi, "lower") == pytest.approx(0.75)
    omega, cap = oracles.disk_concentric(0.8, 0.5)
    assert omega == pytest.approx(math.log(0.8) / math.log(0.5))
    assert cap == pytest.approx(2 * math.pi / math.log(2.0))
    assert oracles.halfplane_segment_measure(1j, -1.0, 1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        oracles.disk_concentric(0.4, 0.5)
