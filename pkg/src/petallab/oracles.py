"""Closed-form hyperbolic density, distance, Green function and harmonic measure.

Geometries: the unit disk, half-planes ``Im w > y0`` and horizontal strips.
Green functions use the positive convention ``g = -log tanh d``.  Array
versions (``green``, ``density``) back the Monte Carlo cross-checks and the
kernel assembly in :mod:`petallab.energy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import HorizontalStrip, Translated, UnitDisk, UpperHalfPlane

__all__ = [
    "MetricTriple",
    "disk_metrics",
    "halfplane_metrics",
    "strip_metrics",
    "strip_harmonic_measure",
    "disk_concentric",
    "halfplane_segment_measure",
    "has_oracle",
    "green",
    "density",
    "distance_from_green",
]


@dataclass(frozen=True)
class MetricTriple:
    density: float
    distance: float
    green: float

    @property
    def coincident(self) -> bool:
        return math.isinf(self.green)


def distance_from_green(g):
    """Invert ``g = -log tanh d``; ``g = inf`` maps to 0, ``g <= 0`` to inf."""
    g = np.asarray(g, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        d = 0.5 * np.log((1.0 + np.exp(-g)) / -np.expm1(-g))
    d = np.where(np.isposinf(g), 0.0, d)
    d = np.where(g <= 0, np.inf, d)
    return float(d) if d.ndim == 0 else d


def _log_abs_sinh(a):
    """``log|sinh a|`` for complex ``a`` without overflow."""
    a = np.asarray(a, dtype=complex)
    flip = a.real < 0
    a = np.where(flip, -a, a)
    with np.errstate(divide="ignore"):
        return a.real - math.log(2.0) + np.log(np.abs(-np.expm1(-2.0 * a)))


def _disk_green(z, w):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(1.0 - np.conj(z) * w)) - np.log(np.abs(z - w))


def _halfplane_green(z, w, y0=0.0):
    z = z - 1j * y0
    w = w - 1j * y0
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z - np.conj(w))) - np.log(np.abs(z - w))


def _strip_green(z, w, y0, y1):
    scale = math.pi / (y1 - y0)
    u = scale * (z - 1j * y0)
    v = scale * (w - 1j * y0)
    with np.errstate(divide="ignore"):
        return _log_abs_sinh(0.5 * (u - np.conj(v))) - _log_abs_sinh(0.5 * (u - v))


def _triple(lam: float, g: float) -> MetricTriple:
    g = float(g)
    return MetricTriple(float(lam), float(distance_from_green(g)), g)


def disk_metrics(z: complex, w: complex) -> MetricTriple:
    z, w = complex(z), complex(w)
    if not (abs(z) < 1 and abs(w) < 1):
        raise ValueError("disk_metrics needs |z| < 1 and |w| < 1")
    return _triple(1.0 / (1.0 - abs(z) ** 2), _disk_green(z, w))


def halfplane_metrics(z: complex, w: complex, y0: float = 0.0) -> MetricTriple:
    z, w = complex(z), complex(w)
    if not (z.imag > y0 and w.imag > y0):
        raise ValueError("halfplane_metrics needs both points above the boundary line")
    return _triple(1.0 / (2.0 * (z.imag - y0)), _halfplane_green(z, w, y0))


def strip_metrics(z: complex, w: complex, y0: float, y1: float) -> MetricTriple:
    z, w = complex(z), complex(w)
    if not (y0 < z.imag < y1 and y0 < w.imag < y1):
        raise ValueError(f"points must lie in the open strip ({y0}, {y1})")
    scale = math.pi / (y1 - y0)
    lam = scale / (2.0 * math.sin(scale * (z.imag - y0)))
    return _triple(lam, _strip_green(z, w, y0, y1))


def strip_harmonic_measure(z: complex, y0: float, y1: float, side: str = "upper") -> float:
    """Harmonic measure of one boundary line of the strip ``y0 < Im < y1``."""
    z = complex(z)
    if not y0 < z.imag < y1:
        raise ValueError("point outside the strip")
    upper = (z.imag - y0) / (y1 - y0)
    if side == "upper":
        return upper
    if side == "lower":
        return 1.0 - upper
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def disk_concentric(z_abs: float, r: float) -> tuple[float, float]:
    """Harmonic measure of ``{|w| <= r}`` at radius ``z_abs`` and the condenser capacity."""
    if not 0 < r < z_abs < 1:
        raise ValueError("need 0 < r < |z| < 1")
    return math.log(z_abs) / math.log(r), 2.0 * math.pi / math.log(1.0 / r)


def halfplane_segment_measure(z: complex, a: float, b: float) -> float:
    """Harmonic measure of ``[a, b]`` in the upper half-plane (angle / pi)."""
    z = complex(z)
    if z.imag <= 0 or not a < b:
        raise ValueError("need Im z > 0 and a < b")
    return (math.atan2(z.imag, z.real - b) - math.atan2(z.imag, z.real - a)) / math.pi


def _unwrap(domain):
    t = 0.0
    if isinstance(domain, Translated):
        t, domain = domain.t, domain.base
    return domain, t


def has_oracle(domain) -> bool:
    base, _ = _unwrap(domain)
    return isinstance(base, (UnitDisk, UpperHalfPlane, HorizontalStrip))


def green(domain, z, w):
    """Vectorized Green function of a closed-form domain (translations included)."""
    base, t = _unwrap(domain)
    z = np.asarray(z, dtype=complex) + t
    w = np.asarray(w, dtype=complex) + t
    if isinstance(base, UnitDisk):
        return _disk_green(z, w)
    if isinstance(base, UpperHalfPlane):
        return _halfplane_green(z, w, base.y0)
    if isinstance(base, HorizontalStrip):
        return _strip_green(z, w, base.y0, base.y1)
    raise TypeError(f"no closed-form Green function for {base!r}")


def density(domain, z):
    """Vectorized hyperbolic density (``1/(1-|z|^2)`` normalization)."""
    base, t = _unwrap(domain)
    z = np.asarray(z, dtype=complex) + t
    if isinstance(base, UnitDisk):
        return 1.0 / (1.0 - np.abs(z) ** 2)
    if isinstance(base, UpperHalfPlane):
        return 1.0 / (2.0 * (z.imag - base.y0))
    if isinstance(base, HorizontalStrip):
        scale = math.pi / (base.y1 - base.y0)
        return scale / (2.0 * np.sin(scale * (z.imag - base.y0)))
    raise TypeError(f"no closed-form density for {base!r}")
