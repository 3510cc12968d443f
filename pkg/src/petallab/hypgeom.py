"""Hyperbolic area, quasi-hyperbolic density and the deterministic distance bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .domains import shifted_distance, translate
from .wos import WosConfig, robin_densities

__all__ = [
    "AreaResult",
    "DensityValues",
    "hyp_density",
    "hyp_area",
    "quasi_density",
    "quasi_segment_length",
    "distance_lower_bound",
    "green_upper_bound",
    "green_upper_bound_array",
]


@dataclass(frozen=True)
class AreaResult:
    value: float
    n_nodes: int
    refinement_error: float
    std_err: float = 0.0
    source: str = "oracle"
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "n_nodes": self.n_nodes,
            "refinement_error": self.refinement_error,
            "std_err": self.std_err,
            "source": self.source,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class DensityValues:
    values: np.ndarray
    std_errs: np.ndarray
    source: str
    n_truncated: int = 0


def hyp_density(
    points, domain, t: float, cfg: WosConfig | None = None, salt: int = 1, kernel: str = "auto"
) -> DensityValues:
    """Hyperbolic density at ``points`` of ``domain - t``.

    ``kernel="auto"`` uses the closed form when the domain has one;
    ``"monte-carlo"`` forces walk-on-spheres.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    shifted = translate(domain, t)
    if not np.all(shifted.contains(pts)):
        raise ValueError("density points must lie inside the shifted domain")
    if kernel not in ("auto", "oracle", "monte-carlo"):
        raise ValueError(f"unknown kernel mode {kernel!r}")
    if kernel == "oracle" and not oracles.has_oracle(domain):
        raise ValueError(f"no closed-form density for {domain!r}")
    if kernel != "monte-carlo" and oracles.has_oracle(domain):
        return DensityValues(oracles.density(shifted, pts), np.zeros(pts.shape), "oracle")
    if cfg is None:
        raise ValueError("a WosConfig is required for domains without a closed form")
    lam, se, n_trunc = robin_densities(pts, domain, t, cfg, salt=salt)
    return DensityValues(lam, se, "monte-carlo", int(n_trunc.sum()))


def _area_once(K, domain, t, cfg, m, salt, kernel):
    disc = K.discretize(m)
    if disc.area_nodes.size == 0:
        return 0.0, 0.0, 0, "oracle", 0
    dens = hyp_density(disc.area_nodes, domain, t, cfg, salt=salt, kernel=kernel)
    w = disc.area_weights
    value = math.fsum(w * dens.values**2)
    se = math.sqrt(math.fsum((2.0 * w * dens.values * dens.std_errs) ** 2))
    return value, se, disc.area_nodes.size, dens.source, dens.n_truncated


def hyp_area(
    K, domain, t: float, cfg: WosConfig | None = None, m: int = 128, kernel: str = "auto"
) -> AreaResult:
    """Integral of the squared hyperbolic density over ``K`` in ``domain - t``.

    ``refinement_error`` compares against the same rule with ``m // 2`` nodes.
    """
    if m < 16:
        raise ValueError(f"hyp_area needs m >= 16, got {m}")
    K.check_inside(translate(domain, t))
    value, se, n, source, n_trunc = _area_once(K, domain, t, cfg, m, 101, kernel)
    coarse, se_c, _, _, n_trunc_c = _area_once(K, domain, t, cfg, m // 2, 102, kernel)
    flags = ()
    if cfg is not None and n and (n_trunc + n_trunc_c) > 1e-3 * cfg.n_walks * n:
        flags = ("truncation",)
    return AreaResult(value, n, abs(value - coarse), se, source, flags)


def quasi_density(w: complex, domain, t: float) -> float:
    """``1 / dist(w, boundary of domain - t)``."""
    return 1.0 / shifted_distance(domain, w, t)


def _segment_inside(shifted, z: complex, w: complex, max_depth: int = 40) -> bool:
    """Certify ``[z, w]`` inside ``shifted`` by covering it with boundary-free disks.

    A piece ``[a, b]`` is covered once ``|b - a|`` is clearly below the sum of
    the boundary distances at its ends; otherwise it is bisected.  Tangent
    disks do not count, since they miss the crossing point of a slit.
    """
    if not (shifted.contains(z) and shifted.contains(w)):
        return False
    s = np.array([0.0, 1.0])
    for _ in range(max_depth):
        p = z + s * (w - z)
        if not np.all(shifted.contains(p)):
            return False
        d = shifted.nearest(p)[1]
        gap = np.abs(np.diff(p))
        open_ = gap >= 0.99 * (d[:-1] + d[1:])
        if not np.any(open_):
            return True
        mids = 0.5 * (s[:-1] + s[1:])[open_]
        s = np.sort(np.concatenate([s, mids]))
    return False


def quasi_segment_length(z: complex, w: complex, domain, t: float, n: int = 64) -> float:
    """Quasi-hyperbolic length of the straight segment ``[z, w]`` (Gauss-Legendre).

    The segment must stay inside the shifted domain; this is an upper bound
    for the quasi-hyperbolic distance.
    """
    z, w = complex(z), complex(w)
    x, wx = np.polynomial.legendre.leggauss(n)
    pts = z + 0.5 * (x + 1.0) * (w - z)
    shifted = translate(domain, t)
    if not _segment_inside(shifted, z, w):
        raise ValueError("segment leaves the shifted domain")
    dist = shifted.nearest(pts)[1]
    return float(0.5 * abs(w - z) * np.sum(wx / dist))


def distance_lower_bound(z: complex, w: complex, domain, t: float) -> float:
    """``(1/4) log(1 + |z - w| / min(delta(z + t), delta(w + t)))``."""
    z, w = complex(z), complex(w)
    if z == w:
        raise ValueError("distance_lower_bound needs z != w")
    delta = min(shifted_distance(domain, z, t), shifted_distance(domain, w, t))
    return 0.25 * math.log1p(abs(z - w) / delta)


def green_upper_bound(z: complex, w: complex, domain, t: float) -> float:
    """``-log tanh`` of :func:`distance_lower_bound`."""
    e = math.exp(-2.0 * distance_lower_bound(z, w, domain, t))
    return math.log1p(e) - math.log1p(-e)


def green_upper_bound_array(z, w, domain, t: float):
    """Broadcasting :func:`green_upper_bound`; coincident pairs give ``inf``."""
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    shifted = translate(domain, t)
    dz = shifted.nearest(z.ravel())[1].reshape(z.shape)
    dw = shifted.nearest(w.ravel())[1].reshape(w.shape)
    with np.errstate(divide="ignore"):
        d = 0.25 * np.log1p(np.abs(z - w) / np.minimum(dz, dw))
        e = np.exp(-2.0 * d)
        return np.log1p(e) - np.log1p(-e)
