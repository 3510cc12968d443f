"""Koenigs-domain catalog, petals, and the translation flow.

Every domain here is simply connected and convex in the positive direction,
so ``w in D`` implies ``w + s in D`` for all ``s >= 0``.  Semigroup orbits are
translations: the backward orbit of a set at time ``t <= 0`` is handled by
querying the translated domain ``D - t`` (``w`` lies in ``D - t`` iff
``w + t`` lies in ``D``).

All distance/nearest-point routines are vectorized over complex arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "UnitDisk",
    "UpperHalfPlane",
    "HorizontalStrip",
    "SlitStrip",
    "SlitHalfPlane",
    "ExpCusp",
    "Translated",
    "Petal",
    "KoenigsDomain",
    "contains",
    "distance_to_boundary",
    "shifted_distance",
    "translate",
    "petals",
    "SHAPES",
    "domain_from_config",
]

# exp() beyond this argument is treated as +inf for boundary purposes
_EXP_CAP = 300.0


def _as_complex(w) -> tuple[np.ndarray, bool]:
    arr = np.asarray(w, dtype=complex)
    return arr, arr.ndim == 0


class _Shape:
    """Shared public surface; subclasses implement ``_inside`` and ``_nearest``."""

    def contains(self, w):
        arr, scalar = _as_complex(w)
        ok = np.isfinite(arr.real) & np.isfinite(arr.imag)
        with np.errstate(invalid="ignore", over="ignore"):
            res = ok & self._inside(np.where(ok, arr, 0.0))
        return bool(res) if scalar else res

    def nearest(self, w):
        """Closest boundary point and its Euclidean distance."""
        arr, scalar = _as_complex(w)
        pts, dist = self._nearest(np.atleast_1d(arr))
        if scalar:
            return complex(pts[0]), float(dist[0])
        return pts.reshape(arr.shape), dist.reshape(arr.shape)

    def distance(self, w):
        """Distance to the boundary; raises for scalar points outside the domain."""
        arr, scalar = _as_complex(w)
        if scalar and not self.contains(complex(arr)):
            raise ValueError(f"point {complex(arr)!r} is not inside {self!r}")
        _, dist = self._nearest(np.atleast_1d(arr))
        return float(dist[0]) if scalar else dist.reshape(arr.shape)

    def _distance_raw(self, w: np.ndarray) -> np.ndarray:
        return self._nearest(w)[1]

    def petals(self) -> list["Petal"]:
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UnitDisk(_Shape):
    name = "unit-disk"

    def _inside(self, w):
        return np.abs(w) < 1.0

    def _nearest(self, w):
        r = np.abs(w)
        safe = np.where(r > 0, r, 1.0)
        pts = np.where(r > 0, w / safe, 1.0 + 0j)
        return pts, np.abs(1.0 - r)

    def petals(self):
        return []

    def to_config(self):
        return {"shape": self.name}


@dataclass(frozen=True)
class UpperHalfPlane(_Shape):
    """The half-plane ``Im w > y0`` (``y0 = 0`` is the standard upper half-plane)."""

    y0: float = 0.0
    name = "upper-half-plane"

    def _inside(self, w):
        return w.imag > self.y0

    def _nearest(self, w):
        return w.real + 1j * self.y0, np.abs(w.imag - self.y0)

    def petals(self):
        return [Petal("parabolic-half-plane", self.y0, math.inf, self)]

    def to_config(self):
        cfg = {"shape": self.name}
        if self.y0 != 0.0:
            cfg["y0"] = self.y0
        return cfg


@dataclass(frozen=True)
class HorizontalStrip(_Shape):
    y0: float
    y1: float
    name = "strip"

    def __post_init__(self):
        if not (math.isfinite(self.y0) and math.isfinite(self.y1) and self.y0 < self.y1):
            raise ValueError(f"strip needs finite y0 < y1, got ({self.y0}, {self.y1})")

    def _inside(self, w):
        return (w.imag > self.y0) & (w.imag < self.y1)

    def _nearest(self, w):
        d0 = np.abs(w.imag - self.y0)
        d1 = np.abs(self.y1 - w.imag)
        lower = d0 <= d1
        pts = np.where(lower, w.real + 1j * self.y0, w.real + 1j * self.y1)
        return pts, np.minimum(d0, d1)

    def petals(self):
        return [Petal("hyperbolic-strip", self.y0, self.y1, self)]

    def to_config(self):
        return {"shape": self.name, "y0": self.y0, "y1": self.y1}


def _check_slits(slits, top: float) -> tuple[tuple[float, float], ...]:
    out = []
    for s in slits:
        y, x = float(s[0]), float(s[1])
        if not (math.isfinite(y) and math.isfinite(x)):
            raise ValueError(f"slit {s!r} is not finite")
        if not (0.0 < y < top):
            raise ValueError(f"slit ordinate {y} must lie strictly inside (0, {top})")
        out.append((y, x))
    ys = [y for y, _ in out]
    if len(set(ys)) != len(ys):
        raise ValueError("slit ordinates must be distinct")
    return tuple(sorted(out))


def _slit_nearest(w, pts, dist, slits):
    for y, x in slits:
        left = w.real <= x
        cand = np.where(left, w.real + 1j * y, x + 1j * y)
        d = np.abs(w - cand)
        better = d < dist
        pts = np.where(better, cand, pts)
        dist = np.where(better, d, dist)
    return pts, dist


def _on_slit(w, slits):
    hit = np.zeros(w.shape, dtype=bool)
    for y, x in slits:
        hit |= (w.imag == y) & (w.real <= x)
    return hit


@dataclass(frozen=True)
class SlitStrip(_Shape):
    """Strip ``0 < Im w < height`` minus half-lines ``{Im w = y_j, Re w <= x_j}``.

    ``slits`` are ``(y_j, x_j)`` pairs.
    """

    height: float
    slits: tuple = field(default=())
    name = "slit-strip"

    def __post_init__(self):
        if not (math.isfinite(self.height) and self.height > 0):
            raise ValueError(f"height must be positive, got {self.height}")
        object.__setattr__(self, "slits", _check_slits(self.slits, self.height))

    def _inside(self, w):
        return (w.imag > 0) & (w.imag < self.height) & ~_on_slit(w, self.slits)

    def _nearest(self, w):
        pts, dist = HorizontalStrip(0.0, self.height)._nearest(w)
        return _slit_nearest(w, pts, dist, self.slits)

    def petals(self):
        ys = [0.0] + [y for y, _ in self.slits] + [self.height]
        return [Petal("hyperbolic-strip", a, b, self) for a, b in zip(ys[:-1], ys[1:])]

    def to_config(self):
        return {"shape": self.name, "height": self.height, "slits": [list(s) for s in self.slits]}


@dataclass(frozen=True)
class SlitHalfPlane(_Shape):
    """Upper half-plane minus half-lines ``{Im w = y_j, Re w <= x_j}``."""

    slits: tuple = field(default=())
    name = "slit-half-plane"

    def __post_init__(self):
        object.__setattr__(self, "slits", _check_slits(self.slits, math.inf))

    def _inside(self, w):
        return (w.imag > 0) & ~_on_slit(w, self.slits)

    def _nearest(self, w):
        pts, dist = UpperHalfPlane()._nearest(w)
        return _slit_nearest(w, pts, dist, self.slits)

    def petals(self):
        ys = [0.0] + [y for y, _ in self.slits]
        out = [Petal("hyperbolic-strip", a, b, self) for a, b in zip(ys[:-1], ys[1:])]
        out.append(Petal("parabolic-half-plane", ys[-1], math.inf, self))
        return out

    def to_config(self):
        return {"shape": self.name, "slits": [list(s) for s in self.slits]}


@dataclass(frozen=True)
class ExpCusp(_Shape):
    """The domain ``{Im w > -exp(Re w)}``; its boundary is ``s -> s - i e^s``."""

    name = "exp-cusp"
    grid: int = field(default=24, repr=False, compare=False)
    iterations: int = field(default=60, repr=False, compare=False)

    def _inside(self, w):
        x = np.minimum(w.real, _EXP_CAP)
        return w.imag > -np.exp(x)

    @staticmethod
    def _sqdist(s, x, y):
        return (s - x) ** 2 + (y + np.exp(np.minimum(s, _EXP_CAP))) ** 2

    def _nearest(self, w):
        x, y = w.real, w.imag
        # the foot point has s <= x and lies within an upper bound of the distance
        d_up = np.minimum(np.abs(y + np.exp(np.minimum(x, _EXP_CAP))), np.hypot(x, y + 1.0))
        lo, hi = x - d_up, x
        k = self.grid
        frac = np.linspace(0.0, 1.0, k)
        grid = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
        f = self._sqdist(grid, x[:, None], y[:, None])
        j = np.argmin(f, axis=1)
        step = (hi - lo) / (k - 1)
        a = np.maximum(lo, grid[np.arange(len(j)), j] - step)
        b = np.minimum(hi, grid[np.arange(len(j)), j] + step)
        # safeguarded Newton on the derivative inside the bracketing cells
        s = grid[np.arange(len(j)), j]
        for _ in range(self.iterations):
            e = np.exp(np.minimum(s, _EXP_CAP))
            g1 = (s - x) + (y + e) * e
            g2 = 1.0 + y * e + 2.0 * e * e
            b = np.where(g1 > 0, s, b)
            a = np.where(g1 <= 0, s, a)
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = s - g1 / g2
            ok = (g2 > 0) & (newton > a) & (newton < b)
            s_new = np.where(ok, newton, 0.5 * (a + b))
            if np.all(np.abs(s_new - s) <= 1e-13 * (1.0 + np.abs(s))):
                s = s_new
                break
            s = s_new
        s_grid = grid[np.arange(len(j)), j]
        s = np.where(self._sqdist(s, x, y) <= self._sqdist(s_grid, x, y), s, s_grid)
        pts = s - 1j * np.exp(np.minimum(s, _EXP_CAP))
        return pts, np.sqrt(self._sqdist(s, x, y))

    def petals(self):
        return [
            Petal("parabolic-half-plane", 0.0, math.inf, self),
            Petal("degenerate-line", 0.0, 0.0, self),
        ]

    def to_config(self):
        return {"shape": self.name}


KoenigsDomain = Union[UnitDisk, UpperHalfPlane, HorizontalStrip, SlitStrip, SlitHalfPlane, ExpCusp]

SHAPES = {
    "unit-disk": UnitDisk,
    "upper-half-plane": UpperHalfPlane,
    "strip": HorizontalStrip,
    "slit-strip": SlitStrip,
    "slit-half-plane": SlitHalfPlane,
    "exp-cusp": ExpCusp,
}


@dataclass(frozen=True)
class Translated(_Shape):
    """The domain ``base - t``: ``w`` is inside iff ``w + t`` is inside ``base``."""

    base: _Shape
    t: float = 0.0

    @property
    def name(self):
        return self.base.name

    def _inside(self, w):
        return self.base._inside(w + self.t)

    def _nearest(self, w):
        pts, dist = self.base._nearest(w + self.t)
        return pts - self.t, dist

    def petals(self):
        return self.base.petals()

    def to_config(self):
        return self.base.to_config()


def translate(domain, t: float) -> _Shape:
    """``domain - t``; collapses nested translations and ``t == 0``."""
    if not math.isfinite(t):
        raise ValueError(f"flow time must be finite, got {t}")
    if isinstance(domain, Translated):
        t = domain.t + t
        domain = domain.base
    return domain if t == 0 else Translated(domain, float(t))


@dataclass(frozen=True)
class Petal:
    """A maximal horizontal strip, half-plane, or degenerate line of ``parent``.

    ``y1`` is ``inf`` for half-planes and equals ``y0`` for degenerate lines.
    """

    kind: str
    y0: float
    y1: float
    parent: _Shape = field(repr=False, compare=False)

    def contains(self, w):
        arr, scalar = _as_complex(w)
        if self.kind == "degenerate-line":
            res = arr.imag == self.y0
        else:
            res = (arr.imag > self.y0) & (arr.imag < self.y1)
        res = res & np.isfinite(arr.real)
        return bool(res) if scalar else res

    def region(self):
        """The petal as a domain with closed-form metrics (None for degenerate lines)."""
        if self.kind == "hyperbolic-strip":
            return HorizontalStrip(self.y0, self.y1)
        if self.kind == "parabolic-half-plane":
            return UpperHalfPlane(self.y0)
        return None

    def clearance(self, w) -> float:
        """Vertical room between ``w`` and the petal's edges (0 for lines)."""
        if self.kind == "degenerate-line":
            return 0.0
        return float(min(w.imag - self.y0, self.y1 - w.imag))


_SHAPE_KEYS = {
    "unit-disk": (),
    "upper-half-plane": ("y0",),
    "strip": ("y0", "y1"),
    "slit-strip": ("height", "slits"),
    "slit-half-plane": ("slits",),
    "exp-cusp": (),
}


def domain_from_config(cfg: dict) -> _Shape:
    """Build a domain from ``{"shape": name, ...}``; unknown keys are rejected."""
    cfg = dict(cfg)
    name = cfg.pop("shape", None)
    if name not in SHAPES:
        raise ValueError(f"unknown domain shape {name!r}; expected one of {sorted(SHAPES)}")
    extra = set(cfg) - set(_SHAPE_KEYS[name])
    if extra:
        raise ValueError(f"unknown keys for {name}: {sorted(extra)}")
    if "slits" in cfg:
        slits = cfg["slits"]
        if any(len(sl) != 2 for sl in slits):
            raise ValueError("slits are [y, x] pairs")
        cfg["slits"] = tuple((float(y), float(x)) for y, x in slits)
    for key in ("y0", "y1", "height"):
        if key in cfg:
            cfg[key] = float(cfg[key])
    try:
        return SHAPES[name](**cfg)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name}: {exc}") from None


def contains(domain, w) -> bool:
    return domain.contains(w)


def distance_to_boundary(domain, w):
    return domain.distance(w)


def shifted_distance(domain, w, t: float):
    """``delta_{D - t}(w)``, which equals ``delta_D(w + t)``."""
    arr, scalar = _as_complex(w)
    return distance_to_boundary(domain, complex(arr) + t if scalar else arr + t)


def petals(domain) -> list[Petal]:
    return domain.petals()
