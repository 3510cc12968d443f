"""Compact sets built from closed disks and polylines, and their discretizations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = ["Disk", "Polyline", "CompactSet", "Discretization", "distance_to_set", "discretize"]


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"disk radius must be positive, got {self.radius}")
        if not (math.isfinite(self.center.real) and math.isfinite(self.center.imag)):
            raise ValueError("disk center must be finite")

    @property
    def length(self) -> float:
        return 2.0 * math.pi * self.radius

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    def nearest(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v = w - self.center
        r = np.abs(v)
        outside = r > self.radius
        safe = np.where(r > 0, r, 1.0)
        pts = np.where(outside, self.center + self.radius * v / safe, w)
        return pts, np.maximum(r - self.radius, 0.0)

    def extent(self) -> tuple[float, float, float, float]:
        c, r = self.center, self.radius
        return c.real - r, c.real + r, c.imag - r, c.imag + r


@dataclass(frozen=True)
class Polyline:
    vertices: tuple

    def __post_init__(self):
        verts = tuple(complex(v) for v in self.vertices)
        if len(verts) < 2:
            raise ValueError("a polyline needs at least two vertices")
        if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in verts):
            raise ValueError("polyline vertices must be finite")
        if any(a == b for a, b in zip(verts[:-1], verts[1:])):
            raise ValueError("consecutive polyline vertices must differ")
        object.__setattr__(self, "vertices", verts)

    @property
    def segment_lengths(self) -> np.ndarray:
        v = np.asarray(self.vertices)
        return np.abs(np.diff(v))

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    @property
    def area(self) -> float:
        return 0.0

    def nearest(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        best = np.full(w.shape, np.inf)
        pts = np.zeros(w.shape, dtype=complex)
        for a, b in zip(self.vertices[:-1], self.vertices[1:]):
            d = b - a
            s = np.clip(((w - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
            foot = a + s * d
            dist = np.abs(w - foot)
            better = dist < best
            best = np.where(better, dist, best)
            pts = np.where(better, foot, pts)
        return pts, best

    def point_at(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Point and unit tangent at arc length ``s`` (clipped to the polyline)."""
        v = np.asarray(self.vertices)
        seg = self.segment_lengths
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        s = np.clip(np.asarray(s, dtype=float), 0.0, cum[-1])
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
        tangent = (v[k + 1] - v[k]) / seg[k]
        return v[k] + (s - cum[k]) * tangent, tangent

    def extent(self) -> tuple[float, float, float, float]:
        v = np.asarray(self.vertices)
        return v.real.min(), v.real.max(), v.imag.min(), v.imag.max()


Piece = Union[Disk, Polyline]


@dataclass(frozen=True)
class Discretization:
    """Quadrature and candidate nodes for a compact set.

    ``normals`` are unit normals at the boundary nodes (outward for disks,
    left of the direction of travel for polylines).
    """

    boundary_nodes: np.ndarray
    boundary_weights: np.ndarray
    normals: np.ndarray
    area_nodes: np.ndarray
    area_weights: np.ndarray
    candidates: np.ndarray


@dataclass(frozen=True)
class CompactSet:
    pieces: tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("a compact set needs at least one piece")
        for p in pieces:
            if not isinstance(p, (Disk, Polyline)):
                raise TypeError(f"unsupported piece {p!r}")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def from_config(cls, cfg: dict) -> "CompactSet":
        pieces: list[Piece] = []
        for d in cfg.get("disks", []):
            if len(d) != 3:
                raise ValueError(f"disk entries are [re, im, r], got {d!r}")
            pieces.append(Disk(complex(d[0], d[1]), d[2]))
        for line in cfg.get("polylines", []):
            pieces.append(Polyline(tuple(complex(v[0], v[1]) for v in line)))
        return cls(tuple(pieces))

    def to_config(self) -> dict:
        disks = [[p.center.real, p.center.imag, p.radius] for p in self.pieces if isinstance(p, Disk)]
        lines = [[[v.real, v.imag] for v in p.vertices] for p in self.pieces if isinstance(p, Polyline)]
        return {"disks": disks, "polylines": lines}

    @property
    def length(self) -> float:
        return sum(p.length for p in self.pieces)

    @property
    def area(self) -> float:
        return sum(p.area for p in self.pieces)

    def nearest(self, w):
        arr = np.atleast_1d(np.asarray(w, dtype=complex))
        best = np.full(arr.shape, np.inf)
        pts = np.zeros(arr.shape, dtype=complex)
        for p in self.pieces:
            q, d = p.nearest(arr)
            better = d < best
            best = np.where(better, d, best)
            pts = np.where(better, q, pts)
        return pts, best

    def distance(self, w):
        arr = np.asarray(w, dtype=complex)
        d = self.nearest(arr)[1]
        return float(d[0]) if arr.ndim == 0 else d.reshape(arr.shape)

    def extent(self) -> tuple[float, float, float, float]:
        ext = np.array([p.extent() for p in self.pieces])
        return ext[:, 0].min(), ext[:, 1].max(), ext[:, 2].min(), ext[:, 3].max()

    def sample_points(self, m: int = 64) -> np.ndarray:
        """Boundary points plus disk centers; enough to bound distances from K to a boundary."""
        disc = self.discretize(max(m, 8))
        centers = [p.center for p in self.pieces if isinstance(p, Disk)]
        pts = [disc.boundary_nodes, np.asarray(centers, dtype=complex)]
        for p in self.pieces:
            if isinstance(p, Polyline):
                pts.append(np.asarray(p.vertices))
        return np.concatenate(pts)

    def _allocate(self, m: int) -> list[int]:
        lengths = np.array([p.length for p in self.pieces])
        if m < len(lengths):
            raise ValueError(f"need at least one node per piece, got m={m}")
        raw = m * lengths / lengths.sum()
        counts = np.maximum(np.floor(raw).astype(int), 1)
        while counts.sum() > m:
            counts[np.argmax(counts)] -= 1
        order = np.argsort(-(raw - np.floor(raw)), kind="stable")
        i = 0
        while counts.sum() < m:
            counts[order[i % len(order)]] += 1
            i += 1
        return counts.tolist()

    def discretize(self, m: int) -> Discretization:
        if m < 8:
            raise ValueError(f"discretize needs m >= 8, got {m}")
        bn, bw, nrm, an, aw, cand = [], [], [], [], [], []
        for piece, mp in zip(self.pieces, self._allocate(m)):
            if isinstance(piece, Disk):
                theta = 2.0 * math.pi * np.arange(mp) / mp
                e = np.exp(1j * theta)
                bn.append(piece.center + piece.radius * e)
                bw.append(np.full(mp, piece.length / mp))
                nrm.append(e)
                n_r = max(2, int(round(math.sqrt(mp / 4.0))))
                n_t = max(4, mp // n_r)
                x, wx = np.polynomial.legendre.leggauss(n_r)
                rho = 0.5 * piece.radius * (x + 1.0)
                w_r = 0.5 * piece.radius * wx * rho
                phi = 2.0 * math.pi * (np.arange(n_t) + 0.5) / n_t
                nodes = piece.center + rho[:, None] * np.exp(1j * phi)[None, :]
                an.append(nodes.ravel())
                aw.append((w_r[:, None] * np.full(n_t, 2.0 * math.pi / n_t)[None, :]).ravel())
                cand.extend([bn[-1], nodes.ravel()])
            else:
                length = piece.length
                s_mid = (np.arange(mp) + 0.5) * length / mp
                pts, tan = piece.point_at(s_mid)
                bn.append(pts)
                bw.append(np.full(mp, length / mp))
                nrm.append(1j * tan)
                s_all = np.arange(2 * mp + 1) * length / (2 * mp)
                cand.append(piece.point_at(s_all)[0])
                cand.append(np.asarray(piece.vertices))
        candidates = np.unique(np.round(np.concatenate(cand), 15))
        return Discretization(
            boundary_nodes=np.concatenate(bn),
            boundary_weights=np.concatenate(bw),
            normals=np.concatenate(nrm),
            area_nodes=np.concatenate(an) if an else np.zeros(0, dtype=complex),
            area_weights=np.concatenate(aw) if aw else np.zeros(0),
            candidates=candidates,
        )

    def check_inside(self, domain, petal=None) -> None:
        """Raise unless K sits inside ``domain`` (and ``petal``) with positive clearance."""
        pts = self.sample_points()
        if not np.all(domain.contains(pts)):
            raise ValueError("compact set is not inside the domain")
        for p in self.pieces:
            if isinstance(p, Disk) and not domain.distance(p.center) > p.radius:
                raise ValueError(f"disk {p!r} touches the domain boundary")
        if petal is None:
            return
        x0, x1, y0, y1 = self.extent()
        if petal.kind == "degenerate-line":
            if not (y0 == y1 == petal.y0):
                raise ValueError("compact set must lie on the degenerate petal line")
        elif not (y0 > petal.y0 and y1 < petal.y1):
            raise ValueError("compact set does not fit strictly inside the petal")


def distance_to_set(K: CompactSet, w):
    return K.distance(w)


def discretize(K: CompactSet, m: int) -> Discretization:
    return K.discretize(m)
