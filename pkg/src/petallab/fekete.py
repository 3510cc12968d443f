"""Euclidean and hyperbolic n-th diameters and hyperbolic capacity.

An n-diameter is the largest geometric mean of pairwise "closeness" values
over n-tuples from ``K``: ``|a - b|`` for the Euclidean metric and
``tanh d(a, b) = exp(-g(a, b))`` for the hyperbolic one.  The search runs
single-point exchange ascent over a sorted candidate grid, restarted from a
greedy tuple and several random tuples, then optionally polishes points on
disk pieces with L-BFGS-B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import oracles
from .compacts import CompactSet, Disk
from .domains import translate
from .hypgeom import green_upper_bound_array
from .wos import WosConfig, derive_seed, green_rows

__all__ = [
    "FeketeResult",
    "CaphEstimate",
    "EuclideanMetric",
    "HyperbolicMetric",
    "BoundMetric",
    "make_metric",
    "tuple_log_product",
    "n_diameter",
    "caph_estimate",
    "extrapolate_caph",
]

_TIE = 1e-12


class EuclideanMetric:
    name = "euclidean"
    exact = True

    def pair_log(self, a, b):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(np.asarray(a) - np.asarray(b)))

    def log_matrix(self, pts):
        return self.pair_log(pts[:, None], pts[None, :]), None


class HyperbolicMetric:
    """``log tanh d`` in ``domain - t``; closed form or cached Monte Carlo Green values.

    For Monte Carlo kernels ``log_matrix`` also returns the per-row standard
    errors (row ``i`` holds walks started at candidate ``i``).
    """

    name = "hyperbolic"

    def __init__(self, domain, t: float = 0.0, cfg: WosConfig | None = None, kernel: str = "auto"):
        self.domain, self.t, self.cfg = domain, float(t), cfg
        if kernel == "auto":
            kernel = "oracle" if oracles.has_oracle(domain) else "monte-carlo"
        if kernel == "oracle" and not oracles.has_oracle(domain):
            raise ValueError(f"no closed-form Green function for {domain!r}")
        if kernel == "monte-carlo" and cfg is None:
            raise ValueError("a WosConfig is required for Monte Carlo distances")
        self.kernel = kernel
        self.exact = kernel == "oracle"

    def pair_log(self, a, b):
        if not self.exact:
            raise TypeError("pairwise evaluation needs a closed-form metric")
        with np.errstate(divide="ignore"):
            return -oracles.green(translate(self.domain, self.t), a, b)

    def log_matrix(self, pts):
        shifted = translate(self.domain, self.t)
        if not np.all(shifted.contains(pts)):
            raise ValueError("candidates must lie inside the shifted domain")
        if self.exact:
            return self.pair_log(pts[:, None], pts[None, :]), None
        mean, se, _ = green_rows(pts, pts, self.domain, self.t, self.cfg, salt=11)
        with np.errstate(divide="ignore"):
            g = mean - np.log(np.abs(pts[:, None] - pts[None, :]))
        g = np.maximum(0.5 * (g + g.T), 0.0)
        np.fill_diagonal(g, np.inf)
        return -g, se


class BoundMetric:
    """Lower bound ``exp(-green_upper_bound)`` for ``tanh d``; diameters from it are certified lower bounds."""

    name = "bound"
    exact = True

    def __init__(self, domain, t: float = 0.0):
        self.domain, self.t = domain, float(t)

    def pair_log(self, a, b):
        return -green_upper_bound_array(a, b, self.domain, self.t)

    def log_matrix(self, pts):
        return self.pair_log(pts[:, None], pts[None, :]), None


def make_metric(name: str, domain=None, t: float = 0.0, cfg: WosConfig | None = None, kernel: str = "auto"):
    if name == "euclidean":
        return EuclideanMetric()
    if domain is None:
        raise ValueError(f"metric {name!r} needs a domain")
    if name in ("hyperbolic", "hyp"):
        return HyperbolicMetric(domain, t, cfg, kernel)
    if name == "bound":
        return BoundMetric(domain, t)
    raise ValueError(f"unknown metric {name!r}")


@dataclass(frozen=True)
class FeketeResult:
    n: int
    diameter: float
    tuple: tuple
    n_restarts: int
    std_err: float = 0.0
    metric: str = "euclidean"
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "diameter": self.diameter,
            "tuple": [[z.real, z.imag] for z in self.tuple],
            "n_restarts": self.n_restarts,
            "std_err": self.std_err,
            "metric": self.metric,
            "flags": list(self.flags),
        }


def tuple_log_product(L: np.ndarray, idx) -> float:
    idx = np.asarray(idx)
    sub = L[np.ix_(idx, idx)]
    return float(np.sum(np.triu(sub, 1)))


def _ascent(L: np.ndarray, idx: np.ndarray) -> np.ndarray:
    idx = idx.copy()
    n = idx.size
    while True:
        improved = False
        for p in range(n):
            others = np.delete(idx, p)
            contrib = L[:, others].sum(axis=1)
            contrib[others] = -np.inf
            best = int(np.argmax(contrib))
            cur = contrib[idx[p]]
            if contrib[best] > cur + _TIE * max(1.0, abs(cur)):
                idx[p] = best
                improved = True
        if not improved:
            return idx


def _greedy(L: np.ndarray, n: int) -> np.ndarray:
    N = L.shape[0]
    M = np.where(np.eye(N, dtype=bool), -np.inf, L)
    i, j = np.unravel_index(int(np.argmax(M)), M.shape)
    idx = [min(i, j), max(i, j)]
    while len(idx) < n:
        contrib = L[:, idx].sum(axis=1)
        contrib[idx] = -np.inf
        idx.append(int(np.argmax(contrib)))
    return np.array(idx)


def _better(a: tuple, b: tuple) -> bool:
    """Compare ``(log_product, sorted_indices)``: larger product, then lexicographically smaller."""
    if a[0] > b[0] + _TIE * max(1.0, abs(b[0])):
        return True
    if abs(a[0] - b[0]) <= _TIE * max(1.0, abs(b[0])):
        return a[1] < b[1]
    return False


def _polish(points: np.ndarray, K: CompactSet, metric) -> np.ndarray:
    """Continuous ascent for tuple points lying on disk pieces."""
    disks = [p for p in K.pieces if isinstance(p, Disk)]
    owner = []
    for z in points:
        hit = [d for d in disks if abs(z - d.center) <= d.radius * (1 + 1e-12)]
        owner.append(hit[0] if hit else None)
    movable = [i for i, d in enumerate(owner) if d is not None]
    if not movable:
        return points
    x0, bounds = [], []
    for i in movable:
        v = points[i] - owner[i].center
        x0 += [math.atan2(v.imag, v.real), abs(v)]
        bounds += [(None, None), (0.0, owner[i].radius)]

    def unpack(x):
        pts = points.copy()
        for k, i in enumerate(movable):
            pts[i] = owner[i].center + x[2 * k + 1] * complex(math.cos(x[2 * k]), math.sin(x[2 * k]))
        return pts

    def objective(x):
        pts = unpack(x)
        L = metric.pair_log(pts[:, None], pts[None, :])
        val = float(np.sum(np.triu(L, 1)))
        return -val if math.isfinite(val) else 1e300

    res = minimize(objective, np.array(x0), method="L-BFGS-B", bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-12})
    return unpack(res.x)


def n_diameter(
    K,
    n: int,
    metric=None,
    cfg: WosConfig | None = None,
    m: int | None = None,
    n_restarts: int = 8,
    polish: bool = True,
    candidates=None,
    seed: int = 0,
) -> FeketeResult:
    """n-th diameter of ``K`` under ``metric`` (default Euclidean).

    ``candidates`` overrides the grid from ``K.discretize(m)``; they are
    sorted lexicographically so ties resolve to the smallest point list.
    """
    if n < 2:
        raise ValueError(f"n_diameter needs n >= 2, got {n}")
    if n_restarts < 1:
        raise ValueError("n_restarts must be positive")
    metric = metric or EuclideanMetric()
    if candidates is None:
        if K is None:
            raise ValueError("need K or explicit candidates")
        m = m or max(64, 4 * n)
        cands = K.discretize(m).candidates
    else:
        cands = np.unique(np.round(np.asarray(candidates, dtype=complex).ravel(), 15))
    flags: list[str] = []
    if cands.size < n:
        return FeketeResult(n, 0.0, (), 0, 0.0, metric.name, ("degenerate",))
    if cands.size < 4 * n:
        flags.append("small-grid")
    L, se = metric.log_matrix(cands)
    rng = np.random.default_rng(derive_seed(seed if cfg is None else cfg.seed, n))
    starts = [_greedy(L, n)] + [rng.choice(cands.size, size=n, replace=False) for _ in range(n_restarts)]
    best = None
    for s in starts:
        idx = np.sort(_ascent(L, np.asarray(s)))
        key = (tuple_log_product(L, idx), tuple(idx.tolist()))
        if best is None or _better(key, best):
            best = key
    idx = np.array(best[1])
    pts = cands[idx]
    S = best[0]
    if polish and metric.exact and K is not None and math.isfinite(S):
        cand = _polish(pts, K, metric)
        S2 = float(np.sum(np.triu(metric.pair_log(cand[:, None], cand[None, :]), 1)))
        if S2 > S:
            order = np.lexsort((cand.imag, cand.real))
            pts, S = cand[order], S2
    if not math.isfinite(S):
        return FeketeResult(n, 0.0, tuple(complex(z) for z in pts), len(starts), 0.0, metric.name, tuple(flags + ["degenerate"]))
    expo = 2.0 / (n * (n - 1))
    diam = math.exp(expo * S)
    std = 0.0
    if se is not None:
        sub = se[np.ix_(idx, idx)]
        np.fill_diagonal(sub, 0.0)
        # rows are independent walk sets; entries within a row treated as fully correlated
        sigma_S = math.sqrt(float(np.sum((0.5 * sub.sum(axis=1)) ** 2)))
        std = diam * expo * sigma_S
    return FeketeResult(n, diam, tuple(complex(z) for z in pts), len(starts), std, metric.name, tuple(flags))


@dataclass(frozen=True)
class CaphEstimate:
    value: float
    sequence: tuple
    flags: tuple = field(default=())

    def __iter__(self):
        return iter((self.value, self.sequence))

    def to_dict(self) -> dict:
        return {"value": self.value, "sequence": list(self.sequence), "flags": list(self.flags)}


def extrapolate_caph(ns, ds) -> float:
    """Limit of ``d_n`` from ``log d_n = a + b log(n)/(n-1) + c/(n-1)``.

    On a circle of radius ``r`` inside the unit disk the hyperbolic Fekete
    values are ``r (n (1 - r^2) / (1 - r^(2n)))^(1/(n-1))``, which the model
    reproduces up to the ``O(r^(2n))`` term.
    """
    ns = np.asarray(ns, dtype=float)
    ds = np.asarray(ds, dtype=float)
    if np.any(ds <= 0):
        return 0.0
    A = np.column_stack([np.ones_like(ns), np.log(ns) / (ns - 1.0), 1.0 / (ns - 1.0)])
    coef, *_ = np.linalg.lstsq(A, np.log(ds), rcond=None)
    return float(math.exp(coef[0]))


def caph_estimate(
    K,
    domain,
    t: float,
    n_max: int = 10,
    cfg: WosConfig | None = None,
    m: int | None = None,
    metric=None,
    candidates=None,
) -> CaphEstimate:
    """Hyperbolic capacity of ``K`` in ``domain - t`` from ``d_{2,h}, ..., d_{n_max,h}``.

    The limit is extrapolated from the upper half of the sequence.
    """
    if n_max < 6:
        raise ValueError(f"caph_estimate needs n_max >= 6, got {n_max}")
    metric = metric or HyperbolicMetric(domain, t, cfg)
    if candidates is None and metric.__class__ is HyperbolicMetric and not metric.exact:
        # one Monte Carlo cache shared by every n
        cands = K.discretize(m or max(64, 4 * n_max)).candidates
        L, se = metric.log_matrix(cands)
        metric = _CachedMetric(metric.name, cands, L, se)
        candidates = cands
    seq = []
    for n in range(2, n_max + 1):
        seq.append(n_diameter(K, n, metric, cfg, m=m or max(64, 4 * n_max), candidates=candidates).diameter)
    flags = []
    if any(b > a * (1 + 1e-6) for a, b in zip(seq[:-1], seq[1:])):
        flags.append("non-monotone")
    if seq[-1] == 0.0:
        return CaphEstimate(0.0, tuple(seq), tuple(flags))
    ns = np.arange(2, n_max + 1)
    lo = math.ceil(n_max / 2) - 2
    return CaphEstimate(extrapolate_caph(ns[lo:], seq[lo:]), tuple(seq), tuple(flags))


class _CachedMetric:
    exact = False

    def __init__(self, name, cands, L, se):
        self.name, self._cands, self._L, self._se = name, cands, L, se

    def log_matrix(self, pts):
        if pts.shape != self._cands.shape or not np.all(pts == self._cands):
            raise ValueError("cached metric queried with a different candidate grid")
        return self._L, self._se
