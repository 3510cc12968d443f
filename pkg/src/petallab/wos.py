"""Walk-on-spheres estimators for harmonic measure, Green function and density.

Walks are vectorized over numpy arrays.  Every walk draws its jump angles from
a counter-based stream keyed by ``(seed, walk_index, step)``, so a walk's path
does not depend on how walks are batched, and reductions run over arrays in
walk-index order.  Re-running with the same seed is bit-identical.

Absorbed walks report the nearest boundary point (of the domain or of ``K``)
as their exit point, which removes the epsilon-shell offset from log-distance
averages.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .domains import translate
from .oracles import distance_from_green

__all__ = [
    "WosConfig",
    "Estimate",
    "WalkBatch",
    "walk_keys",
    "derive_seed",
    "run_walks",
    "wos_exit",
    "harmonic_measure_mc",
    "green_mc",
    "green_rows",
    "robin_density_mc",
    "robin_densities",
    "hyp_distance_mc",
]

log = logging.getLogger(__name__)

OUTER, INNER, TRUNCATED = 0, 1, -1
_HIT_NAMES = {OUTER: "outer", INNER: "inner", TRUNCATED: "truncated"}
TRUNCATION_LIMIT = 1e-3

_M64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STEP = 0xD1B54A32D192ED03
_CHUNK = 1 << 16


@dataclass(frozen=True)
class WosConfig:
    epsilon_shell: float = 1e-3
    max_steps: int = 10_000
    n_walks: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon_shell <= 0.1:
            raise ValueError(f"epsilon_shell must lie in (0, 0.1], got {self.epsilon_shell}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.n_walks < 100:
            raise ValueError(f"n_walks must be at least 100, got {self.n_walks}")
        if not 0 <= self.seed <= _M64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_walks(self, n_walks: int | None) -> "WosConfig":
        if n_walks is None or n_walks == self.n_walks:
            return self
        return WosConfig(self.epsilon_shell, self.max_steps, int(n_walks), self.seed)


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo result.

    ``n_samples`` counts launched walks; walks that hit ``max_steps`` are
    tallied in ``n_truncated``.
    """

    value: float
    std_err: float
    n_samples: int
    n_truncated: int
    seed: int
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_err": self.std_err,
            "n_samples": self.n_samples,
            "n_truncated": self.n_truncated,
            "seed": self.seed,
            "flags": list(self.flags),
        }


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 arithmetic wraps
    x = x ^ (x >> np.uint64(30))
    x = x * np.uint64(0xBF58476D1CE4E5B9)
    x = x ^ (x >> np.uint64(27))
    x = x * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def derive_seed(seed: int, *salt: int) -> int:
    """Deterministic sub-seed for an independent family of walks."""
    x = np.array([seed & _M64], dtype=np.uint64)
    for s in salt:
        x = _mix64(x ^ _mix64(np.array([(s + 1) & _M64], dtype=np.uint64) * _GOLDEN))
    return int(x[0])


def walk_keys(seed: int, indices) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.uint64)
    base = _mix64(np.array([seed & _M64], dtype=np.uint64))
    return _mix64(base ^ (idx * _GOLDEN))


def _uniform(keys: np.ndarray, step: int) -> np.ndarray:
    bits = _mix64(keys + np.uint64(((step + 1) * _STEP) & _M64))
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class WalkBatch:
    exits: np.ndarray
    hits: np.ndarray
    steps: np.ndarray

    @property
    def n_truncated(self) -> int:
        return int(np.count_nonzero(self.hits == TRUNCATED))


def _run_chunk(starts, keys, domain, K, eps, max_steps):
    n = len(starts)
    exits = starts.copy()
    hits = np.full(n, TRUNCATED, dtype=np.int8)
    steps = np.full(n, max_steps, dtype=np.int32)
    idx = np.arange(n)
    p, k = starts.copy(), keys
    for step in range(max_steps + 1):
        nd, dd = domain._nearest(p)
        if K is not None:
            nk, dk = K.nearest(p)
            r = np.minimum(dd, dk)
        else:
            dk = None
            r = dd
        done = r < eps
        if done.any():
            outer = done if dk is None else done & (dd <= dk)
            hits[idx[outer]] = OUTER
            exits[idx[outer]] = nd[outer]
            if dk is not None:
                inner = done & ~outer
                hits[idx[inner]] = INNER
                exits[idx[inner]] = nk[inner]
            steps[idx[done]] = step
            keep = ~done
            idx, p, k, r = idx[keep], p[keep], k[keep], r[keep]
        if idx.size == 0 or step == max_steps:
            break
        p = p + r * np.exp(2j * math.pi * _uniform(k, step))
    exits[idx] = p
    return exits, hits, steps


def run_walks(starts, keys, domain, K, cfg: WosConfig) -> WalkBatch:
    """Run one walk per start point; ``keys`` come from :func:`walk_keys`."""
    starts = np.asarray(starts, dtype=complex).ravel()
    keys = np.asarray(keys, dtype=np.uint64).ravel()
    if starts.shape != keys.shape:
        raise ValueError("starts and keys must have the same length")
    out = [
        _run_chunk(starts[i : i + _CHUNK], keys[i : i + _CHUNK], domain, K, cfg.epsilon_shell, cfg.max_steps)
        for i in range(0, len(starts), _CHUNK)
    ]
    if not out:
        empty = np.zeros(0)
        return WalkBatch(empty.astype(complex), empty.astype(np.int8), empty.astype(np.int32))
    return WalkBatch(*(np.concatenate(parts) for parts in zip(*out)))


def wos_exit(z: complex, domain, K, cfg: WosConfig, walk_index: int) -> tuple[complex, str]:
    """Exit point and classification of a single walk."""
    batch = run_walks([z], walk_keys(cfg.seed, [walk_index]), domain, K, cfg)
    return complex(batch.exits[0]), _HIT_NAMES[int(batch.hits[0])]


def _check_start(shifted, z, K, cfg):
    if not shifted.contains(z):
        raise ValueError(f"start point {z!r} is not inside the shifted domain")
    if K is not None:
        if not np.all(shifted.contains(K.sample_points())):
            raise ValueError("compact set is not inside the shifted domain")
        if K.distance(z) <= cfg.epsilon_shell:
            raise ValueError("start point lies within epsilon_shell of K")


def _truncation_flags(n_trunc: int, n: int) -> tuple:
    if n_trunc / n > TRUNCATION_LIMIT:
        log.warning("%d of %d walks truncated", n_trunc, n)
        return ("truncation",)
    return ()


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.inf
    mean = math.fsum(x) / x.size
    if x.size < 2:
        return mean, math.inf
    var = math.fsum((x - mean) ** 2) / (x.size - 1)
    return mean, math.sqrt(var / x.size)


def harmonic_measure_mc(z: complex, K, domain, t: float, cfg: WosConfig) -> Estimate:
    """Probability that a walk from ``z`` in ``domain - t`` reaches ``K`` first."""
    shifted = translate(domain, t)
    z = complex(z)
    _check_start(shifted, z, K, cfg)
    n = cfg.n_walks
    batch = run_walks(np.full(n, z), walk_keys(cfg.seed, np.arange(n)), shifted, K, cfg)
    # truncated walks count as outer hits
    p = np.count_nonzero(batch.hits == INNER) / n
    return Estimate(
        value=p,
        std_err=math.sqrt(p * (1.0 - p) / n),
        n_samples=n,
        n_truncated=batch.n_truncated,
        seed=cfg.seed,
        flags=_truncation_flags(batch.n_truncated, n),
    )


def green_rows(sources, targets, domain, t: float, cfg: WosConfig, salt: int = 0):
    """Harmonic parts ``E log|exit - target|`` for walks from each source.

    Returns ``(mean, std_err, n_truncated)``: ``mean[i, j]`` averages
    ``log|exit - targets[i, j]|`` over walks started at ``sources[i]``.
    ``targets`` is either shape ``(k,)`` (shared) or ``(len(sources), k)``.
    Row ``i`` uses the stream seeded by ``derive_seed(cfg.seed, salt, i)``.
    """
    shifted = translate(domain, t)
    sources = np.atleast_1d(np.asarray(sources, dtype=complex))
    targets = np.asarray(targets, dtype=complex)
    if targets.ndim == 1:
        targets = np.broadcast_to(targets, (len(sources), targets.size))
    if not np.all(shifted.contains(sources)):
        raise ValueError("all sources must lie inside the shifted domain")
    n = cfg.n_walks
    mean = np.empty(targets.shape)
    se = np.empty(targets.shape)
    n_trunc = np.zeros(len(sources), dtype=int)
    rows_per_batch = max(1, (4 * _CHUNK) // n)
    for r0 in range(0, len(sources), rows_per_batch):
        rows = range(r0, min(len(sources), r0 + rows_per_batch))
        starts = np.concatenate([np.full(n, sources[i]) for i in rows])
        keys = np.concatenate([walk_keys(derive_seed(cfg.seed, salt, i), np.arange(n)) for i in rows])
        batch = run_walks(starts, keys, shifted, None, cfg)
        for j, i in enumerate(rows):
            sl = slice(j * n, (j + 1) * n)
            ok = batch.hits[sl] != TRUNCATED
            n_trunc[i] = n - int(ok.sum())
            ex = batch.exits[sl][ok]
            with np.errstate(divide="ignore"):
                logs = np.log(np.abs(ex[:, None] - targets[i][None, :]))
            for c in range(targets.shape[1]):
                mean[i, c], se[i, c] = _mean_se(logs[:, c])
    return mean, se, n_trunc


def green_mc(z: complex, w: complex, domain, t: float, cfg: WosConfig) -> Estimate:
    """``g(z, w) = -log|z - w| + E log|exit - w|`` with walks from ``z``."""
    z, w = complex(z), complex(w)
    if z == w:
        raise ValueError("green_mc needs z != w")
    shifted = translate(domain, t)
    for p in (z, w):
        _check_start(shifted, p, None, cfg)
    mean, se, n_trunc = green_rows([z], [w], domain, t, cfg)
    g = -math.log(abs(z - w)) + mean[0, 0]
    flags = list(_truncation_flags(int(n_trunc[0]), cfg.n_walks))
    if g < 0:
        flags.append("clamped")
        g = 0.0
    return Estimate(g, float(se[0, 0]), cfg.n_walks, int(n_trunc[0]), cfg.seed, tuple(flags))


def robin_densities(points, domain, t: float, cfg: WosConfig, salt: int = 1):
    """Vectorized density estimates ``exp(-E log|exit - w|)`` at each point.

    Returns ``(values, std_errs, n_truncated)`` arrays.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    mean, se, n_trunc = green_rows(pts, pts[:, None], domain, t, cfg, salt=salt)
    lam = np.exp(-mean[:, 0])
    return lam, lam * se[:, 0], n_trunc


def robin_density_mc(w: complex, domain, t: float, cfg: WosConfig) -> Estimate:
    w = complex(w)
    _check_start(translate(domain, t), w, None, cfg)
    lam, se, n_trunc = robin_densities([w], domain, t, cfg)
    flags = _truncation_flags(int(n_trunc[0]), cfg.n_walks)
    return Estimate(float(lam[0]), float(se[0]), cfg.n_walks, int(n_trunc[0]), cfg.seed, flags)


def hyp_distance_mc(z: complex, w: complex, domain, t: float, cfg: WosConfig) -> Estimate:
    """``d = artanh(exp(-g))`` from :func:`green_mc`; ``g <= 0`` yields ``inf``."""
    g = green_mc(z, w, domain, t, cfg)
    if g.value <= 0:
        return Estimate(math.inf, math.inf, g.n_samples, g.n_truncated, g.seed, g.flags + ("nonpositive-green",))
    d = float(distance_from_green(g.value))
    # |dd/dg| = 1 / (2 sinh g)
    se = g.std_err / (2.0 * math.sinh(g.value))
    return Estimate(d, se, g.n_samples, g.n_truncated, g.seed, g.flags)
