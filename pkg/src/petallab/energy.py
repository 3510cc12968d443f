"""Green equilibrium measures, Green energy and condenser capacity.

The energy ``V(K, D)`` is the minimum of ``w^T G w`` over probability
vectors ``w`` on boundary panels of ``K``; ``Cap(D, K) = 2 pi / V``.  Panel
self-interaction is approximated by the Green function between a node and
the point a quarter panel-length away along the normal.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import oracles
from .domains import translate
from .wos import WosConfig, green_rows

__all__ = [
    "EquilibriumResult",
    "KernelMatrix",
    "green_matrix",
    "project_simplex",
    "minimize_on_simplex",
    "equilibrium",
    "condenser_capacity",
]

log = logging.getLogger(__name__)

KERNEL_MODES = ("auto", "oracle", "monte-carlo")


@dataclass(frozen=True)
class KernelMatrix:
    matrix: np.ndarray
    std_errs: np.ndarray
    source: str
    n_truncated: int = 0


@dataclass(frozen=True)
class EquilibriumResult:
    energy: float
    capacity: float
    weights: np.ndarray
    nodes: np.ndarray
    kernel_source: str
    iterations: int = 0
    converged: bool = True
    std_err: float = 0.0
    flags: tuple = field(default=())

    @property
    def capacity_std_err(self) -> float:
        return 2.0 * math.pi * self.std_err / self.energy**2

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "capacity": self.capacity,
            "std_err": self.std_err,
            "capacity_std_err": self.capacity_std_err,
            "kernel_source": self.kernel_source,
            "iterations": self.iterations,
            "converged": self.converged,
            "flags": list(self.flags),
            "weights": self.weights.tolist(),
            "nodes": [[z.real, z.imag] for z in self.nodes],
        }


def _resolve_mode(domain, kernel: str) -> str:
    if kernel not in KERNEL_MODES:
        raise ValueError(f"kernel must be one of {KERNEL_MODES}, got {kernel!r}")
    if kernel == "auto":
        return "oracle" if oracles.has_oracle(domain) else "monte-carlo"
    if kernel == "oracle" and not oracles.has_oracle(domain):
        raise ValueError(f"no closed-form Green function for {domain!r}")
    return kernel


def green_matrix(
    nodes,
    domain,
    t: float,
    cfg: WosConfig | None = None,
    diag_offsets=None,
    kernel: str = "auto",
) -> KernelMatrix:
    """Symmetric Green matrix on ``nodes`` in ``domain - t``.

    ``diag_offsets[i]`` is the displacement used for the diagonal proxy
    ``g(x_i, x_i + offset_i)``; without it the diagonal is left at zero.
    """
    x = np.atleast_1d(np.asarray(nodes, dtype=complex))
    n = x.size
    if np.unique(x).size != n:
        raise ValueError("green_matrix nodes must be pairwise distinct")
    shifted = translate(domain, t)
    if not np.all(shifted.contains(x)):
        raise ValueError("all nodes must lie inside the shifted domain")
    offs = None if diag_offsets is None else x + np.asarray(diag_offsets, dtype=complex)
    if offs is not None and not np.all(shifted.contains(offs)):
        raise ValueError("diagonal offset points leave the shifted domain")
    mode = _resolve_mode(domain, kernel)
    se = np.zeros((n, n))
    n_trunc = 0
    if mode == "oracle":
        with np.errstate(divide="ignore"):
            G = oracles.green(shifted, x[:, None], x[None, :])
        np.fill_diagonal(G, 0.0 if offs is None else oracles.green(shifted, x, offs))
    else:
        if cfg is None:
            raise ValueError("a WosConfig is required for Monte Carlo kernels")
        diag_t = x if offs is None else offs
        targets = np.concatenate([np.broadcast_to(x, (n, n)), diag_t[:, None]], axis=1)
        mean, err, tr = green_rows(x, targets, domain, t, cfg, salt=7)
        n_trunc = int(tr.sum())
        with np.errstate(divide="ignore"):
            sing = -np.log(np.abs(x[:, None] - targets))
        full = sing + mean
        G = full[:, :n].copy()
        se = err[:, :n].copy()
        np.fill_diagonal(G, 0.0 if offs is None else full[:, n])
        np.fill_diagonal(se, 0.0 if offs is None else err[:, n])
        G = 0.5 * (G + G.T)
        se = 0.5 * np.hypot(se, se.T)
    if not np.all(np.isfinite(G)):
        raise ValueError("Green matrix has non-finite entries")
    return KernelMatrix(G, se, mode, n_trunc)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def minimize_on_simplex(G: np.ndarray, tol: float = 1e-10, window: int = 50, max_iter: int = 100_000):
    """Minimize ``w^T G w`` over the simplex.

    Projected gradient with exact line search; a Frank-Wolfe step is taken
    whenever the projected direction has no positive curvature.  Returns
    ``(w, energy, iterations, converged)``.
    """
    n = G.shape[0]
    w = np.full(n, 1.0 / n)
    lip = 2.0 * max(float(np.max(np.abs(np.linalg.eigvalsh(G)))), 1e-300)
    step = 1.0 / lip
    Gw = G @ w
    energy = float(w @ Gw)
    history = [energy]
    for it in range(1, max_iter + 1):
        grad = 2.0 * Gw
        d = project_simplex(w - step * grad) - w
        Gd = G @ d
        curv = float(d @ Gd)
        slope = float(w @ Gd)
        if curv <= 0 or not np.any(d):
            k = int(np.argmin(grad))
            d = -w.copy()
            d[k] += 1.0
            Gd = G @ d
            curv = float(d @ Gd)
            slope = float(w @ Gd)
        if curv > 0:
            alpha = min(1.0, max(0.0, -slope / curv))
        else:
            alpha = 1.0 if slope < 0 else 0.0
        w = np.maximum(w + alpha * d, 0.0)
        w /= w.sum()
        Gw = G @ w
        energy = float(w @ Gw)
        history.append(energy)
        if it >= window and history[-window - 1] - energy < tol:
            return w, energy, it, True
    log.warning("simplex minimization did not converge after %d iterations", max_iter)
    return w, energy, max_iter, False


def equilibrium(
    K,
    domain,
    t: float,
    m: int = 64,
    cfg: WosConfig | None = None,
    kernel: str = "auto",
) -> EquilibriumResult:
    """Discrete Green equilibrium measure of ``K`` in ``domain - t`` on ``m`` panels."""
    if m < 16:
        raise ValueError(f"equilibrium needs m >= 16, got {m}")
    K.check_inside(translate(domain, t))
    disc = K.discretize(m)
    offsets = 0.25 * disc.boundary_weights * disc.normals
    km = green_matrix(disc.boundary_nodes, domain, t, cfg, offsets, kernel)
    w, V, iters, ok = minimize_on_simplex(km.matrix)
    # rows are independent walk sets; entries within a row are treated as fully correlated
    sigma = math.sqrt(math.fsum((w * (km.std_errs @ w)) ** 2)) if km.source == "monte-carlo" else 0.0
    flags = []
    if not ok:
        flags.append("not-converged")
    if cfg is not None and km.n_truncated > 1e-3 * cfg.n_walks * m:
        flags.append("truncation")
    if not V > 0:
        raise ValueError(f"non-positive Green energy {V}; refine the discretization")
    return EquilibriumResult(
        energy=V,
        capacity=2.0 * math.pi / V,
        weights=w,
        nodes=disc.boundary_nodes,
        kernel_source=km.source,
        iterations=iters,
        converged=ok,
        std_err=sigma,
        flags=tuple(flags),
    )


def condenser_capacity(
    K,
    domain,
    t: float,
    m: int = 64,
    cfg: WosConfig | None = None,
    kernel: str = "auto",
) -> EquilibriumResult:
    """``Cap(domain - t, K) = 2 pi / V``; the kernel source is recorded on the result."""
    return equilibrium(K, domain, t, m, cfg, kernel)
