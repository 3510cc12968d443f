"""t-sweeps over backward orbits and the theorem checkers.

A sweep evaluates the requested quantities in ``domain - t`` for each ``t``
of a decreasing grid starting at 0, and computes reference values once in the
selected petal (closed forms where they exist).  Every row at every ``t``
reuses the same seed, so rows are driven by common random numbers and trends
are much smoother than independent sampling would give.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__, oracles
from .compacts import CompactSet
from .domains import ExpCusp, SlitHalfPlane, SlitStrip, UpperHalfPlane, domain_from_config, translate
from .energy import condenser_capacity, minimize_on_simplex
from .fekete import BoundMetric, HyperbolicMetric, n_diameter
from .hypgeom import distance_lower_bound, green_upper_bound, green_upper_bound_array, hyp_area, hyp_density
from .wos import WosConfig, green_mc, green_rows, harmonic_measure_mc

__all__ = [
    "QUANTITIES",
    "CHECKS",
    "SweepConfig",
    "Value",
    "SweepRow",
    "Verdict",
    "SweepReport",
    "t_sweep",
    "petal_references",
    "check",
    "strong_markov_harmonic",
    "strong_markov_green",
    "render_report",
]

QUANTITIES = (
    "harmonic",
    "density",
    "distance",
    "green",
    "area",
    "n_diameter",
    "capacity",
    "density_bound",
    "distance_bound",
    "green_bound",
    "capacity_bound",
)
WALK_KEYS = ("harmonic", "density", "green", "area", "n_diameter", "capacity", "minda")
_NEEDS_W = {"distance", "green", "distance_bound", "green_bound"}

CHECKS = ("T1", "T2", "T3", "T4", "T5", "T6", "T7", "SM-H", "SM-G", "MINDA")
_CHECK_QUANTITIES = {
    "T1": ("harmonic",),
    "T2": ("harmonic",),
    "T3": ("density",),
    "T4": ("n_diameter",),
    "T5": ("area", "n_diameter"),
    "T6": ("capacity",),
    "T7": ("harmonic", "density_bound", "distance_bound", "green_bound", "area", "n_diameter", "capacity_bound"),
    "MINDA": ("density",),
}

TREND_SIGMA = 2.0
LIMIT_SIGMA = 3.0
EXACT_TOL = 1e-9
MINDA_SAMPLES = 64


def _pt(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _cpx(v, what: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if len(v) != 2:
        raise ValueError(f"{what} must be [re, im], got {v!r}")
    return complex(float(v[0]), float(v[1]))


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs.

    ``probes[0]`` is the base point ``z``; ``w`` is the second point for
    distance and Green quantities.  ``walks`` overrides ``wos.n_walks`` per
    quantity group (keys in ``WALK_KEYS``).
    """

    domain: object
    K: CompactSet
    probes: tuple
    t_grid: tuple
    quantities: tuple
    wos: WosConfig = field(default_factory=WosConfig)
    petal: int = 0
    w: complex | None = None
    m: int = 64
    n: int = 4
    fekete_m: int = 32
    walks: dict = field(default_factory=dict)
    kernel: str = "auto"
    metric: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "probes", tuple(complex(p) for p in self.probes))
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        object.__setattr__(self, "quantities", tuple(self.quantities))
        if self.w is not None:
            object.__setattr__(self, "w", complex(self.w))
        if not self.quantities:
            raise ValueError("quantities must be nonempty")
        bad = [q for q in self.quantities if q not in QUANTITIES]
        if bad:
            raise ValueError(f"unknown quantities {bad}; expected a subset of {QUANTITIES}")
        if len(set(self.quantities)) != len(self.quantities):
            raise ValueError("quantities must not repeat")
        if not self.t_grid or self.t_grid[0] != 0.0:
            raise ValueError("t_grid must start at 0")
        if any(b >= a for a, b in zip(self.t_grid[:-1], self.t_grid[1:])):
            raise ValueError("t_grid must be strictly decreasing")
        if not all(math.isfinite(t) for t in self.t_grid):
            raise ValueError("t_grid values must be finite")
        if not self.probes:
            raise ValueError("at least one probe point is required")
        if set(self.quantities) & _NEEDS_W and self.w is None:
            raise ValueError("distance and Green quantities need the second probe w")
        if self.w is not None and self.w == self.probes[0]:
            raise ValueError("w must differ from the first probe")
        for key, val in self.walks.items():
            if key not in WALK_KEYS:
                raise ValueError(f"unknown walks key {key!r}; expected one of {WALK_KEYS}")
            if int(val) < 100:
                raise ValueError(f"walks.{key} must be at least 100")
        if self.m < 16:
            raise ValueError("m must be at least 16")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.fekete_m < 8:
            raise ValueError("fekete_m must be at least 8")
        if self.kernel not in ("auto", "oracle", "monte-carlo"):
            raise ValueError(f"kernel must be auto, oracle or monte-carlo, got {self.kernel!r}")
        if self.metric not in ("auto", "hyperbolic", "bound"):
            raise ValueError(f"metric must be auto, hyperbolic or bound, got {self.metric!r}")
        petals = self.domain.petals()
        if not 0 <= self.petal < len(petals):
            raise ValueError(f"petal index {self.petal} out of range (domain has {len(petals)})")
        pet = petals[self.petal]
        pts = list(self.probes) + ([self.w] if self.w is not None else [])
        if not np.all(pet.contains(np.array(pts))):
            raise ValueError("probe points must lie strictly inside the petal")
        self.K.check_inside(self.domain, pet)

    @property
    def petal_obj(self):
        return self.domain.petals()[self.petal]

    @property
    def degenerate(self) -> bool:
        return self.petal_obj.kind == "degenerate-line"

    def walks_for(self, key: str) -> WosConfig:
        return self.wos.with_walks(self.walks.get(key))

    def resolved_metric(self) -> str:
        if self.metric != "auto":
            return self.metric
        return "bound" if self.degenerate else "hyperbolic"

    def replace(self, **changes) -> "SweepConfig":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(changes)
        return SweepConfig(**d)

    def to_dict(self) -> dict:
        d = {
            "domain": self.domain.to_config(),
            "petal": self.petal,
            "K": self.K.to_config(),
            "probes": [_pt(p) for p in self.probes],
            "t_grid": list(self.t_grid),
            "quantities": list(self.quantities),
            "m": self.m,
            "n": self.n,
            "fekete_m": self.fekete_m,
            "kernel": self.kernel,
            "metric": self.metric,
            "wos": {
                "epsilon_shell": self.wos.epsilon_shell,
                "max_steps": self.wos.max_steps,
                "n_walks": self.wos.n_walks,
                "seed": self.wos.seed,
            },
            "walks": {k: int(self.walks[k]) for k in sorted(self.walks)},
        }
        if self.w is not None:
            d["w"] = _pt(self.w)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        allowed = {"domain", "petal", "K", "probes", "w", "t_grid", "quantities", "m", "n", "fekete_m",
                   "kernel", "metric", "wos", "walks"}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        for key in ("domain", "K", "probes", "t_grid", "quantities"):
            if key not in d:
                raise ValueError(f"missing config key {key!r}")
        wos = dict(d.get("wos", {}))
        extra = set(wos) - {"epsilon_shell", "max_steps", "n_walks", "seed"}
        if extra:
            raise ValueError(f"unknown wos keys: {sorted(extra)}")
        kextra = set(d["K"]) - {"disks", "polylines"}
        if kextra:
            raise ValueError(f"unknown K keys: {sorted(kextra)}")
        return cls(
            domain=domain_from_config(d["domain"]),
            K=CompactSet.from_config(d["K"]),
            probes=tuple(_cpx(p, "probe") for p in d["probes"]),
            t_grid=tuple(float(t) for t in d["t_grid"]),
            quantities=tuple(d["quantities"]),
            wos=WosConfig(
                epsilon_shell=float(wos.get("epsilon_shell", 1e-3)),
                max_steps=int(wos.get("max_steps", 10_000)),
                n_walks=int(wos.get("n_walks", 100_000)),
                seed=int(wos.get("seed", 0)),
            ),
            petal=int(d.get("petal", 0)),
            w=_cpx(d["w"], "w") if "w" in d else None,
            m=int(d.get("m", 64)),
            n=int(d.get("n", 4)),
            fekete_m=int(d.get("fekete_m", 32)),
            walks={k: int(v) for k, v in d.get("walks", {}).items()},
            kernel=d.get("kernel", "auto"),
            metric=d.get("metric", "auto"),
        )


@dataclass(frozen=True)
class Value:
    value: float
    std_err: float = 0.0
    flags: tuple = ()
    source: str = "exact"

    @property
    def exact(self) -> bool:
        return self.source != "monte-carlo"

    def to_dict(self) -> dict:
        return {"value": _num(self.value), "std_err": _num(self.std_err), "flags": list(self.flags), "source": self.source}


@dataclass(frozen=True)
class SweepRow:
    t: float
    values: dict

    def to_dict(self) -> dict:
        return {"t": self.t, "values": {k: v.to_dict() for k, v in self.values.items()}}


@dataclass(frozen=True)
class Verdict:
    name: str
    status: str
    margin: float
    rows: tuple
    details: tuple = ()

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "margin": _num(self.margin),
            "rows": list(self.rows),
            "details": [dict(d) for d in self.details],
        }


@dataclass
class SweepReport:
    config: dict
    rows: list
    references: dict
    verdicts: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def quantity_names(self) -> list[str]:
        names: list[str] = []
        for row in self.rows:
            for k in row.values:
                if k not in names:
                    names.append(k)
        return names

    def series(self, name: str):
        """``(t, values, std_errs, rows)`` for rows that report ``name``."""
        rows = [r for r in self.rows if name in r.values]
        return (
            np.array([r.t for r in rows]),
            np.array([r.values[name].value for r in rows]),
            np.array([r.values[name].std_err for r in rows]),
            [r.values[name] for r in rows],
        )

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            # JSON keys are sorted on write; this keeps the column order
            "quantities": self.quantity_names(),
            "rows": [r.to_dict() for r in self.rows],
            "references": {k: (v.to_dict() if v is not None else None) for k, v in self.references.items()},
            "verdicts": [v.to_dict() for v in self.verdicts],
            "provenance": self.provenance,
        }


def _num(x):
    """JSON-safe float: infinities and NaN become strings."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _provenance(seed: int) -> dict:
    return {
        "seed": seed,
        "versions": {"petallab": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }


# ---------------------------------------------------------------- quantities


def _use_oracle(cfg: SweepConfig, domain) -> bool:
    if cfg.kernel == "monte-carlo":
        return False
    if cfg.kernel == "oracle" and not oracles.has_oracle(domain):
        raise ValueError(f"kernel='oracle' but {domain!r} has no closed form")
    return oracles.has_oracle(domain)


def _green_value(cfg: SweepConfig, domain, t: float) -> tuple[Value, Value]:
    z, w = cfg.probes[0], cfg.w
    if _use_oracle(cfg, domain):
        g = float(oracles.green(translate(domain, t), z, w))
        return Value(g, 0.0, (), "oracle"), Value(float(oracles.distance_from_green(g)), 0.0, (), "oracle")
    e = green_mc(z, w, domain, t, cfg.walks_for("green"))
    if e.value <= 0:
        d = Value(math.inf, math.inf, e.flags + ("nonpositive-green",), "monte-carlo")
    else:
        d = Value(float(oracles.distance_from_green(e.value)), e.std_err / (2.0 * math.sinh(e.value)), e.flags, "monte-carlo")
    return Value(e.value, e.std_err, e.flags, "monte-carlo"), d


def _capacity_bound(K, domain, t: float, m: int) -> float:
    """``2 pi / min_w w^T G_ub w`` with the Green upper bound as kernel: a lower bound for the capacity."""
    disc = K.discretize(m)
    x = disc.boundary_nodes
    G = green_upper_bound_array(x[:, None], x[None, :], domain, t)
    offs = x + 0.25 * disc.boundary_weights * disc.normals
    np.fill_diagonal(G, green_upper_bound_array(x, offs, domain, t))
    _, V, _, _ = minimize_on_simplex(G)
    return 2.0 * math.pi / V


def _metric(cfg: SweepConfig, domain, t: float):
    if cfg.resolved_metric() == "bound":
        return BoundMetric(domain, t)
    kernel = "oracle" if _use_oracle(cfg, domain) else "monte-carlo"
    return HyperbolicMetric(domain, t, cfg.walks_for("n_diameter"), kernel)


def _row(cfg: SweepConfig, t: float) -> SweepRow:
    D, K = cfg.domain, cfg.K
    z = cfg.probes[0]
    vals: dict[str, Value] = {}
    for q in cfg.quantities:
        if q == "harmonic":
            e = harmonic_measure_mc(z, K, D, t, cfg.walks_for("harmonic"))
            vals[q] = Value(e.value, e.std_err, e.flags, "monte-carlo")
        elif q == "density":
            kernel = "oracle" if _use_oracle(cfg, D) else "monte-carlo"
            dens = hyp_density(cfg.probes, D, t, cfg.walks_for("density"), kernel=kernel)
            flags = ("truncation",) if dens.n_truncated > 1e-3 * cfg.walks_for("density").n_walks * len(cfg.probes) else ()
            for k, (lam, se) in enumerate(zip(dens.values, dens.std_errs)):
                vals[f"density[{k}]"] = Value(float(lam), float(se), flags, dens.source)
        elif q in ("green", "distance"):
            if "green" not in vals:
                vals["green"], vals["distance"] = _green_value(cfg, D, t)
        elif q == "area":
            kernel = "oracle" if _use_oracle(cfg, D) else "monte-carlo"
            a = hyp_area(K, D, t, cfg.walks_for("area"), m=cfg.m, kernel=kernel)
            vals[q] = Value(a.value, a.std_err, a.flags, a.source if K.area > 0 else "exact")
        elif q == "n_diameter":
            metric = _metric(cfg, D, t)
            r = n_diameter(K, cfg.n, metric, cfg.walks_for("n_diameter"), m=cfg.fekete_m, polish=False)
            src = "monte-carlo" if not metric.exact else ("bound" if metric.name == "bound" else "oracle")
            vals[q] = Value(r.diameter, r.std_err, r.flags, src)
        elif q == "capacity":
            kernel = "oracle" if _use_oracle(cfg, D) else "monte-carlo"
            r = condenser_capacity(K, D, t, cfg.m, cfg.walks_for("capacity"), kernel)
            vals[q] = Value(r.capacity, r.capacity_std_err, r.flags, r.kernel_source)
        elif q == "density_bound":
            delta = float(translate(D, t).distance(z))
            vals[q] = Value(1.0 / (4.0 * delta), 0.0, (), "bound")
        elif q == "distance_bound":
            vals[q] = Value(distance_lower_bound(z, cfg.w, D, t), 0.0, (), "bound")
        elif q == "green_bound":
            vals[q] = Value(green_upper_bound(z, cfg.w, D, t), 0.0, (), "bound")
        elif q == "capacity_bound":
            vals[q] = Value(_capacity_bound(K, D, t, cfg.m), 0.0, (), "bound")
    # keep the documented order for green/distance pairs
    return SweepRow(t, {k: vals[k] for k in _ordered_keys(cfg, vals)})


def _ordered_keys(cfg: SweepConfig, vals: dict) -> list[str]:
    keys = []
    for q in cfg.quantities:
        if q == "density":
            keys += [k for k in vals if k.startswith("density[")]
        else:
            keys.append(q)
    return keys


def petal_references(cfg: SweepConfig) -> dict:
    """Reference (t -> -infinity) values from the petal, keyed like the row values."""
    refs: dict[str, Value | None] = {}
    pet = cfg.petal_obj
    region = pet.region()
    z, K = cfg.probes[0], cfg.K
    for q in cfg.quantities:
        if region is None:
            limit = {"harmonic": 0.0, "green": 0.0, "green_bound": 0.0, "area": 0.0, "n_diameter": 1.0}
            if q == "density":
                for k in range(len(cfg.probes)):
                    refs[f"density[{k}]"] = None
            else:
                refs[q] = Value(limit[q], 0.0, (), "limit") if q in limit else None
            continue
        if q == "harmonic":
            e = harmonic_measure_mc(z, K, region, 0.0, cfg.walks_for("harmonic"))
            refs[q] = Value(e.value, e.std_err, e.flags, "monte-carlo")
        elif q == "density":
            lam = oracles.density(region, np.array(cfg.probes))
            for k, v in enumerate(np.atleast_1d(lam)):
                refs[f"density[{k}]"] = Value(float(v), 0.0, (), "oracle")
        elif q in ("green", "distance"):
            g = float(oracles.green(region, z, cfg.w))
            refs["green"] = Value(g, 0.0, (), "oracle")
            refs["distance"] = Value(float(oracles.distance_from_green(g)), 0.0, (), "oracle")
        elif q == "area":
            refs[q] = Value(hyp_area(K, region, 0.0, m=cfg.m).value, 0.0, (), "oracle")
        elif q == "n_diameter":
            r = n_diameter(K, cfg.n, HyperbolicMetric(region, 0.0), m=cfg.fekete_m, polish=False)
            refs[q] = Value(r.diameter, 0.0, r.flags, "oracle")
        elif q == "capacity":
            refs[q] = Value(condenser_capacity(K, region, 0.0, cfg.m).capacity, 0.0, (), "oracle")
        else:
            refs[q] = None
    return refs


def t_sweep(cfg: SweepConfig) -> SweepReport:
    """Evaluate every requested quantity at every ``t`` of the grid."""
    rows = [_row(cfg, t) for t in cfg.t_grid]
    return SweepReport(
        config=cfg.to_dict(),
        rows=rows,
        references=petal_references(cfg),
        provenance=_provenance(cfg.wos.seed),
    )


# ------------------------------------------------------------------ checkers


def _status(ok: bool, involved) -> str:
    if ok:
        return "pass"
    for v in involved:
        if v is None or any(f in ("truncation", "nonpositive-green", "clamped") for f in v.flags):
            return "inconclusive"
        if not math.isfinite(v.value):
            return "inconclusive"
    return "fail"


def _trend(report: SweepReport, name: str, direction: str, check: str) -> Verdict:
    """Adjacent-pair trend test along the t-grid.

    ``direction="down"`` expects values to be nonincreasing as t decreases.
    One pair may violate by more than 2 sigma before the check fails.
    """
    t, v, se, vals = report.series(name)
    details, violations, margins = [], 0, []
    for k in range(len(t) - 1):
        exact = vals[k].exact and vals[k + 1].exact
        tol = EXACT_TOL if exact else TREND_SIGMA * math.hypot(se[k], se[k + 1])
        step = v[k + 1] - v[k] if direction == "down" else v[k] - v[k + 1]
        margin = tol - step
        bad = margin < 0
        violations += bad
        margins.append(margin)
        details.append({"t0": float(t[k]), "t1": float(t[k + 1]), "delta": float(v[k + 1] - v[k]),
                        "tolerance": float(tol), "margin": float(margin), "violation": bool(bad)})
    ok = violations <= 1
    margin = min(margins) if margins else 0.0
    return Verdict(check, _status(ok, vals), margin, tuple(float(x) for x in t), tuple(details))


def _last_vs_ref(report: SweepReport, name: str, rel: float, sigma: float = 0.0):
    t, v, se, vals = report.series(name)
    ref = report.references.get(name)
    last = vals[-1]
    if ref is None:
        raise ValueError(f"no reference value for {name}")
    tol = max(sigma * math.hypot(last.std_err, ref.std_err), rel * abs(ref.value))
    diff = last.value - ref.value
    detail = {"quantity": name, "t": float(t[-1]), "value": float(last.value), "reference": float(ref.value),
              "diff": float(diff), "tolerance": float(tol), "margin": float(tol - abs(diff))}
    return abs(diff) <= tol, tol - abs(diff), detail, [last, ref]


def _limit_check(report: SweepReport, check: str, items) -> Verdict:
    ok_all, margins, details, involved = True, [], [], []
    for name, rel, sigma in items:
        ok, margin, detail, inv = _last_vs_ref(report, name, rel, sigma)
        ok_all &= ok
        margins.append(margin / max(detail["tolerance"], 1e-300))
        details.append(detail)
        involved += inv
    t_last = report.rows[-1].t
    return Verdict(check, _status(ok_all, involved), min(margins), (t_last,), tuple(details))


def _check_t2(report: SweepReport) -> Verdict:
    base = _limit_check(report, "T2", [("harmonic", 0.02, LIMIT_SIGMA)])
    ref = report.references["harmonic"]
    t, v, se, vals = report.series("harmonic")
    # monotone approach from above: every row stays above the petal value
    floor = [float(v[k] - (ref.value - LIMIT_SIGMA * math.hypot(se[k], ref.std_err))) for k in range(len(t))]
    ok = base.passed and min(floor) >= 0
    details = base.details + ({"quantity": "harmonic", "check": "bounded-below", "min_margin": min(floor)},)
    return Verdict("T2", _status(ok, vals + [ref]), min(base.margin, min(floor)), tuple(float(x) for x in t), details)


def _check_t3(report: SweepReport) -> Verdict:
    names = [k for k in report.references if k.startswith("density[")]
    return _limit_check(report, "T3", [(k, 0.02, 0.0) for k in names])


def _check_t5(report: SweepReport) -> Verdict:
    return _limit_check(report, "T5", [("area", 0.03, 0.0), ("n_diameter", 0.02, LIMIT_SIGMA)])


def _check_t6(report: SweepReport) -> Verdict:
    base = _limit_check(report, "T6", [("capacity", 0.05, 0.0)])
    ref = report.references["capacity"]
    t, v, se, vals = report.series("capacity")
    ceiling = [float(ref.value + max(LIMIT_SIGMA * se[k], 0.02 * ref.value) - v[k]) for k in range(len(t))]
    ok = base.passed and min(ceiling) >= 0
    details = base.details + ({"quantity": "capacity", "check": "bounded-above", "min_margin": min(ceiling)},)
    return Verdict("T6", _status(ok, vals), min(base.margin, min(ceiling)), tuple(float(x) for x in t), details)


def _check_t7(report: SweepReport) -> Verdict:
    t, h, h_se, h_vals = report.series("harmonic")
    items = []

    def item(label, ok, margin, **info):
        items.append({"item": label, "ok": bool(ok), "margin": float(margin), **info})

    trend = _trend(report, "harmonic", "down", "T7")
    last = h_vals[-1]
    item("i", trend.passed and last.value <= 0.05, 0.05 - last.value, value=float(last.value), std_err=float(last.std_err))
    _, db, _, _ = report.series("density_bound")
    item("ii", db[-1] >= 10.0 * db[0], db[-1] / db[0] - 10.0, ratio=float(db[-1] / db[0]))
    _, dist, _, _ = report.series("distance_bound")
    item("iii", dist[-1] > 3.0, dist[-1] - 3.0, value=float(dist[-1]))
    _, gb, _, _ = report.series("green_bound")
    item("iv", gb[-1] < 0.05, 0.05 - gb[-1], value=float(gb[-1]))
    _, area, _, _ = report.series("area")
    item("v", bool(np.all(area == 0.0)), 0.0 - float(np.max(np.abs(area))), max_abs=float(np.max(np.abs(area))))
    _, dn, _, _ = report.series("n_diameter")
    item("vi", abs(1.0 - dn[-1]) <= 0.05, 0.05 - abs(1.0 - dn[-1]), value=float(dn[-1]))
    _, cb, _, _ = report.series("capacity_bound")
    item("vii", cb[-1] >= 10.0 * cb[0], cb[-1] / cb[0] - 10.0, ratio=float(cb[-1] / cb[0]))
    ok = all(d["ok"] for d in items)
    return Verdict("T7", _status(ok, h_vals), min(d["margin"] for d in items), tuple(float(x) for x in t), tuple(items))


def _slit_lines(domain, petal):
    """``(y, x)`` for each petal edge that continues a slit, i.e. meets the domain interior."""
    if not isinstance(domain, (SlitStrip, SlitHalfPlane)):
        raise ValueError("MINDA needs a slit domain")
    return [(y, x) for y, x in domain.slits if y in (petal.y0, petal.y1)]


def _minda(cfg: SweepConfig, report: SweepReport) -> Verdict:
    lines = _slit_lines(cfg.domain, cfg.petal_obj)
    if not lines:
        raise ValueError("the selected petal has no edge inside the domain")
    s = np.geomspace(0.02, 40.0, MINDA_SAMPLES)
    wcfg = cfg.walks_for("minda")
    details, involved, ok_all, margins = [], [], True, []
    for row in report.rows:
        t = row.t
        zetas = np.concatenate([x - t + s + 1j * y for y, x in lines])
        mean, _, _ = green_rows(np.array(cfg.probes), zetas, cfg.domain, t, wcfg, salt=23)
        for k, p in enumerate(cfg.probes):
            g = np.maximum(mean[k] - np.log(np.abs(p - zetas)), 0.0)
            R = float(np.min(oracles.distance_from_green(g)))
            lam = row.values[f"density[{k}]"]
            ref = report.references[f"density[{k}]"]
            ratio = ref.value / lam.value
            sr = ratio * lam.std_err / lam.value
            upper = 1.0 + 2.0 / math.expm1(R) if R > 0 else math.inf
            lo_m = ratio - (1.0 - LIMIT_SIGMA * sr)
            hi_m = upper + LIMIT_SIGMA * sr - ratio
            ok = lo_m >= 0 and hi_m >= 0
            ok_all &= ok
            margins.append(min(lo_m, hi_m))
            involved.append(lam)
            row.values[f"minda_ratio[{k}]"] = Value(ratio, sr, (), "monte-carlo")
            row.values[f"minda_bound[{k}]"] = Value(upper, 0.0, (), "monte-carlo")
            details.append({"t": t, "probe": k, "ratio": float(ratio), "upper": float(upper), "R": R, "ok": bool(ok)})
    return Verdict("MINDA", _status(ok_all, involved), min(margins), tuple(r.t for r in report.rows), tuple(details))


def strong_markov_harmonic(z: complex = 0.3 + 0.5j, n_nodes: int = 200, half_width: float = 15.0):
    """Both sides of the harmonic-measure identity for H, S = {0 < Im < 1}, E = [-1, 1].

    Returns ``(lhs, rhs, residual)``; the integral over ``A = {Im = 1}`` is
    truncated to ``Re z +- half_width`` and evaluated with ``n_nodes`` nodes.
    """
    z = complex(z)
    if not 0 < z.imag < 1:
        raise ValueError("z must lie in the strip 0 < Im z < 1")
    lhs = oracles.halfplane_segment_measure(z, -1.0, 1.0)
    zeta = np.exp(math.pi * z)
    direct = oracles.halfplane_segment_measure(zeta, math.exp(-math.pi), math.exp(math.pi))
    x, wx = _nodes(z, half_width, n_nodes)
    through = sum(
        wk * oracles.halfplane_segment_measure(complex(xk, 1.0), -1.0, 1.0) * d
        for xk, wk, d in zip(x, wx, _top_density(zeta, x))
    )
    rhs = direct + through
    return lhs, rhs, abs(lhs - rhs)


def strong_markov_green(z: complex = 0.3 + 0.5j, w: complex = -0.2 + 0.3j, n_nodes: int = 200, half_width: float = 15.0):
    """Both sides of the Green identity ``g_H(z, w) = g_S(z, w) + int_A g_H(a, z) omega(w, da, S)``."""
    z, w = complex(z), complex(w)
    if not (0 < z.imag < 1 and 0 < w.imag < 1) or z == w:
        raise ValueError("z and w must be distinct points of the strip 0 < Im < 1")
    lhs = oracles.halfplane_metrics(z, w).green
    gs = oracles.strip_metrics(z, w, 0.0, 1.0).green
    x, wx = _nodes(w, half_width, n_nodes)
    a = x + 1j
    gh = oracles.green(UpperHalfPlane(), a, z)
    through = float(np.sum(wx * gh * _top_density(np.exp(math.pi * w), x)))
    rhs = gs + through
    return lhs, rhs, abs(lhs - rhs)


def _nodes(p: complex, half_width: float, n: int):
    """Gauss-Legendre in ``u`` with ``x = Re p + h sinh(u)``, clustering nodes at the kernel scale ``h``."""
    h = min(1.0, 1.0 - p.imag)
    U = math.asinh(half_width / h)
    u, wu = np.polynomial.legendre.leggauss(n)
    u, wu = U * u, U * wu
    return p.real + h * np.sinh(u), h * np.cosh(u) * wu


def _top_density(zeta: complex, x: np.ndarray) -> np.ndarray:
    """Harmonic-measure density of S = {0 < Im < 1} on its top edge, via zeta = exp(pi z)."""
    e = np.exp(math.pi * x)
    return zeta.imag * e / np.abs(zeta + e) ** 2


def _markov_report(name: str) -> SweepReport:
    lhs, rhs, res = strong_markov_harmonic() if name == "SM-H" else strong_markov_green()
    row = SweepRow(0.0, {"lhs": Value(lhs, 0.0, (), "oracle"), "rhs": Value(rhs, 0.0, (), "oracle"),
                         "residual": Value(res, 0.0, (), "oracle")})
    ok = res <= 1e-3
    verdict = Verdict(name, "pass" if ok else "fail", 1e-3 - res, (0.0,),
                      ({"lhs": lhs, "rhs": rhs, "residual": res, "tolerance": 1e-3},))
    return SweepReport(config={"check": name, "n_nodes": 200}, rows=[row], references={"lhs": None, "rhs": None,
                       "residual": None}, verdicts=[verdict], provenance=_provenance(0))


def check(name: str, cfg: SweepConfig | None = None) -> tuple[Verdict, SweepReport]:
    """Run one theorem check; returns its verdict and the supporting report."""
    if name not in CHECKS:
        raise ValueError(f"unknown check {name!r}; expected one of {CHECKS}")
    if name in ("SM-H", "SM-G"):
        report = _markov_report(name)
        return report.verdicts[0], report
    if cfg is None:
        raise ValueError(f"check {name} needs a sweep configuration")
    if name == "T7":
        if not isinstance(cfg.domain, ExpCusp) or not cfg.degenerate:
            raise ValueError("T7 needs the exp-cusp domain with its degenerate petal selected")
    elif cfg.degenerate:
        raise ValueError(f"{name} needs a strip or half-plane petal")
    cfg = cfg.replace(quantities=_CHECK_QUANTITIES[name])
    report = t_sweep(cfg)
    if name == "T1":
        verdict = _trend(report, "harmonic", "down", "T1")
    elif name == "T2":
        verdict = _check_t2(report)
    elif name == "T3":
        verdict = _check_t3(report)
    elif name == "T4":
        verdict = _trend(report, "n_diameter", "up", "T4")
    elif name == "T5":
        verdict = _check_t5(report)
    elif name == "T6":
        verdict = _check_t6(report)
    elif name == "T7":
        verdict = _check_t7(report)
    else:
        verdict = _minda(cfg, report)
    report.verdicts.append(verdict)
    return verdict, report


# ------------------------------------------------------------------ rendering


def _csv_text(report: SweepReport) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["t", "quantity", "value", "std_err", "flags"])
    for row in report.rows:
        for name, v in row.values.items():
            wr.writerow([repr(float(row.t)), name, repr(float(v.value)), repr(float(v.std_err)), "|".join(v.flags)])
    return buf.getvalue()


def _svg_text(report: SweepReport) -> str:
    names = [n for n in report.quantity_names() if np.all(np.isfinite(report.series(n)[1]))]
    W, H, pad_l, pad_r, pad_t, pad_b = 640, 220, 80, 20, 30, 40
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H * max(len(names), 1)}" '
           f'font-family="sans-serif" font-size="11">']
    for i, name in enumerate(names):
        t, v, _, _ = report.series(name)
        ref = report.references.get(name)
        y0 = i * H
        lo, hi = float(np.min(v)), float(np.max(v))
        if ref is not None and math.isfinite(ref.value):
            lo, hi = min(lo, ref.value), max(hi, ref.value)
        if hi - lo < 1e-12 * max(1.0, abs(hi)):
            lo, hi = lo - 0.5 * max(abs(lo), 1.0) * 1e-3, hi + 0.5 * max(abs(hi), 1.0) * 1e-3
        tmin, tmax = float(np.min(t)), float(np.max(t))
        span = tmax - tmin or 1.0

        def px(tt):
            return pad_l + (tt - tmin) / span * (W - pad_l - pad_r)

        def py(vv):
            return y0 + pad_t + (hi - vv) / (hi - lo) * (H - pad_t - pad_b)

        x_axis = y0 + H - pad_b
        out.append(f'<text x="{pad_l}" y="{y0 + 18}" font-weight="bold">{name}</text>')
        out.append(f'<line x1="{pad_l}" y1="{x_axis}" x2="{W - pad_r}" y2="{x_axis}" stroke="black"/>')
        out.append(f'<line x1="{pad_l}" y1="{y0 + pad_t}" x2="{pad_l}" y2="{x_axis}" stroke="black"/>')
        out.append(f'<text x="{(W + pad_l) // 2}" y="{x_axis + 30}" text-anchor="middle">t</text>')
        out.append(f'<text x="12" y="{y0 + H // 2}" transform="rotate(-90 12 {y0 + H // 2})" '
                   f'text-anchor="middle">value</text>')
        out.append(f'<text x="{pad_l - 4}" y="{py(hi):.2f}" text-anchor="end">{hi:.6g}</text>')
        out.append(f'<text x="{pad_l - 4}" y="{py(lo):.2f}" text-anchor="end">{lo:.6g}</text>')
        out.append(f'<text x="{pad_l}" y="{x_axis + 15}" text-anchor="middle">{tmin:g}</text>')
        out.append(f'<text x="{W - pad_r}" y="{x_axis + 15}" text-anchor="middle">{tmax:g}</text>')
        if ref is not None and math.isfinite(ref.value):
            out.append(f'<line class="reference" x1="{pad_l}" y1="{py(ref.value):.2f}" x2="{W - pad_r}" '
                       f'y2="{py(ref.value):.2f}" stroke="gray" stroke-dasharray="4 3"/>')
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(t, v))
        out.append(f'<polyline data-quantity="{name}" points="{pts}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_report(report: SweepReport, formats=("csv", "json", "svg"), out_dir=".") -> list[Path]:
    """Write ``report.csv`` / ``report.json`` / ``report.svg`` under ``out_dir``."""
    if not report.rows or not report.quantity_names():
        raise ValueError("cannot render an empty report")
    formats = list(formats)
    bad = [f for f in formats if f not in ("csv", "json", "svg")]
    if bad:
        raise ValueError(f"unknown formats {bad}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    writers = {
        "csv": _csv_text,
        "json": lambda r: json.dumps(_jsonable(r.to_dict()), indent=2, sort_keys=True, allow_nan=False) + "\n",
        "svg": _svg_text,
    }
    paths = []
    for fmt in ("csv", "json", "svg"):
        if fmt not in formats:
            continue
        path = out / f"report.{fmt}"
        try:
            path.write_text(writers[fmt](report), encoding="utf-8")
        except OSError as exc:
            raise OSError(f"failed to write {path}: {exc}") from exc
        paths.append(path)
    return paths
