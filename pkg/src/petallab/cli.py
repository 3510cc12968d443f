"""Command-line entry point: ``petallab oracle | estimate | sweep | check | report``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import tomli
import tomli_w

from . import __version__, oracles
from .experiments import CHECKS, SweepConfig, SweepReport, SweepRow, Value, Verdict, check, render_report, t_sweep
from .fekete import make_metric, n_diameter
from .hypgeom import distance_lower_bound, green_upper_bound, hyp_area, hyp_density, quasi_density
from .energy import condenser_capacity
from .wos import WosConfig, green_mc, harmonic_measure_mc, hyp_distance_mc

__all__ = ["RunConfig", "load_config", "run", "main", "EXIT_USAGE", "EXIT_CONFIG", "EXIT_FAIL", "EXIT_INCONCLUSIVE"]

EXIT_OK = 0
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64
EXIT_CONFIG = 65
EXIT_IO = 74
SEED_ENV = "PETALLAB_SEED"
FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    sweep: SweepConfig
    out: str = "report"
    formats: tuple = FORMATS
    seed_source: str = field(default="default", compare=False)

    def to_dict(self) -> dict:
        d = self.sweep.to_dict()
        d["out"] = self.out
        d["formats"] = list(self.formats)
        return d

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())


def _parse_formats(formats) -> tuple:
    formats = tuple(formats)
    bad = [f for f in formats if f not in FORMATS]
    if bad or not formats:
        raise ConfigError(f"formats must be a nonempty subset of {FORMATS}, got {list(formats)}")
    return formats


def _resolve_seed(raw: dict, cli_seed: int | None) -> tuple[int, str]:
    if cli_seed is not None:
        return cli_seed, "cli"
    if "seed" in raw.get("wos", {}):
        return int(raw["wos"]["seed"]), "config"
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env), "env"
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0, "default"


def config_from_dict(raw: dict, seed: int | None = None) -> RunConfig:
    raw = dict(raw)
    out = raw.pop("out", "report")
    formats = _parse_formats(raw.pop("formats", FORMATS))
    if not isinstance(out, str):
        raise ConfigError("out must be a string path")
    value, source = _resolve_seed(raw, seed)
    raw["wos"] = {**raw.get("wos", {}), "seed": value}
    try:
        sweep = SweepConfig.from_dict(raw)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(sweep, out, formats, source)


def load_config(path, seed: int | None = None) -> RunConfig:
    """Parse a TOML run configuration; ``seed`` (from the command line) wins over the file."""
    try:
        raw = tomli.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    return config_from_dict(raw, seed)


def _complex_arg(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}") from None
    if len(parts) == 1:
        return complex(parts[0])
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected re,im but got {text!r}")
    return complex(parts[0], parts[1])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="petallab", description="Potential theory along backward orbits of Koenigs domains.")
    p.add_argument("--version", action="version", version=f"petallab {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    o = sub.add_parser("oracle", help="closed-form values")
    osub = o.add_subparsers(dest="what", parser_class=_Parser)
    osub.required = True
    for name in ("disk-metrics", "halfplane-metrics", "strip-metrics"):
        q = osub.add_parser(name)
        q.add_argument("--z", type=_complex_arg, required=True)
        q.add_argument("--w", type=_complex_arg, required=True)
        if name != "disk-metrics":
            q.add_argument("--y0", type=float, default=0.0)
        if name == "strip-metrics":
            q.add_argument("--y1", type=float, required=True)
    q = osub.add_parser("strip-harmonic")
    q.add_argument("--z", type=_complex_arg, required=True)
    q.add_argument("--y0", type=float, required=True)
    q.add_argument("--y1", type=float, required=True)
    q.add_argument("--side", choices=("upper", "lower"), default="upper")
    q = osub.add_parser("disk-concentric")
    q.add_argument("--z-abs", type=float, required=True)
    q.add_argument("--r", type=float, required=True)
    q = osub.add_parser("segment-measure")
    q.add_argument("--z", type=_complex_arg, required=True)
    q.add_argument("--a", type=float, required=True)
    q.add_argument("--b", type=float, required=True)

    e = sub.add_parser("estimate", help="single estimates from a run config")
    e.add_argument("what", choices=("harmonic-measure", "green", "density", "distance", "hyp-area", "bounds",
                                     "n-diameter", "capacity"))
    e.add_argument("--config", required=True)
    e.add_argument("--t", type=float, default=0.0)
    e.add_argument("--walks", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--n", type=int, default=4)
    e.add_argument("--metric", choices=("hyp", "hyperbolic", "euclidean", "bound"), default="hyp")
    e.add_argument("--m", type=int)

    s = sub.add_parser("sweep", help="run a t-sweep and write report files")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--seed", type=int)
    s.add_argument("--format", help="comma-separated subset of csv,json,svg")
    s.add_argument("--emit-config", metavar="PATH", help="write the effective config to PATH and exit")

    c = sub.add_parser("check", help="run a theorem check")
    c.add_argument("--name", required=True, choices=CHECKS)
    c.add_argument("--config")
    c.add_argument("--out")
    c.add_argument("--seed", type=int)
    c.add_argument("--format", help="comma-separated subset of csv,json,svg")

    r = sub.add_parser("report", help="re-render a saved report.json")
    r.add_argument("--input", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--format", default="csv,json,svg")
    return p


def _dump(obj) -> None:
    print(json.dumps(_clean(obj), sort_keys=True))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _cmd_oracle(a) -> int:
    if a.what == "disk-metrics":
        m = oracles.disk_metrics(a.z, a.w)
    elif a.what == "halfplane-metrics":
        m = oracles.halfplane_metrics(a.z, a.w, a.y0)
    elif a.what == "strip-metrics":
        m = oracles.strip_metrics(a.z, a.w, a.y0, a.y1)
    elif a.what == "strip-harmonic":
        _dump({"harmonic_measure": oracles.strip_harmonic_measure(a.z, a.y0, a.y1, a.side)})
        return EXIT_OK
    elif a.what == "disk-concentric":
        om, cap = oracles.disk_concentric(a.z_abs, a.r)
        _dump({"harmonic_measure": om, "capacity": cap})
        return EXIT_OK
    else:
        _dump({"harmonic_measure": oracles.halfplane_segment_measure(a.z, a.a, a.b)})
        return EXIT_OK
    _dump({"density": m.density, "distance": m.distance, "green": m.green})
    return EXIT_OK


def _cmd_estimate(a) -> int:
    rc = load_config(a.config, a.seed)
    sc = rc.sweep
    key = {"harmonic-measure": "harmonic", "green": "green", "distance": "green", "density": "density",
           "hyp-area": "area", "n-diameter": "n_diameter", "capacity": "capacity"}.get(a.what)
    cfg = sc.walks_for(key) if key else sc.wos
    if a.walks is not None:
        cfg = cfg.with_walks(a.walks)
    D, K, z, t = sc.domain, sc.K, sc.probes[0], a.t
    if a.what in ("green", "distance", "bounds") and sc.w is None:
        raise ConfigError(f"estimate {a.what} needs w in the config")
    if a.what == "harmonic-measure":
        _dump(harmonic_measure_mc(z, K, D, t, cfg).to_dict())
    elif a.what == "green":
        _dump(green_mc(z, sc.w, D, t, cfg).to_dict())
    elif a.what == "distance":
        _dump(hyp_distance_mc(z, sc.w, D, t, cfg).to_dict())
    elif a.what == "density":
        dens = hyp_density(sc.probes, D, t, cfg, kernel=sc.kernel)
        for p, lam, se in zip(sc.probes, dens.values, dens.std_errs):
            _dump({"point": p, "value": float(lam), "std_err": float(se), "source": dens.source,
                   "n_samples": cfg.n_walks if dens.source == "monte-carlo" else 0, "seed": cfg.seed})
    elif a.what == "hyp-area":
        _dump(hyp_area(K, D, t, cfg, m=a.m or sc.m, kernel=sc.kernel).to_dict())
    elif a.what == "bounds":
        _dump({
            "quasi_density": quasi_density(z, D, t),
            "density_lower_bound": 0.25 * quasi_density(z, D, t),
            "distance_lower_bound": distance_lower_bound(z, sc.w, D, t),
            "green_upper_bound": green_upper_bound(z, sc.w, D, t),
        })
    elif a.what == "n-diameter":
        metric = make_metric("euclidean" if a.metric == "euclidean" else a.metric, D, t, cfg)
        _dump(n_diameter(K, a.n, metric, cfg, m=a.m or sc.fekete_m).to_dict())
    else:
        _dump(condenser_capacity(K, D, t, a.m or sc.m, cfg, sc.kernel).to_dict())
    return EXIT_OK


def _formats(text: str | None, default) -> tuple:
    if text is None:
        return tuple(default)
    return _parse_formats([f.strip() for f in text.split(",") if f.strip()])


def _cmd_sweep(a) -> int:
    rc = load_config(a.config, a.seed)
    rc = RunConfig(rc.sweep, a.out or rc.out, _formats(a.format, rc.formats), rc.seed_source)
    if a.emit_config:
        path = Path(a.emit_config)
        try:
            path.write_text(rc.to_toml(), encoding="utf-8")
        except OSError as exc:
            raise OSError(f"failed to write {path}: {exc}") from exc
        print(f"wrote {path}")
        return EXIT_OK
    report = t_sweep(rc.sweep)
    paths = render_report(report, rc.formats, rc.out)
    print(f"sweep: {len(report.rows)} rows, {len(report.quantity_names())} quantities -> "
          + ", ".join(str(p) for p in paths))
    return EXIT_OK


def _cmd_check(a) -> int:
    if a.name in ("SM-H", "SM-G"):
        out, formats = a.out or "report", _formats(a.format, FORMATS)
        verdict, report = check(a.name)
    else:
        if not a.config:
            raise UsageError(f"check {a.name} needs --config")
        rc = load_config(a.config, a.seed)
        out, formats = a.out or rc.out, _formats(a.format, rc.formats)
        try:
            verdict, report = check(a.name, rc.sweep)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    render_report(report, formats, out)
    print(f"{verdict.name}: {verdict.status} (margin {verdict.margin:.6g})")
    return {"pass": EXIT_OK, "fail": EXIT_FAIL}.get(verdict.status, EXIT_INCONCLUSIVE)


def _value(d) -> Value:
    return Value(_num(d["value"]), _num(d["std_err"]), tuple(d["flags"]), d["source"])


def _num(x) -> float:
    # report.json spells non-finite floats as "inf", "-inf" and "nan"
    return float(x)


def report_from_dict(d: dict) -> SweepReport:
    order = {k: i for i, k in enumerate(d.get("quantities", []))}

    def ordered(values: dict) -> dict:
        keys = sorted(values, key=lambda k: (order.get(k, len(order)), k))
        return {k: _value(values[k]) for k in keys}

    rows = [SweepRow(r["t"], ordered(r["values"])) for r in d["rows"]]
    refs = {k: (_value(v) if v is not None else None) for k, v in d["references"].items()}
    verdicts = [Verdict(v["name"], v["status"], _num(v["margin"]), tuple(v["rows"]), tuple(v["details"]))
                for v in d["verdicts"]]
    return SweepReport(d["config"], rows, refs, verdicts, d["provenance"])


def _cmd_report(a) -> int:
    try:
        d = json.loads(Path(a.input).read_text(encoding="utf-8"))
        report = report_from_dict(d)
    except OSError as exc:
        raise OSError(f"cannot read {a.input}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{a.input} is not a petallab report: {exc}") from None
    paths = render_report(report, _formats(a.format, FORMATS), a.out)
    print("report: " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def run(argv=None) -> int:
    """Parse ``argv`` and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"oracle": _cmd_oracle, "estimate": _cmd_estimate, "sweep": _cmd_sweep,
                   "check": _cmd_check, "report": _cmd_report}[args.command]
        return handler(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"petallab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"petallab: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"petallab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())
