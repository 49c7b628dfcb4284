"""Experiment specs, parameter schemas, run context and the registry."""
from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .fitting import SlopeFit
from .output import RunManifest, prepare_out_dir, write_series, write_fit

__all__ = ["ConfigError", "Param", "Experiment", "ExperimentSpec", "RunContext", "REGISTRY",
           "register", "get_experiment", "run_experiment", "DEFAULT_BUDGET_MIB"]

DEFAULT_BUDGET_MIB = 2048


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, msg: str):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


_KINDS = {"float", "int", "bool", "str", "floats", "ints", "float|str"}


@dataclass(frozen=True)
class Param:
    default: object
    kind: str = "float"
    help: str = ""
    choices: Optional[tuple] = None

    def coerce(self, name, v):
        k = self.kind
        try:
            if k == "float":
                if isinstance(v, bool):
                    raise TypeError
                out = float(v)
            elif k == "int":
                if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
                    raise TypeError
                out = int(v)
            elif k == "bool":
                if not isinstance(v, bool):
                    raise TypeError
                out = v
            elif k == "str":
                if not isinstance(v, str):
                    raise TypeError
                out = v
            elif k == "float|str":
                out = v if isinstance(v, str) else float(v)
            elif k in ("floats", "ints"):
                if not isinstance(v, (list, tuple)) or not v:
                    raise TypeError
                item = Param(None, k[:-1])
                out = [item.coerce(name, x) for x in v]
            else:
                raise AssertionError(k)
        except (TypeError, ValueError):
            raise ConfigError(f"params.{name}", f"expected {k}, got {v!r}") from None
        if k in ("float", "floats"):
            vals = out if isinstance(out, list) else [out]
            if not all(np.isfinite(vals)):
                raise ConfigError(f"params.{name}", "must be finite")
        if self.choices is not None and out not in self.choices:
            raise ConfigError(f"params.{name}", f"must be one of {list(self.choices)}, got {out!r}")
        return out


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    preset: str = "default"
    params: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: Optional[str] = None
    budget_mib: int = DEFAULT_BUDGET_MIB
    workers: int = 1

    def to_dict(self):
        return asdict(self)


@dataclass
class Experiment:
    name: str
    description: str
    params: Dict[str, Param]
    run: Callable
    validate: Callable = lambda p: None
    presets: Dict[str, dict] = field(default_factory=dict)

    def resolve(self, spec: ExperimentSpec) -> dict:
        if spec.preset not in ("default",) + tuple(self.presets):
            raise ConfigError("preset", f"unknown preset {spec.preset!r} for {self.name}")
        raw = {k: p.default for k, p in self.params.items()}
        raw.update(self.presets.get(spec.preset, {}))
        for k, v in spec.params.items():
            if k not in self.params:
                raise ConfigError(f"params.{k}", f"unknown parameter for {self.name}")
            raw[k] = v
        out = {k: self.params[k].coerce(k, v) for k, v in raw.items()}
        try:
            self.validate(out)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError("params", str(e)) from None
        return out

    def defaults(self, preset="default"):
        d = {k: p.default for k, p in self.params.items()}
        d.update(self.presets.get(preset, {}))
        return d


REGISTRY: Dict[str, Experiment] = {}


def register(exp: Experiment):
    if exp.name in REGISTRY:
        raise ValueError(f"experiment {exp.name!r} already registered")
    REGISTRY[exp.name] = exp
    return exp


def get_experiment(name) -> Experiment:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError("name", f"unknown experiment {name!r}; known: {sorted(REGISTRY)}") from None


class RunContext:
    """Collects series, fits, checks and plot descriptions for one run."""

    def __init__(self, spec: ExperimentSpec, params: dict, root: Path, manifest: RunManifest):
        self.spec, self.params, self.root, self.manifest = spec, params, root, manifest

    def rng(self, tag: str = "") -> np.random.Generator:
        return np.random.default_rng([int(self.spec.seed) & (2 ** 64 - 1), zlib.crc32(tag.encode())])

    @property
    def budget_bytes(self):
        return int(self.spec.budget_mib) * 2 ** 20

    def series(self, name, columns):
        write_series(self.root / "series" / f"{name}.csv", columns)

    def fit(self, name, fit: SlopeFit):
        write_fit(self.root / "fits" / f"{name}.json", fit)
        self.manifest.fits[name] = fit.passed
        return fit

    def check(self, name, ok, **detail):
        self.manifest.checks[name] = None if ok is None else bool(ok)
        if detail:
            self.manifest.notes[name] = detail
        return ok

    def note(self, key, value):
        self.manifest.notes[key] = value

    def resolution(self, key, value):
        self.manifest.resolutions[key] = value

    def plot(self, file, series, x, ys, kind="curves", title="", fit=None, logx=False,
             logy=False, xlabel=None, ylabel=None):
        self.manifest.plots.append(dict(file=file, series=series, x=x, ys=list(ys), kind=kind,
                                        title=title, fit=fit, logx=logx, logy=logy,
                                        xlabel=xlabel or x, ylabel=ylabel or ""))

    def map(self, fn, items):
        """Apply fn over items with the configured worker pool; results keep input order."""
        items = list(items)
        if self.spec.workers <= 1 or len(items) < 2:
            return [fn(i) for i in items]
        # threads: numpy releases the GIL in FFTs and closures need no pickling
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(self.spec.workers) as ex:
            return list(ex.map(fn, items))


def run_experiment(spec: ExperimentSpec, out_dir=None) -> RunManifest:
    """Validate, run and record one experiment.  Raises ConfigError before touching disk."""
    exp = get_experiment(spec.name)
    if int(spec.seed) < 0 or int(spec.seed) >= 2 ** 64:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    if int(spec.budget_mib) <= 0:
        raise ConfigError("budget_mib", "must be positive")
    if int(spec.workers) < 1:
        raise ConfigError("workers", "must be at least 1")
    params = exp.resolve(spec)
    root = Path(out_dir or spec.out_dir or f"displab-out/{spec.name}")
    prepare_out_dir(root)
    for sub in ("series", "fits", "plots"):
        for old in (root / sub).glob("*"):
            old.unlink()
    snap = replace(spec, params=params, out_dir=str(root)).to_dict()
    man = RunManifest(spec=snap)
    man.write(root)
    ctx = RunContext(spec, params, root, man)
    t0 = time.perf_counter()
    try:
        exp.run(ctx, params)
    except KeyboardInterrupt:
        man.status = "cancelled"
        man.wall_time = time.perf_counter() - t0
        man.add_outputs(root)
        man.write(root)
        raise
    except Exception as e:
        man.status = "failed"
        man.notes["error"] = f"{type(e).__name__}: {e}"
        man.wall_time = time.perf_counter() - t0
        man.add_outputs(root)
        man.write(root)
        raise
    man.wall_time = time.perf_counter() - t0
    man.status = "complete"
    man.add_outputs(root)
    man.write(root)
    return man
