"""Command-line entry point.

    displab list
    displab run NAME [--config FILE] [--out DIR] [--seed U64] [--strict] [--budget-mib N]
                     [--preset P] [--workers K]
    displab report DIR

Exit codes: 0 success; 2 invalid configuration or unreadable report directory;
3 runtime guard trip, or a failed pass flag under --strict; 130 cancelled (the manifest
is left with status "cancelled").
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .experiments import REGISTRY, ConfigError, ExperimentSpec, run_experiment, get_experiment
from .experiments.output import RunManifest
from .evolvers import GuardError
from .constructions import ResolutionGuardError

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

__all__ = ["main", "cmd_list", "cmd_run", "cmd_report", "load_config", "EXIT_OK",
           "EXIT_CONFIG", "EXIT_RUNTIME", "EXIT_CANCELLED"]

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CANCELLED = 0, 2, 3, 130
SPEC_KEYS = ("name", "preset", "params", "seed", "out_dir", "budget_mib", "workers")


def cmd_list(registry=None) -> str:
    reg = REGISTRY if registry is None else registry
    lines = []
    for name in sorted(reg):
        e = reg[name]
        lines.append(f"{name}: {e.description}")
        for k, v in e.defaults().items():
            lines.append(f"    {k} = {v!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_config(path) -> dict:
    """Parse a TOML config; keys map one-to-one onto ExperimentSpec fields."""
    try:
        with open(path, "rb") as fh:
            d = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("config", f"not valid TOML: {e}") from None
    for k in d:
        if k not in SPEC_KEYS:
            raise ConfigError(k, f"unknown key; allowed: {list(SPEC_KEYS)}")
    if "params" in d and not isinstance(d["params"], dict):
        raise ConfigError("params", "must be a table")
    for k in ("seed", "budget_mib", "workers"):
        if k in d and (not isinstance(d[k], int) or isinstance(d[k], bool)):
            raise ConfigError(k, f"expected integer, got {d[k]!r}")
    for k in ("name", "preset", "out_dir"):
        if k in d and not isinstance(d[k], str):
            raise ConfigError(k, f"expected string, got {d[k]!r}")
    return d


def _out_root(name, cli_out, cfg_out):
    if cli_out:
        return Path(cli_out)
    if cfg_out:
        return Path(cfg_out)
    base = os.environ.get("DISPLAB_OUT")
    return Path(base) / name if base else Path("displab-out") / name


def build_spec(name, config=None, out=None, seed=None, budget_mib=None, preset=None,
               workers=None) -> ExperimentSpec:
    cfg = load_config(config) if config else {}
    if name and cfg.get("name") and cfg["name"] != name:
        raise ConfigError("name", f"config names {cfg['name']!r} but {name!r} was requested")
    name = name or cfg.get("name")
    if not name:
        raise ConfigError("name", "no experiment given")
    get_experiment(name)
    spec = ExperimentSpec(
        name=name,
        preset=preset or cfg.get("preset", "default"),
        params=dict(cfg.get("params", {})),
        seed=cfg.get("seed", 0) if seed is None else seed,
        out_dir=str(_out_root(name, out, cfg.get("out_dir"))),
        budget_mib=budget_mib if budget_mib is not None else cfg.get("budget_mib", 2048),
        workers=workers if workers is not None else cfg.get("workers", 1))
    return spec


def cmd_report(root, stream=None) -> int:
    from .plotting import render_all, summary_text
    stream = stream or sys.stdout
    root = Path(root)
    try:
        status = render_all(root)
        text = summary_text(root, status)
    except (FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    (root / "summary.txt").write_text(text)
    stream.write(text)
    return EXIT_OK


def cmd_run(name, config=None, out=None, seed=None, strict=False, budget_mib=None,
            preset=None, workers=None, stream=None) -> int:
    try:
        spec = build_spec(name, config, out, seed, budget_mib, preset, workers)
        man = run_experiment(spec)
    except ConfigError as e:
        print(f"invalid config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (GuardError, ResolutionGuardError) as e:
        print(f"guard tripped: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        print("cancelled; partial-run marker written to the manifest", file=sys.stderr)
        return EXIT_CANCELLED
    rc = cmd_report(spec.out_dir, stream)
    if rc:
        return rc
    if strict and not man.passed:
        print("strict: at least one pass flag failed", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _u64(s):
    v = int(s)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(s):
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def make_parser():
    ap = argparse.ArgumentParser(prog="displab", description="dispersive-PDE experiment runner")
    sub = ap.add_subparsers(dest="cmd", required=True)
    sub.add_parser("list", help="list registered experiments with default parameters")
    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("name", nargs="?")
    r.add_argument("--config", help="TOML file with ExperimentSpec fields")
    r.add_argument("--out", help="output directory (default $DISPLAB_OUT/NAME)")
    r.add_argument("--seed", type=_u64)
    r.add_argument("--strict", action="store_true", help="exit 3 if any pass flag fails")
    r.add_argument("--budget-mib", type=_positive)
    r.add_argument("--preset", help="parameter preset (default or quick)")
    r.add_argument("--workers", type=_positive)
    p = sub.add_parser("report", help="render plots and a summary for an output directory")
    p.add_argument("dir")
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    if a.cmd == "list":
        sys.stdout.write(cmd_list())
        return EXIT_OK
    if a.cmd == "run":
        return cmd_run(a.name, a.config, a.out, a.seed, a.strict, a.budget_mib, a.preset,
                       a.workers)
    return cmd_report(a.dir)


if __name__ == "__main__":
    sys.exit(main())
