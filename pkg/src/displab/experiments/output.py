"""Output directory layout: manifest.json, series/*.csv, fits/*.json, plots/*.svg."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .. import __version__

__all__ = ["RunManifest", "write_series", "read_series", "write_fit", "sha256_file",
           "MANIFEST", "prepare_out_dir"]

MANIFEST = "manifest.json"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def write_series(path, columns: Dict[str, object]):
    """CSV with a header row; every column has the same length."""
    names = list(columns)
    cols = [np.atleast_1d(np.asarray(columns[k])) for k in names]
    n = {len(c) for c in cols}
    if len(n) > 1:
        raise ValueError(f"ragged columns in {path}: {sorted(n)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
    return path


def read_series(path) -> Dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return {}
    head, body = rows[0], rows[1:]
    out = {}
    for j, k in enumerate(head):
        col = [r[j] for r in body]
        try:
            out[k] = np.array([float(v) for v in col])
        except ValueError:
            out[k] = np.array(col)
    return out


def write_fit(path, fit):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(fit.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def prepare_out_dir(root) -> Path:
    root = Path(root)
    for sub in ("series", "fits", "plots"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    return root


@dataclass
class RunManifest:
    spec: dict
    version: str = __version__
    status: str = "running"
    resolutions: dict = field(default_factory=dict)
    wall_time: float = 0.0
    checksums: Dict[str, str] = field(default_factory=dict)
    checks: Dict[str, Optional[bool]] = field(default_factory=dict)
    fits: Dict[str, Optional[bool]] = field(default_factory=dict)
    plots: List[dict] = field(default_factory=list)
    notes: Dict[str, object] = field(default_factory=dict)
    platform: dict = field(default_factory=lambda: {
        "python": platform.python_version(), "numpy": np.__version__})

    @property
    def passed(self) -> bool:
        flags = [v for v in list(self.checks.values()) + list(self.fits.values()) if v is not None]
        return all(flags)

    def add_outputs(self, root):
        root = Path(root)
        for sub in ("series", "fits"):
            for p in sorted((root / sub).glob("*")):
                self.checksums[f"{sub}/{p.name}"] = sha256_file(p)

    def write(self, root):
        root = Path(root)
        tmp = root / (MANIFEST + ".tmp")
        tmp.write_text(json.dumps(asdict(self), indent=2, sort_keys=True, default=_json_default)
                       + "\n")
        os.replace(tmp, root / MANIFEST)

    @classmethod
    def load(cls, root) -> "RunManifest":
        p = Path(root) / MANIFEST
        if not p.is_file():
            raise FileNotFoundError(f"no {MANIFEST} in {root}")
        try:
            d = json.loads(p.read_text())
        except json.JSONDecodeError as e:
            raise ValueError(f"corrupt {MANIFEST}: {e}") from None
        if not isinstance(d, dict) or "spec" not in d:
            raise ValueError(f"corrupt {MANIFEST}: missing spec")
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")
