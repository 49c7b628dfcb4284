"""Log-log power-law fits with recorded predictions."""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

__all__ = ["SlopeFit", "fit_power_law"]


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares fit of log y = slope log x + intercept.

    ``mode`` decides ``passed``: "match" means |slope - predicted| <= tolerance,
    "upper" means slope <= predicted + tolerance, "lower" means slope >= predicted - tolerance.
    """
    x: tuple
    y: tuple
    slope: float
    intercept: float
    residual_rms: float
    stderr: float
    predicted: Optional[float] = None
    tolerance: float = 0.2
    mode: str = "match"

    @property
    def passed(self) -> Optional[bool]:
        if self.predicted is None:
            return None
        if self.mode == "match":
            return bool(abs(self.slope - self.predicted) <= self.tolerance)
        if self.mode == "upper":
            return bool(self.slope <= self.predicted + self.tolerance)
        if self.mode == "lower":
            return bool(self.slope >= self.predicted - self.tolerance)
        raise ValueError(f"unknown fit mode {self.mode!r}")

    def with_prediction(self, predicted, tolerance=0.2, mode="match") -> "SlopeFit":
        d = asdict(self)
        d.update(predicted=predicted, tolerance=tolerance, mode=mode)
        return SlopeFit(**d)

    def to_dict(self):
        d = asdict(self)
        d["x"], d["y"] = list(self.x), list(self.y)
        d["passed"] = self.passed
        return d


def fit_power_law(xs, ys, predicted=None, tolerance=0.2, mode="match") -> SlopeFit:
    x = np.asarray(xs, float)
    y = np.asarray(ys, float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 points")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(x * y)):
        raise ValueError("power-law fit needs positive finite data")
    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (b, a), *_ = np.linalg.lstsq(A, ly, rcond=None)
    r = ly - (b * lx + a)
    rms = float(np.sqrt(np.mean(r ** 2)))
    dof = max(x.size - 2, 1)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    se = float(np.sqrt(np.sum(r ** 2) / dof / sxx)) if sxx > 0 else float("inf")
    return SlopeFit(tuple(x.tolist()), tuple(y.tolist()), float(b), float(a), rms, se,
                    predicted, tolerance, mode)
