"""Deterministic SVG rendering of experiment series and fits."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments.output import read_series, RunManifest  # noqa: E402

__all__ = ["render_plot", "render_all", "summary_text"]

_STYLE = {
    "svg.hashsalt": "displab",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "figure.figsize": (5.0, 3.4),
}


def render_plot(root, desc) -> str:
    """Render one plot description; returns "ok" or "no data"."""
    root = Path(root)
    src = root / "series" / f"{desc['series']}.csv"
    out = root / "plots" / desc["file"]
    out.parent.mkdir(parents=True, exist_ok=True)
    data = read_series(src) if src.is_file() else {}
    x = data.get(desc["x"])
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if x is None or x.size == 0:
            ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)
            ax.set_axis_off()
            status = "no data"
        else:
            loglog = desc.get("kind") == "loglog"
            for name in desc["ys"]:
                y = data.get(name)
                if y is None:
                    continue
                style = "--" if name in ("reference", "model") else "-"
                ax.plot(x, y, style, marker="o" if loglog else None, ms=3, label=name)
            if loglog:
                ax.set_xscale("log")
                ax.set_yscale("log")
            else:
                if desc.get("logx"):
                    ax.set_xscale("log")
                if desc.get("logy"):
                    ax.set_yscale("log")
            fit = desc.get("fit")
            fp = root / "fits" / f"{fit}.json" if fit else None
            if fp is not None and fp.is_file():
                f = json.loads(fp.read_text())
                xs = np.array(f["x"])
                xx = np.geomspace(xs.min(), xs.max(), 50)
                ax.plot(xx, np.exp(f["intercept"]) * xx ** f["slope"], ":", color="k",
                        label=f"fit slope {f['slope']:.3f}")
                if f.get("predicted") is not None:
                    lx, ly = np.log(xs), np.log(np.array(f["y"]))
                    c = np.mean(ly - f["predicted"] * lx)
                    ax.plot(xx, np.exp(c) * xx ** f["predicted"], "-.", color="0.5",
                            label=f"predicted {f['predicted']:.3f}")
            ax.set_xlabel(desc.get("xlabel") or desc["x"])
            ax.set_ylabel(desc.get("ylabel") or "")
            ax.legend(fontsize=7)
            status = "ok"
        ax.set_title(desc.get("title", ""), fontsize=9)
        fig.tight_layout()
        fig.savefig(out, format="svg", metadata={"Date": None})
        plt.close(fig)
    return status


def render_all(root):
    man = RunManifest.load(root)
    return {d["file"]: render_plot(root, d) for d in man.plots}


def _flag(v):
    return "PASS" if v else ("n/a " if v is None else "FAIL")


def summary_text(root, plot_status=None) -> str:
    root = Path(root)
    man = RunManifest.load(root)
    lines = [f"experiment: {man.spec.get('name')}  preset: {man.spec.get('preset')}  "
             f"status: {man.status}"]
    if not man.checks and not man.fits and not man.plots:
        lines.append("no data")
    for k in sorted(man.checks):
        lines.append(f"  check {_flag(man.checks[k])} {k}")
    for k in sorted(man.fits):
        fp = root / "fits" / f"{k}.json"
        if fp.is_file():
            f = json.loads(fp.read_text())
            pred = "-" if f["predicted"] is None else f"{f['predicted']:.4g}"
            lines.append(f"  fit   {_flag(man.fits[k])} {k}: slope {f['slope']:.4g} "
                         f"(predicted {pred}, {f['mode']} tol {f['tolerance']:g})")
    for name, st in sorted((plot_status or {}).items()):
        lines.append(f"  plot  plots/{name} ({st})")
    return "\n".join(lines) + "\n"
