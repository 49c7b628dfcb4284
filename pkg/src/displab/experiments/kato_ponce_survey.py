"""Randomised survey of the Kato-Ponce commutator ratio."""
import numpy as np

from ..spectral_core import Field, make_grid, kato_ponce_ratio, UndefinedRatioError
from .base import Experiment, Param, ConfigError, register

NAME = "kato_ponce_survey"


def validate(p):
    if any(s < 1 for s in p["s_values"]):
        raise ConfigError("params.s_values", "every s must be >= 1")
    if p["n_pairs"] < 1:
        raise ConfigError("params.n_pairs", "must be positive")
    if not 1 <= p["band"] <= p["N"] // 4:
        raise ConfigError("params.band", "must lie in [1, N/4] so products stay alias-free")


def random_field(g, band, decay, rng):
    N = g.num_points
    c = np.zeros(N, complex)
    k = np.arange(1, band + 1)
    c[k] = (rng.standard_normal(band) + 1j * rng.standard_normal(band)) * k ** (-decay)
    c[-k] = np.conj(c[k])
    c[0] = rng.standard_normal()
    return Field.from_spectrum(g, c)


def run(ctx, p):
    g = make_grid(p["N"], 2 * np.pi)
    rng = ctx.rng("pairs")
    pairs = [(random_field(g, p["band"], p["decay"], rng), random_field(g, p["band"], p["decay"], rng))
             for _ in range(p["n_pairs"])]
    rows = {"s": [], "sample": [], "ratio": []}
    summ = {k: [] for k in ("s", "count", "undefined", "max", "median", "q90", "min")}
    for s in sorted(p["s_values"]):
        r = []
        bad = 0
        for i, (f, h) in enumerate(pairs):
            try:
                v = kato_ponce_ratio(f, h, s)
            except UndefinedRatioError:
                bad += 1
                continue
            r.append(v)
            rows["s"].append(s)
            rows["sample"].append(i)
            rows["ratio"].append(v)
        r = np.array(r)
        summ["s"].append(s)
        summ["count"].append(r.size)
        summ["undefined"].append(bad)
        summ["max"].append(r.max())
        summ["median"].append(np.median(r))
        summ["q90"].append(np.quantile(r, 0.9))
        summ["min"].append(r.min())
    ctx.series("ratios", rows)
    ctx.series("summary", summ)
    ctx.check("max_finite", bool(np.all(np.isfinite(summ["max"]))))
    ctx.plot("summary.svg", "summary", "s", ["max", "q90", "median", "min"],
             title="Kato-Ponce ratio distribution", ylabel="ratio")


EXPERIMENT = register(Experiment(
    NAME, "Kato-Ponce commutator ratio over seeded random band-limited pairs",
    {"s_values": Param([1.6, 2.0, 3.0], "floats"), "n_pairs": Param(100, "int"),
     "N": Param(256, "int"), "band": Param(32, "int"),
     "decay": Param(1.0, "float", "coefficient decay exponent")},
    run, validate, presets={"quick": {"n_pairs": 20}}))
