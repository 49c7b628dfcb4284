"""Localised-wave ratio: lam^{-(1+delta)/2-s} ||phi_lam cos(lam x + alpha)||_{H^s} -> ||phi||/sqrt2."""
import numpy as np

from ..constructions import loc_ratio, DEFAULT_PHI
from .base import Experiment, Param, ConfigError, register
from .fitting import fit_power_law

NAME = "loc_ratio"


def validate(p):
    if not 0 < p["delta"] < 1:
        raise ConfigError("params.delta", f"must lie in (0, 1), got {p['delta']}")
    if p["s"] < 0:
        raise ConfigError("params.s", "must be nonnegative")
    if min(p["lams"]) < 8:
        raise ConfigError("params.lams", "every lam must be >= 8")
    if len(p["lams"]) < 3:
        raise ConfigError("params.lams", "need at least 3 values")


def run(ctx, p):
    phi = DEFAULT_PHI.normalized()
    target = phi.l2_norm() / np.sqrt(2)
    lams = sorted(p["lams"])
    rows = {"lam": [], "alpha": [], "ratio": [], "deviation": []}
    for a in sorted(p["alphas"]):
        for lam in lams:
            r = loc_ratio(phi, p["s"], p["delta"], a, lam, N=p["N"])
            rows["lam"].append(lam)
            rows["alpha"].append(a)
            rows["ratio"].append(r)
            rows["deviation"].append(abs(r - target) / target)
    ctx.series("loc_ratio", rows)
    dev = np.array(rows["deviation"]).reshape(len(p["alphas"]), len(lams))
    worst = dev.max(axis=0)
    ctx.series("deviation", {"lam": lams, "max_rel_deviation": worst})
    ctx.fit("deviation_slope", fit_power_law(lams, worst))
    ctx.check("limit_within_tol", worst[-1] <= p["rel_tol"], deviation=float(worst[-1]),
              target=float(target), tolerance=p["rel_tol"])
    ctx.check("deviation_decreasing", bool(np.all(np.diff(worst) < 0)))
    spread = np.ptp(np.array(rows["ratio"]).reshape(dev.shape), axis=0)
    ctx.check("alpha_independent", spread[-1] <= 1e-3, spread=float(spread[-1]))
    ctx.plot("deviation.svg", "deviation", "lam", ["max_rel_deviation"], kind="loglog",
             fit="deviation_slope", title="distance to the localisation limit",
             ylabel="relative deviation")


EXPERIMENT = register(Experiment(
    NAME, "H^s norm of a localised carrier wave versus its L2 limit over a lam sweep",
    {"lams": Param([64.0, 128.0, 256.0, 512.0], "floats"),
     "alphas": Param([0.0, 1.0], "floats"),
     "s": Param(1.0), "delta": Param(0.6),
     "N": Param(1024, "int", "envelope grid points"),
     "rel_tol": Param(0.02, "float", "tolerance on the largest-lam deviation")},
    run, validate,
    presets={"quick": {"lams": [16.0, 32.0, 64.0, 128.0], "N": 512}}))
