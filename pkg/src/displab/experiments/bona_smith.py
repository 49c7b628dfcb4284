"""Continuity of the Burgers flow through mollified data at shrinking scales."""
import numpy as np

from .. import evolvers as ev
from ..spectral_core import Field, make_grid, mollify, sobolev_norm
from .base import Experiment, Param, ConfigError, register
from .fitting import fit_power_law

NAME = "bona_smith"


def validate(p):
    e = p["eps"]
    if len(e) < 3 or any(x <= 0 for x in e):
        raise ConfigError("params.eps", "need at least 3 positive scales")
    if len(set(e)) != len(e):
        raise ConfigError("params.eps", "scales must be distinct")
    if p["s"] <= 1.5:
        raise ConfigError("params.s", "must exceed 3/2")
    if not 0 < p["ref_factor"] < 1:
        raise ConfigError("params.ref_factor", "must lie in (0, 1)")
    if 2.0 / (min(e) * p["ref_factor"]) > p["N"] / 3:
        raise ConfigError("params.N", "grid does not resolve the finest mollifier")


def rough_data(p, rng):
    """Real random-phase data with |c_k| ~ (1+k^2)^{-(s+margin)/2}, scaled in H^s."""
    N = p["N"]
    g = make_grid(N, 2 * np.pi)
    k = g.wavenumbers
    c = (1 + k ** 2) ** (-(p["s"] + p["margin"]) / 2) * np.exp(2j * np.pi * rng.random(N))
    c[0] = c[N // 2] = 0
    c = 0.5 * (c + np.conj(np.roll(c[::-1], 1)))
    u = Field.from_spectrum(g, c)
    return u * (p["amplitude"] / sobolev_norm(u, p["s"]))


def run(ctx, p):
    u0 = rough_data(p, ctx.rng("data"))
    eps = sorted(p["eps"], reverse=True)
    ref_eps = eps[-1] * p["ref_factor"]
    ctx.resolution("grid", {"N": p["N"], "reference_eps": ref_eps})
    v0 = [sobolev_norm(u0 - mollify(u0, e), 0) for e in eps]
    eq = ev.EquationSpec("burgers")
    st = ev.StepperSpec(dt=p["dt"])

    def solve(e):
        return ev.evolve(eq, mollify(u0, e), p["T"], st, n_frames=3, diagnostics=False).snapshots[1]

    mid = ctx.map(solve, eps + [ref_eps])
    ref = mid[-1]
    diff = [sobolev_norm(m - ref, p["s"]) for m in mid[:-1]]
    rate = [np.nan] + [np.log(diff[i - 1] / diff[i]) / np.log(eps[i - 1] / eps[i])
                       for i in range(1, len(eps))]
    ctx.series("continuity_table", {"eps": eps, "hs_difference": diff, "cauchy_rate": rate,
                                    "v0_l2": v0})
    ctx.check("table_strictly_decreasing", bool(np.all(np.diff(diff) < 0)))
    ctx.fit("v0_l2_vs_eps", fit_power_law(eps, v0, p["s"], 0.2, mode="lower"))
    ctx.plot("continuity.svg", "continuity_table", "eps", ["hs_difference"], kind="loglog",
             title="H^s distance to the finest mollified flow at T/2")
    ctx.plot("v0.svg", "continuity_table", "eps", ["v0_l2"], kind="loglog",
             fit="v0_l2_vs_eps", title="mollification error of the data")


EXPERIMENT = register(Experiment(
    NAME, "Burgers flow from mollified rough data: continuity table and data-error rate",
    {"eps": Param([1e-1, 3e-2, 1e-2, 3e-3], "floats"),
     "ref_factor": Param(1 / 3, "float", "finest reference scale = min(eps) * ref_factor"),
     "s": Param(2.0), "margin": Param(0.51, "float", "spectral decay margin beyond s"),
     "amplitude": Param(0.3, "float", "H^s size of the data"),
     "N": Param(8192, "int"), "T": Param(0.5), "dt": Param(1e-3)},
    run, validate,
    presets={"quick": {"N": 8192, "dt": 2e-3}}))
