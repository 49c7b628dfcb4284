"""Residual norms of the approximate families against lam: per-term and total slope fits."""
import numpy as np

from .. import constructions as C
from .base import Experiment, Param, ConfigError, register
from .fitting import fit_power_law

NAME = "residual_scaling"
TERMS = ("low_transport", "high_high", "dispersive_commutator", "low_drift")


def validate(p):
    for key in ("bo_lams", "burgers_lams"):
        lams = sorted(p[key])
        if len(lams) < 4:
            raise ConfigError(f"params.{key}", "need at least 4 dyadic points")
        r = np.diff(np.log2(lams))
        if not np.allclose(r, 1.0):
            raise ConfigError(f"params.{key}", "points must be dyadic (successive ratio 2)")
    try:
        C.BOFamilyParams(lam=min(p["bo_lams"]), delta=p["bo_delta"], s=p["bo_s"],
                         omega=p["bo_omega"], enforce_small_omega=False)
    except ValueError as e:
        raise ConfigError("params.bo_delta", str(e)) from None
    try:
        C.BurgersFamilyParams(lam=min(p["burgers_lams"]), delta=p["burgers_delta"], s=p["burgers_s"])
    except ValueError as e:
        raise ConfigError("params.burgers_delta", str(e)) from None


def bo_sweep(p):
    rows = {k: [] for k in ("lam", "total", "sum_of_terms", "low_residual", *TERMS, "commutator",
                            "decomposition_gap", "tail")}
    for lam in sorted(p["bo_lams"]):
        fam = C.BOFamilyParams(omega=p["bo_omega"], lam=lam, delta=p["bo_delta"], s=p["bo_s"],
                               enforce_small_omega=False)
        g = C.bo_grid(fam, p["N_coarse"])
        traj, _ = C.bo_low_family(fam, g, T=p["t"], dt=p["low_dt"], n_frames=p["low_frames"])
        rep = C.bo_residual_decomposition(fam, traj, len(traj.times) - 1)
        rows["lam"].append(lam)
        rows["total"].append(rep.total)
        for k in ("low_residual",) + TERMS:
            rows[k].append(rep.terms[k])
        for k in ("sum_of_terms", "commutator", "decomposition_gap", "tail"):
            rows[k].append(rep.extra[k])
        exps = rep.extra["term_exponents"]
    return rows, exps, rep.predicted_exponent


def run(ctx, p):
    rows, exps, total_pred = bo_sweep(p)
    ctx.series("bo_residual", rows)
    lams = rows["lam"]
    ctx.fit("bo_total", fit_power_law(lams, rows["total"], total_pred, p["total_margin"], "upper"))
    for k in TERMS:
        ctx.fit(f"bo_{k}", fit_power_law(lams, rows[k], exps[k], p["tolerance"]))
    tail = max(rows["tail"])
    ctx.check("bo_resolved", tail <= 1e-6, tail=tail)
    ctx.check("bo_decomposition_consistent",
              max(np.array(rows["decomposition_gap"]) / np.array(rows["total"])) <= 1e-6)
    ctx.plot("bo_terms.svg", "bo_residual", "lam", ["total", *TERMS], kind="loglog",
             fit="bo_total", title="BO residual terms")

    br = {k: [] for k in ("lam", "total", "transport", "high_low", "high_high", "low_low", "tail")}
    for lam in sorted(p["burgers_lams"]):
        fam = C.BurgersFamilyParams(omega=p["burgers_omega"], lam=lam, delta=p["burgers_delta"],
                                    s=p["burgers_s"])
        rep = C.burgers_residual_norm(fam, p["t"], p["N_burgers"])
        br["lam"].append(lam)
        br["total"].append(rep.total)
        for k in ("transport", "high_low", "high_high", "low_low"):
            br[k].append(rep.terms[k])
        br["tail"].append(rep.extra["tail"])
    ctx.series("burgers_residual", br)
    s = p["burgers_s"]
    f = ctx.fit("burgers_total", fit_power_law(br["lam"], br["total"], -s - 0.05, 0.0, "upper"))
    eps_fit = -f.slope - s
    ctx.check("burgers_eps_positive", eps_fit > 0, eps=eps_fit)
    ctx.plot("burgers_terms.svg", "burgers_residual", "lam",
             ["total", "transport", "high_low", "high_high", "low_low"], kind="loglog",
             fit="burgers_total", title="Burgers residual terms")


EXPERIMENT = register(Experiment(
    NAME, "L2 residual of the BO and Burgers ansatz families: per-term and total lam slopes",
    {"bo_lams": Param([32.0, 64.0, 128.0, 256.0], "floats"),
     "bo_s": Param(1.0), "bo_delta": Param(0.5), "bo_omega": Param(1.0),
     "burgers_lams": Param([32.0, 64.0, 128.0, 256.0], "floats"),
     "burgers_s": Param(1.6), "burgers_delta": Param(1.2), "burgers_omega": Param(1.0),
     "t": Param(1.0, "float", "evaluation time"),
     "N_coarse": Param(4096, "int"), "N_burgers": Param(2048, "int"),
     "low_dt": Param(0.05), "low_frames": Param(21, "int"),
     "tolerance": Param(0.2, "float", "per-term slope tolerance"),
     "total_margin": Param(0.15, "float", "allowance above the total bound")},
    run, validate,
    presets={"quick": {"bo_lams": [16.0, 32.0, 64.0, 128.0],
                       "burgers_lams": [16.0, 32.0, 64.0, 128.0], "N_burgers": 1024}}))
