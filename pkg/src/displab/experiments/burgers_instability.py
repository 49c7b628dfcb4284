"""Separation of the omega = +1 / -1 Burgers family: ansatz sweep plus one evolved pair."""
import numpy as np

from .. import constructions as C
from .. import evolvers as ev
from ..spectral_core import sobolev_norm, make_grid
from .base import Experiment, Param, ConfigError, register
from .fitting import fit_power_law

NAME = "burgers_instability"
BYTES_PER_POINT = 320


def _family(p, lam, omega):
    return C.BurgersFamilyParams(omega=omega, lam=lam, delta=p["delta"], s=p["s"])


def validate(p):
    for lam in p["lams"]:
        try:
            a = _family(p, lam, 1.0)
        except ValueError as e:
            key = next((f"params.{k}" for k in ("delta", "s") if k in str(e)), "params.lams")
            raise ConfigError(key, str(e)) from None
        try:
            _box(a, p["N_coarse"])
        except ValueError as e:
            raise ConfigError("params.N_coarse", str(e)) from None
    if p["T"] <= 0:
        raise ConfigError("params.T", "must be positive")


def _box(a, N):
    return C.burgers_approx_bands(a, 0.0, N)[0].grid


def ansatz_curves(p, lam, times):
    a, b = _family(p, lam, 1.0), _family(p, lam, -1.0)
    nphi = a.phi.l2_norm()
    hi, full = [], []
    for t in times:
        la, ha = C.burgers_approx_bands(a, t, p["N_coarse"])
        lb, hb = C.burgers_approx_bands(b, t, p["N_coarse"])
        hi.append((ha - hb).sobolev_norm(p["s"]) / nphi)
        full.append(((la + ha) - (lb + hb)).sobolev_norm(p["s"]) / nphi)
    return np.array(hi), np.array(full)


def full_grid_size(a, N_coarse, ppw):
    g = _box(a, N_coarse)
    m = a.lam * g.length / (2 * np.pi)
    return 1 << int(np.ceil(np.log2(ppw * m))), g.length


def run(ctx, p):
    times = np.linspace(0, p["T"], p["n_frames"])
    ref = np.sqrt(2) * np.abs(np.sin(times))
    lams = sorted(p["lams"])
    devs, init = [], []
    for lam in lams:
        hi, full = ansatz_curves(p, lam, times)
        devs.append(np.max(np.abs(hi - ref)) / np.max(ref))
        init.append(full[0])
        ctx.series(f"ansatz_lam{int(lam)}", {"t": times, "high_separation": hi,
                                              "full_separation": full, "reference": ref})
    ctx.series("ansatz_sweep", {"lam": lams, "sup_deviation": devs, "initial_separation": init})
    ctx.check("ansatz_limit_curve", devs[-1] <= p["curve_tol"], deviation=float(devs[-1]))
    ctx.fit("initial_separation", fit_power_law(lams, init, -1 + p["delta"] / 2, 0.2))
    ctx.plot("ansatz_separation.svg", f"ansatz_lam{int(lams[-1])}", "t",
             ["high_separation", "full_separation", "reference"],
             title=f"Burgers ansatz separation, lam={lams[-1]:g}")
    ctx.plot("initial_separation.svg", "ansatz_sweep", "lam", ["initial_separation"],
             kind="loglog", fit="initial_separation", title="initial separation")

    cands = [l for l in lams
             if full_grid_size(_family(p, l, 1.0), p["N_coarse"], p["points_per_wave"])[0]
             * BYTES_PER_POINT <= min(ctx.budget_bytes, p["evolve_cap_mib"] * 2 ** 20)]
    if not cands:
        ctx.note("evolved", "no lam fits the memory budget")
        return
    lam = max(cands)
    a, b = _family(p, lam, 1.0), _family(p, lam, -1.0)
    N, L = full_grid_size(a, p["N_coarse"], p["points_per_wave"])
    ctx.resolution("evolved_grid", {"lam": lam, "N": N})
    g = make_grid(N, L)
    eq = ev.EquationSpec("burgers")
    st = ev.StepperSpec(dt=p["dt"])
    ta = ev.evolve(eq, C.burgers_approx(a, 0.0, g), p["T"], st, n_frames=p["n_frames"])
    tb = ev.evolve(eq, C.burgers_approx(b, 0.0, g), p["T"], st, n_frames=p["n_frames"])
    nphi = a.phi.l2_norm()
    sep = np.array([sobolev_norm(x - y, p["s"]) for x, y in zip(ta.snapshots, tb.snapshots)]) / nphi
    hi, full = ansatz_curves(p, lam, times)
    err = float(np.max(np.abs(sep - full)) / np.max(full))
    ctx.series("evolved", {"t": times, "evolved_separation": sep, "ansatz_full": full,
                           "reference": ref})
    ctx.check("evolved_vs_ansatz", err <= p["evolved_tol"], rel_sup_error=err, lam=lam)
    ctx.plot("evolved_separation.svg", "evolved", "t",
             ["evolved_separation", "ansatz_full", "reference"],
             title=f"evolved Burgers separation, lam={lam:g}")


EXPERIMENT = register(Experiment(
    NAME, "Burgers omega=+-1 pair: ansatz separation vs sqrt2|sin t| and one evolved pair",
    {"lams": Param([32.0, 64.0, 128.0, 256.0], "floats"),
     "s": Param(1.6), "delta": Param(1.2), "T": Param(1.0),
     "n_frames": Param(11, "int"), "N_coarse": Param(2048, "int"),
     "points_per_wave": Param(8.0), "dt": Param(0.01),
     "evolve_cap_mib": Param(256.0, "float", "memory cap for the evolved pair"),
     "curve_tol": Param(0.05), "evolved_tol": Param(0.15)},
    run, validate,
    presets={"quick": {"lams": [16.0, 32.0, 64.0, 128.0], "N_coarse": 1024,
                       "evolve_cap_mib": 64.0}}))
