"""Separation of the omega = +1 / -1 Benjamin-Ono family: ansatz sweep plus one evolved pair."""
import numpy as np

from .. import constructions as C
from .. import evolvers as ev
from ..spectral_core import sobolev_norm
from .base import Experiment, Param, ConfigError, register
from .fitting import fit_power_law

NAME = "bo_instability"
BYTES_PER_POINT = 320      # measured peak footprint of an IF-RK4 run, with headroom


def full_grid_size(p: C.BOFamilyParams, ppw: float):
    m = int(np.ceil(p.lam * C.bo_box_length(p) / (2 * np.pi) - 1e-9))
    return 1 << int(np.ceil(np.log2(ppw * m)))


def _family(p, lam, omega):
    return C.BOFamilyParams(omega=omega, lam=lam, delta=p["delta"], s=p["s"],
                            enforce_small_omega=False)


def validate(p):
    for lam in p["lams"] + ([p["evolved_lam"]] if p["evolved_lam"] > 0 else []):
        for w in (1.0, -1.0):
            try:
                _family(p, lam, w)
            except ValueError as e:
                key = "params.delta" if "delta" in str(e) else "params.lams"
                raise ConfigError(key, str(e)) from None
    for lam in p["lams"]:
        try:
            C.bo_grid(_family(p, lam, 1.0), p["N_coarse"])
        except ValueError as e:
            raise ConfigError("params.N_coarse", str(e)) from None
    if p["T"] <= 0:
        raise ConfigError("params.T", "must be positive")
    if p["n_frames"] < 3:
        raise ConfigError("params.n_frames", "need at least 3 frames")
    if p["scheme"] not in ("etd-rk4", "if-rk4"):
        raise ConfigError("params.scheme", "must be etd-rk4 or if-rk4")


def ansatz_curves(p, lam, times):
    """Normalised H^s separation of the ansatz pair: high parts only and full."""
    a, b = _family(p, lam, 1.0), _family(p, lam, -1.0)
    g = C.bo_grid(a, p["N_coarse"])
    nphi = a.phi.l2_norm()
    la, _ = C.bo_low_family(a, g, T=p["T"], dt=p["low_dt"], n_frames=len(times))
    lb, _ = C.bo_low_family(b, g, T=p["T"], dt=p["low_dt"], n_frames=len(times))
    hi, full = [], []
    for i, t in enumerate(times):
        hi.append((C.bo_high_bands(a, g, t) - C.bo_high_bands(b, g, t)).sobolev_norm(p["s"]) / nphi)
        A = C.bo_approx_bands(a, t, la.snapshots[i], la.snapshots[0])
        B = C.bo_approx_bands(b, t, lb.snapshots[i], lb.snapshots[0])
        full.append((A - B).sobolev_norm(p["s"]) / nphi)
    return np.array(hi), np.array(full)


def run(ctx, p):
    times = np.linspace(0, p["T"], p["n_frames"])
    ref = np.sqrt(2) * np.abs(np.sin(times))
    lams = sorted(p["lams"])
    devs, init = [], []
    for lam in lams:
        hi, full = ansatz_curves(p, lam, times)
        dev = np.max(np.abs(hi - ref)) / np.max(ref)
        devs.append(dev)
        init.append(full[0])
        ctx.series(f"ansatz_lam{int(lam)}", {"t": times, "high_separation": hi,
                                              "full_separation": full, "reference": ref})
    ctx.series("ansatz_sweep", {"lam": lams, "sup_deviation": devs, "initial_separation": init})
    ctx.check("ansatz_limit_curve", devs[-1] <= p["curve_tol"], deviation=float(devs[-1]),
              lam=lams[-1], tolerance=p["curve_tol"])
    ctx.check("ansatz_deviation_decreasing", bool(np.all(np.diff(devs) < 0)))
    ctx.fit("initial_separation", fit_power_law(lams, init, -(1 - p["delta"]) / 2, 0.2))
    ctx.plot("ansatz_sweep.svg", "ansatz_sweep", "lam", ["sup_deviation"], kind="loglog",
             title="ansatz separation: distance to sqrt2|sin t|")
    ctx.plot("ansatz_separation.svg", f"ansatz_lam{int(lams[-1])}", "t",
             ["high_separation", "full_separation", "reference"],
             title=f"ansatz separation, lam={lams[-1]:g}", ylabel="H^s separation / ||phi||")
    ctx.plot("initial_separation.svg", "ansatz_sweep", "lam", ["initial_separation"],
             kind="loglog", fit="initial_separation", title="initial separation")

    lam = p["evolved_lam"]
    if lam <= 0:
        cands = [l for l in lams if full_grid_size(_family(p, l, 1.0), p["points_per_wave"])
                 * BYTES_PER_POINT <= ctx.budget_bytes]
        lam = max(cands) if cands else 0
    if lam <= 0:
        ctx.note("evolved", "no lam fits the memory budget")
        return
    a, b = _family(p, lam, 1.0), _family(p, lam, -1.0)
    N = full_grid_size(a, p["points_per_wave"])
    if N * BYTES_PER_POINT > ctx.budget_bytes:
        raise ConfigError("params.evolved_lam",
                          f"full grid of {N} points exceeds budget_mib={ctx.spec.budget_mib}")
    ctx.resolution("evolved_grid", {"lam": lam, "N": N})
    g = C.bo_full_grid(a, N)
    st = ev.StepperSpec(scheme=p["scheme"], dt=p["dt"])
    eq = ev.EquationSpec("bo")
    ta = ev.evolve(eq, C.bo_initial_data(a, g), p["T"], st, n_frames=p["n_frames"])
    tb = ev.evolve(eq, C.bo_initial_data(b, g), p["T"], st, n_frames=p["n_frames"])
    nphi = a.phi.l2_norm()
    sep = np.array([sobolev_norm(x - y, p["s"]) for x, y in zip(ta.snapshots, tb.snapshots)]) / nphi
    hi, full = ansatz_curves(p, lam, times)
    err = float(np.max(np.abs(sep - full)) / np.max(full))
    mass = max(float(np.ptp(t.diagnostics["mass"]) / t.diagnostics["mass"][0]) for t in (ta, tb))
    ctx.series("evolved", {"t": times, "evolved_separation": sep, "ansatz_full": full,
                           "ansatz_high": hi, "reference": ref})
    ctx.check("evolved_vs_ansatz", err <= p["evolved_tol"], rel_sup_error=err, lam=lam,
              tolerance=p["evolved_tol"])
    ctx.check("evolved_mass_drift", mass <= 1e-6, drift=mass)
    ctx.plot("evolved_separation.svg", "evolved", "t",
             ["evolved_separation", "ansatz_full", "ansatz_high", "reference"],
             title=f"evolved separation, lam={lam:g}", ylabel="H^s separation / ||phi||")


EXPERIMENT = register(Experiment(
    NAME, "Benjamin-Ono omega=+-1 pair: ansatz separation vs sqrt2|sin t| and one evolved pair",
    {"lams": Param([32.0, 64.0, 128.0, 256.0], "floats"),
     "s": Param(1.0), "delta": Param(0.5), "T": Param(1.0),
     "n_frames": Param(11, "int"),
     "N_coarse": Param(4096, "int", "envelope grid for ansatz norms"),
     "low_dt": Param(0.05),
     "evolved_lam": Param(64.0, "float", "0 selects the largest lam within budget"),
     "points_per_wave": Param(8.0),
     "scheme": Param("if-rk4", "str"), "dt": Param(0.01),
     "curve_tol": Param(0.05), "evolved_tol": Param(0.15)},
    run, validate,
    presets={"quick": {"lams": [16.0, 32.0, 64.0, 128.0], "evolved_lam": 16.0}}))
