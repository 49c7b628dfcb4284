"""Energy-estimate constants along Burgers trajectories and the a priori time window."""
import numpy as np

from .. import evolvers as ev
from ..spectral_core import Field, make_grid, derivative, lp_norm, sobolev_norm
from .base import Experiment, Param, ConfigError, register

NAME = "energy_estimate_check"


def validate(p):
    if any(s <= 1.5 for s in p["s_values"]):
        raise ConfigError("params.s_values", "every s must exceed 3/2")
    if any(a <= 0 for a in p["amplitudes"]):
        raise ConfigError("params.amplitudes", "must be positive")
    if not 0 < p["window"] < 1:
        raise ConfigError("params.window", "must lie in (0, 1) to stay before the shock")
    if not 1 < p["growth"] < 1 / (1 - p["window"]):
        raise ConfigError("params.growth", "must lie in (1, 1/(1-window)) so the threshold is reached")


def base_data(p, rng):
    """Smooth band-limited data normalised to max(-u_x) = 1, so characteristics cross at t = 1."""
    g = make_grid(p["N"], 2 * np.pi)
    c = np.zeros(p["N"], complex)
    k = np.arange(1, p["band"] + 1)
    c[k] = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) * k ** -2.0
    c[-k] = np.conj(c[k])
    u = Field.from_spectrum(g, c)
    return u * (1.0 / float(np.max(-derivative(u).values)))


def trajectory_table(u0, a, s, p):
    T = p["window"] / a
    tr = ev.evolve(ev.EquationSpec("burgers"), u0 * a, T, ev.StepperSpec(dt=p["dt"] / a),
                   n_frames=p["n_frames"], diagnostics=False)
    t = tr.times
    h = np.array([sobolev_norm(f, s) for f in tr.snapshots])
    gx = np.array([lp_norm(derivative(f), np.inf) for f in tr.snapshots])
    G = np.concatenate([[0.0], np.cumsum(0.5 * (gx[1:] + gx[:-1]) * np.diff(t))])
    c1 = np.max(np.log(h[1:] ** 2 / h[0] ** 2) / G[1:])
    c2 = G[-1] / (T * h.max())
    # admissible time: sup|u_x| reaches growth * initial; Riccati along characteristics
    # gives (1 - 1/growth)/a exactly when the steepest descent is -a
    thr = p["growth"] * gx[0]
    hit = np.nonzero(gx >= thr)[0]
    if hit.size:
        j = hit[0]
        T_adm = t[j - 1] + (thr - gx[j - 1]) / (gx[j] - gx[j - 1]) * (t[j] - t[j - 1])
    else:
        T_adm = np.nan
    return dict(hs0=h[0], T_adm=T_adm, T_riccati=(1 - 1 / p["growth"]) / a,
                hs_growth=h.max() / h[0], C_gronwall=c1, C_embedding=c2, ux_l1linf=G[-1],
                window=1 / (1 + h[0]), gronwall_slack=float(np.min(np.exp(c1 * G[1:]) - h[1:] ** 2 / h[0] ** 2)))


def run(ctx, p):
    u0 = base_data(p, ctx.rng("data"))
    cols = ("s", "amplitude", "hs0", "T_adm", "T_riccati", "hs_growth", "C_gronwall", "C_embedding",
            "ux_l1linf", "window")
    rows = {k: [] for k in cols}
    for s in sorted(p["s_values"]):
        for a in sorted(p["amplitudes"]):
            r = trajectory_table(u0, a, s, p)
            rows["s"].append(s)
            rows["amplitude"].append(a)
            for k in cols[2:]:
                rows[k].append(r[k])
    ctx.series("constants", rows)
    amps = sorted(p["amplitudes"])
    for s in sorted(p["s_values"]):
        sel = [i for i, v in enumerate(rows["s"]) if v == s]
        Ta = np.array([rows["T_adm"][i] for i in sel])
        c2 = np.array([rows["C_embedding"][i] for i in sel])
        c1 = np.array([rows["C_gronwall"][i] for i in sel])
        halving = [Ta[i] / Ta[i + 1] for i in range(len(amps) - 1) if amps[i + 1] == 2 * amps[i]]
        ok = bool(halving) and all(np.isfinite(halving)) and all(abs(x - 2) <= 0.2 for x in halving)
        ctx.check(f"window_halves_s{s:g}", ok, ratios=[float(x) for x in halving])
        ctx.check(f"embedding_constant_stable_s{s:g}", float(np.ptp(c2) / c2.mean()) <= 0.1,
                  spread=float(np.ptp(c2) / c2.mean()))
        ctx.check(f"gronwall_constant_finite_s{s:g}", bool(np.all(np.isfinite(c1))))
        Tr = np.array([rows["T_riccati"][i] for i in sel])
        ctx.check(f"admissible_time_matches_riccati_s{s:g}",
                  float(np.max(np.abs(Ta - Tr) / Tr)) <= 0.02,
                  rel_error=float(np.max(np.abs(Ta - Tr) / Tr)))
    ctx.plot("admissible_time.svg", "constants", "amplitude", ["T_adm", "T_riccati", "window"], kind="loglog",
             title="time for sup|u_x| to reach the threshold vs amplitude")


EXPERIMENT = register(Experiment(
    NAME, "Burgers energy-estimate constants, a priori window and gradient integral",
    {"s_values": Param([1.6, 2.0], "floats"), "amplitudes": Param([1.0, 2.0, 4.0, 8.0], "floats"),
     "N": Param(512, "int"), "band": Param(8, "int"), "window": Param(0.7, "float", "run length times the initial steepness"),
     "growth": Param(2.0, "float", "sup|u_x| growth factor defining the admissible time"),
     "dt": Param(2e-3, "float", "time step at unit amplitude"), "n_frames": Param(201, "int")},
    run, validate, presets={"quick": {"amplitudes": [1.0, 2.0, 4.0], "n_frames": 101}}))
