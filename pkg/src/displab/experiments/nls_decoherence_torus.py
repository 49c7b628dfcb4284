"""Flow-map decoherence for focusing NLS on the torus from concentrated data, s < 0."""
import numpy as np

from .. import constructions as C
from .. import evolvers as ev
from ..spectral_core import sobolev_norm
from .base import Experiment, Param, ConfigError, register

NAME = "nls_decoherence_torus"


def _params(p, kappa):
    return C.NLSConcentrationParams(d=p["d"], s=p["s"], n=p["n"], kappa=kappa)


def validate(p):
    if p["d"] not in (1, 2):
        raise ConfigError("params.d", "must be 1 or 2")
    if not -0.5 < p["s"] < 0:
        raise ConfigError("params.s", "must lie in (-1/2, 0)")
    if not 0 < p["eta"] < 1:
        raise ConfigError("params.eta", "must lie in (0, 1)")
    if p["kappa"] <= 0:
        raise ConfigError("params.kappa", "must be positive")
    try:
        a = _params(p, p["kappa"])
    except ValueError as e:
        raise ConfigError("params.n", str(e)) from None
    tp = peak_time(p)
    if p["T_factor"] * tp > a.t_n:
        raise ConfigError("params.kappa", f"first phase peak at t={tp:.3g} lies beyond t_n={a.t_n:.3g}")


def peak_time(p):
    a, b = _params(p, p["kappa"]), _params(p, p["kappa"] * (1 - p["eta"]))
    return np.pi / (a.amplitude ** 2 - b.amplitude ** 2)


def run(ctx, p):
    a, b = _params(p, p["kappa"]), _params(p, p["kappa"] * (1 - p["eta"]))
    g = C.concentration_grid(a, p["N"])
    ctx.resolution("grid", {"N": p["N"], "d": p["d"], "length": g.length})
    a0, b0 = C.nls_concentrating_data(a, g), C.nls_concentrating_data(b, g)
    tp = peak_time(p)
    T = p["T_factor"] * tp
    dt = p["dt_scale"] / a.amplitude ** 2
    eq = ev.EquationSpec("nls", sign="focusing", nonlinear=p["nonlinear"])
    st = ev.StepperSpec(dt=dt)
    ta = ev.evolve(eq, a0, T, st, n_frames=p["n_frames"])
    tb = ev.evolve(eq, b0, T, st, n_frames=p["n_frames"])
    t = ta.times
    sep = np.array([sobolev_norm(x - y, p["s"]) for x, y in zip(ta.snapshots, tb.snapshots)])
    if p["nonlinear"]:
        model = np.array([sobolev_norm(ev.nls_ode_solution(a0, s) - ev.nls_ode_solution(b0, s), p["s"])
                          for s in t])
    else:
        model = np.full_like(t, sep[0])
    i = int(np.argmax(model))
    dev = float(np.max(np.abs(sep[:i + 1] - model[:i + 1])) / model[i])
    ratio = float(sep[-1] / sep[0])
    mass = max(float(np.ptp(x.diagnostics["mass"]) / x.diagnostics["mass"][0]) for x in (ta, tb))
    en = max(float(np.ptp(x.diagnostics["hamiltonian"]) / abs(x.diagnostics["hamiltonian"][0]))
             for x in (ta, tb))
    ctx.series("separation", {"t": t, "t_over_peak": t / tp, "separation": sep, "model": model})
    ctx.note("peak_time", tp)
    ctx.note("t_n", a.t_n)
    ctx.check("growth_ratio", ratio >= p["ratio_min"], ratio=ratio)
    ctx.check("reaches_half_model", bool(sep.max() >= 0.5 * model.max()))
    ctx.check("model_agreement", dev <= p["model_tol"], rel_dev_to_peak=dev)
    ctx.check("mass_drift", mass <= 1e-6, drift=mass)
    ctx.check("energy_drift", en <= 1e-5, drift=en)
    ctx.plot("separation.svg", "separation", "t_over_peak", ["separation", "model"],
             title="H^s separation against the two-phase model", xlabel="t / t_peak")


EXPERIMENT = register(Experiment(
    NAME, "Focusing NLS on the torus: two nearby concentrated data decohere before t_n",
    {"d": Param(1, "int"), "s": Param(-0.25), "n": Param(64, "int"),
     "kappa": Param(1000.0, "float", "amplitude factor; large values keep the ODE regime"),
     "eta": Param(0.08, "float", "relative amplitude gap"),
     "N": Param(8192, "int"), "T_factor": Param(1.0, "float", "run length in units of the peak time"),
     "dt_scale": Param(0.02, "float", "dt * amplitude^2"),
     "n_frames": Param(31, "int"), "nonlinear": Param(True, "bool"),
     "ratio_min": Param(10.0), "model_tol": Param(0.2)},
    run, validate,
    presets={"quick": {"N": 4096, "n_frames": 21}}))
