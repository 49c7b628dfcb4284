"""Acceptance suite: one PASS/FAIL line per criterion, each at its stated tolerance.

Every criterion recomputes its verdict from the written CSVs or from direct library calls,
rather than trusting the experiment's own check flags.
"""
import time

import numpy as np
import pytest

from displab import constructions as C
from displab import evolvers as ev
from displab import sphere_nls as S
from displab.experiments import ExperimentSpec, run_experiment, REGISTRY
from displab.experiments.fitting import fit_power_law
from displab.experiments.output import read_series
from displab.spectral_core import Field, make_grid

TWO_PI = 2 * np.pi
_RUNS = {}


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        assert ok, detail
    return emit


def default_run(name, tmp_path_factory):
    """Run a default preset once per session; return (root, manifest, seconds)."""
    if name not in _RUNS:
        root = tmp_path_factory.mktemp(name)
        t0 = time.perf_counter()
        man = run_experiment(ExperimentSpec(name), root)
        _RUNS[name] = (root, man, time.perf_counter() - t0)
    return _RUNS[name]


def series(root, name):
    return read_series(root / "series" / f"{name}.csv")


def kdv_soliton(g, c, t):
    y = (g.nodes - c * t) % g.length - g.length / 2
    return 3 * c / np.cosh(np.sqrt(c) / 2 * y) ** 2


# ----------------------------------------------------------------------------- 1


def test_c01_localised_ratio_limit(tmp_path_factory, verdict):
    root, man, secs = default_run("loc_ratio", tmp_path_factory)
    p = man.spec["params"]
    assert (p["s"], p["delta"]) == (1.0, 0.6)
    tab = series(root, "loc_ratio")
    target = 2 ** -0.5
    ok, parts = secs < 10, []
    for a in (0.0, 1.0):
        sel = tab["alpha"] == a
        lam, dev = tab["lam"][sel], np.abs(tab["ratio"][sel] - target) / target
        assert list(lam) == [64, 128, 256, 512]
        ok &= bool(dev[-1] <= 0.02 and np.all(np.diff(dev) < 0))
        parts.append(f"alpha={a:g} dev(512)={dev[-1]:.2e}")
    verdict("criterion 1 localised ratio limit", ok, f"{', '.join(parts)}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 2


def test_c02_bo_ansatz_separation(tmp_path_factory, verdict):
    root, man, secs = default_run("bo_instability", tmp_path_factory)
    p = man.spec["params"]
    assert (p["s"], p["delta"], p["evolved_lam"]) == (1.0, 0.5, 64.0)
    a = series(root, "ansatz_lam256")
    ref = np.sqrt(2) * np.abs(np.sin(a["t"]))
    assert np.allclose(a["reference"], ref) and a["t"][-1] == 1.0
    curve = np.max(np.abs(a["high_separation"] - ref)) / np.max(ref)
    e = series(root, "evolved")
    evolved = np.max(np.abs(e["evolved_separation"] - e["ansatz_full"])) / np.max(e["ansatz_full"])
    ok = curve <= 0.05 and evolved <= 0.15 and secs < 600
    verdict("criterion 2 BO ansatz separation", ok,
            f"curve dev(256)={curve:.2e}, evolved dev(64)={evolved:.2e}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 3


# stated exponents at s=1, delta=0.5
BO_TERM_EXPONENTS = {"low_transport": -3.25, "high_high": -1.75,
                     "dispersive_commutator": -1.5, "low_drift": -3.0}


def test_c03_bo_residual_total_slope(tmp_path_factory, verdict):
    root, man, secs = default_run("residual_scaling", tmp_path_factory)
    tab = series(root, "bo_residual")
    assert list(tab["lam"]) == [32, 64, 128, 256]
    f = fit_power_law(tab["lam"], tab["total"])
    ok = f.slope <= -1.35 and secs < 900
    verdict("criterion 3 BO residual total slope", ok, f"slope {f.slope:.3f} (bound -1.35), {secs:.1f}s")


@pytest.mark.parametrize("term", list(BO_TERM_EXPONENTS))
def test_c03_bo_residual_term_slopes(term, tmp_path_factory, verdict):
    root, _, _ = default_run("residual_scaling", tmp_path_factory)
    tab = series(root, "bo_residual")
    f = fit_power_law(tab["lam"], tab[term])
    want = BO_TERM_EXPONENTS[term]
    verdict(f"criterion 3 BO residual term {term}", abs(f.slope - want) <= 0.2,
            f"slope {f.slope:.3f} vs stated {want} (tol 0.2)")


# ----------------------------------------------------------------------------- 4


def test_c04_burgers_residual_slope(tmp_path_factory, verdict):
    root, man, secs = default_run("residual_scaling", tmp_path_factory)
    p = man.spec["params"]
    assert (p["burgers_s"], p["burgers_delta"]) == (1.6, 1.2)
    tab = series(root, "burgers_residual")
    assert list(tab["lam"]) == [32, 64, 128, 256]
    f = fit_power_law(tab["lam"], tab["total"])
    eps = -f.slope - 1.6
    verdict("criterion 4 Burgers residual slope", f.slope <= -1.6 and eps > 0 and secs < 300,
            f"slope {f.slope:.3f}, eps {eps:.3f}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 5


def test_c05_exact_solution_oracles(verdict):
    t0 = time.perf_counter()
    errs = {}
    g = make_grid(64, TWO_PI)
    x = g.nodes
    u0 = Field(g, np.cos(3 * x) + 0.5 * np.cos(7 * x))
    exact = np.cos(3 * x - 9 * 0.7) + 0.5 * np.cos(7 * x - 49 * 0.7)
    for scheme in ("etd-rk4", "if-rk4"):
        tr = ev.evolve(ev.EquationSpec("bo", nonlinear=False), u0, 0.7, ev.StepperSpec(scheme, dt=0.01))
        errs[f"linear bo {scheme}"] = np.abs(tr.final().values - exact).max()
    tr = ev.evolve(ev.EquationSpec("kdv", nonlinear=False), Field(g, np.cos(4 * x)), 1.0,
                   ev.StepperSpec(dt=0.01))
    errs["linear kdv"] = np.abs(tr.final().values - np.cos(4 * x + 64)).max()
    w = Field(g, np.exp(2j * x) + 0.3 * np.exp(-5j * x), False)
    tr = ev.evolve(ev.EquationSpec("nls", nonlinear=False), w, 1.0, ev.StepperSpec(dt=0.05))
    errs["linear nls"] = np.abs(tr.final().values - (np.exp(2j * x - 4j) + 0.3 * np.exp(-5j * x - 25j))).max()
    lin = max(errs.values())

    g32 = make_grid(32, TWO_PI)
    A = 0.8 * np.exp(-np.cos(g32.nodes)) * (1 + 0.5j)
    tr = ev.evolve(ev.EquationSpec("ode-model"), Field(g32, A, False), 1.0, ev.StepperSpec(dt=5e-4))
    ode = np.abs(tr.final().values - A * np.exp(1j * np.abs(A) ** 2)).max()

    gk = make_grid(256, 60.0)
    tr = ev.evolve(ev.EquationSpec("kdv"), Field(gk, kdv_soliton(gk, 1.0, 0)), 1.0,
                   ev.StepperSpec(dt=1e-3))
    ref = kdv_soliton(gk, 1.0, 1.0)
    sol = np.linalg.norm(tr.final().values - ref) / np.linalg.norm(ref)
    secs = time.perf_counter() - t0
    ok = lin <= 1e-10 and ode <= 1e-8 and sol <= 1e-6 and secs < 120
    verdict("criterion 5 exact-solution oracles", ok,
            f"linear {lin:.1e}, ode model {ode:.1e}, kdv soliton {sol:.1e}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 6


def test_c06_conservation(verdict):
    t0 = time.perf_counter()
    g = make_grid(128, TWO_PI)
    x = g.nodes
    drift = {}
    for kind in ("bo", "kdv"):
        u0 = Field(g, 0.5 * np.cos(x) + 0.2 * np.sin(2 * x))
        m = ev.evolve(ev.EquationSpec(kind), u0, 1.0, ev.StepperSpec(dt=1e-3), n_frames=21).diagnostics["mass"]
        drift[kind] = np.ptp(m) / m[0]
    w0 = Field(g, (1 + 0.3 * np.cos(x)) * np.exp(1j * np.sin(x)), False)
    d = ev.evolve(ev.EquationSpec("nls"), w0, 1.0, ev.StepperSpec(dt=1e-3), n_frames=21).diagnostics
    drift["nls torus"] = np.ptp(d["mass"]) / d["mass"][0]
    energy = {"nls torus": np.ptp(d["hamiltonian"]) / abs(d["hamiltonian"][0])}

    rng = np.random.default_rng(11)
    B = 6
    c = rng.normal(size=(B + 1, 2 * B + 1)) + 1j * rng.normal(size=(B + 1, 2 * B + 1))
    l, m_ = np.arange(B + 1)[:, None], np.arange(-B, B + 1)[None, :]
    c[np.abs(m_) > l] = 0
    sd = S.evolve_sphere_nls(S.HarmonicCoeffs(B, 0.1 * c), 1.0, 0.005, n_frames=21).diagnostics
    drift["nls sphere"] = np.ptp(sd["mass"]) / sd["mass"][0]
    energy["nls sphere"] = np.ptp(sd["energy"]) / abs(sd["energy"][0])
    secs = time.perf_counter() - t0
    ok = max(drift.values()) <= 1e-6 and max(energy.values()) <= 1e-5 and secs < 300
    detail = ", ".join(f"{k} mass {v:.1e}" for k, v in drift.items())
    detail += ", " + ", ".join(f"{k} energy {v:.1e}" for k, v in energy.items())
    verdict("criterion 6 conservation", ok, f"{detail}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 7


def test_c07_sphere_algebra(verdict):
    t0 = time.perf_counter()
    purity = max(S.cubic_decompose(n, 0.2)[2]["low_degree_max"] for n in (4, 8, 16))
    w1 = abs(S.omega_n(1, 0.0) - 0.8)
    ns = [8, 16, 32, 64, 128]
    slopes = {s: fit_power_law(ns, [S.omega_n(n, s) for n in ns]).slope for s in (0.0, 0.2)}
    slope_err = max(abs(v - (0.5 - 2 * s)) for s, v in slopes.items())
    secs = time.perf_counter() - t0
    ok = purity <= 1e-10 and w1 <= 1e-10 and slope_err <= 0.03 and secs < 180
    verdict("criterion 7 sphere algebra", ok,
            f"purity {purity:.1e}, |omega_1 - 4/5| {w1:.1e}, slopes "
            f"{slopes[0.0]:.3f}/{slopes[0.2]:.3f}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 8


def test_c08_highest_weight_ansatz(verdict):
    t0 = time.perf_counter()
    ns, z, q, cons = [8, 16, 32], [], [], []
    for n in ns:
        p = S.HighestWeightParams(n=n, s=0.2, kappa=0.5)
        out = S.ansatz_extract(S.run_highest_weight(p, T=1.0, dt=0.002, n_frames=21), n, p.s, p.kappa)
        z.append(out["z_abs"].max())
        q.append(out["q_l2"].max())
        cons.append(out["mass_identity_error"].max())
    fz, fq = fit_power_law(ns, z), fit_power_law(ns, q)
    secs = time.perf_counter() - t0
    ok = (bool(np.all(np.diff(z) < 0)) and fz.slope <= -0.15 and fq.slope <= -0.55
          and max(cons) <= 1e-6 and secs < 1800)
    verdict("criterion 8 highest-weight ansatz", ok,
            f"|z| slope {fz.slope:.3f} (<= -0.15), |q| slope {fq.slope:.3f} (<= -0.55), "
            f"mass identity {max(cons):.1e}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 9


def test_c09_sphere_decoherence(verdict):
    t0 = time.perf_counter()
    p = S.HighestWeightParams(n=16, s=0.2, kappa=0.8, beta=0.3)
    try:
        out = S.decoherence_pair(p)
    except ValueError as e:
        verdict("criterion 9 sphere decoherence", False, f"setup infeasible: {e}")
        return
    peak = 2.0
    i = int(np.searchsorted(out["t"], out["first_peak_time"]))
    reached = out["separation"][:i + 1].max()
    secs = time.perf_counter() - t0
    ok = reached >= 0.5 * peak and out["initial_separation"] <= 0.1 * peak and secs < 1200
    verdict("criterion 9 sphere decoherence", ok,
            f"reached {reached:.3f}, initial {out['initial_separation']:.3f}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 10


def test_c10_bona_smith(tmp_path_factory, verdict):
    root, man, secs = default_run("bona_smith", tmp_path_factory)
    assert man.spec["params"]["s"] == 2.0
    tab = series(root, "continuity_table")
    dec = bool(np.all(np.diff(tab["hs_difference"]) < 0))
    f = fit_power_law(tab["eps"], tab["v0_l2"])
    verdict("criterion 10 Bona-Smith continuity", dec and f.slope >= 1.8 and secs < 300,
            f"table decreasing {dec}, v0 slope {f.slope:.3f} (>= 1.8), {secs:.1f}s")


# ----------------------------------------------------------------------------- 11


def test_c11_torus_decoherence(tmp_path_factory, verdict):
    root, man, secs = default_run("nls_decoherence_torus", tmp_path_factory)
    p = man.spec["params"]
    assert (p["d"], p["s"]) == (1, -0.25)
    tab = series(root, "separation")
    sep, model = tab["separation"], tab["model"]
    ratio = sep[-1] / sep[0]
    i = int(np.argmax(model))
    dev = np.max(np.abs(sep[:i + 1] - model[:i + 1]) / model[:i + 1])
    verdict("criterion 11 torus decoherence", ratio >= 10 and dev <= 0.2 and secs < 600,
            f"ratio {ratio:.2f}, model deviation {dev:.3f}, {secs:.1f}s")


# ----------------------------------------------------------------------------- 12


def test_c12_quick_presets_are_deterministic(tmp_path, verdict):
    bad = []
    for name in sorted(REGISTRY):
        a = run_experiment(ExperimentSpec(name, preset="quick"), tmp_path / name / "a")
        b = run_experiment(ExperimentSpec(name, preset="quick"), tmp_path / name / "b")
        csv = [k for k in a.checksums if k.endswith(".csv")]
        if not csv or any(a.checksums[k] != b.checksums.get(k) for k in csv):
            bad.append(name)
        else:
            for k in csv:
                assert (tmp_path / name / "a" / k).read_bytes() == (tmp_path / name / "b" / k).read_bytes()
    verdict("criterion 12 determinism", not bad,
            f"{len(REGISTRY) - len(bad)}/{len(REGISTRY)} quick presets bit-identical")


# ----------------------------------------------------------------------------- ansatz error at d=2


def test_c13_nls_ansatz_error_decreasing_d2(verdict):
    t0 = time.perf_counter()
    errs = []
    for n in (16, 32, 64):
        p = C.NLSConcentrationParams(d=2, n=n)
        out = C.nls_ansatz_error(p, np.linspace(0, p.t_n, 9), C.concentration_grid(p, N=512))
        errs.append(out["hs_distance"].max())
    secs = time.perf_counter() - t0
    ok = bool(np.all(np.diff(errs) < 0))
    verdict("criterion note d=2 ansatz error decreasing", ok,
            f"max H^s distance {', '.join(f'{e:.5f}' for e in errs)}, {secs:.1f}s")
