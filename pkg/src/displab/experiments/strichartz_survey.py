"""Mixed space-time norms of free dispersive groups over seeded random data."""
import numpy as np

from scipy.integrate import trapezoid

from ..spectral_core import Field, make_grid, lp_norm, sobolev_norm
from .base import Experiment, Param, ConfigError, register

NAME = "strichartz_survey"
GROUPS = ("bo", "schrodinger2d")


def admissible(group, p, q, tol=1e-12):
    if group == "bo":
        return abs(2 / p + 1 / q - 0.5) <= tol and p >= 4
    if group == "schrodinger2d":
        return abs(2 / p + 2 / q - 1) <= tol and p > 2
    raise ValueError(f"unknown group {group!r}")


def validate(p):
    if p["group"] not in GROUPS:
        raise ConfigError("params.group", f"must be one of {list(GROUPS)}")
    if not admissible(p["group"], p["p"], p["q"]):
        raise ConfigError("params.q", f"(p, q) = ({p['p']}, {p['q']}) is not admissible for {p['group']}")
    if p["time_samples"] < 64:
        raise ConfigError("params.time_samples", "need at least 64 time samples")
    if p["band"] > p["N"] // 4:
        raise ConfigError("params.band", "must not exceed N/4")


def _symbol(group, g):
    if group == "bo":
        xi = g.wavenumbers
        return -1j * np.sign(xi) * xi ** 2
    return -1j * g.abs_wavenumber() ** 2


def random_data(group, N, band, rng, L=2 * np.pi):
    d = 1 if group == "bo" else 2
    g = make_grid(N, L, d)
    shape = g.shape
    c = np.zeros(shape, complex)
    k = np.fft.fftfreq(N, 1.0 / N)
    if d == 1:
        idx = np.abs(k) <= band
        c[idx] = rng.standard_normal(idx.sum()) + 1j * rng.standard_normal(idx.sum())
        c[0] = c[0].real
        c[N // 2] = 0
        pos = np.arange(1, band + 1)
        c[-pos] = np.conj(c[pos])
        u = Field.from_spectrum(g, c, True)
    else:
        kx, ky = np.meshgrid(k, k, indexing="ij")
        idx = (np.abs(kx) <= band) & (np.abs(ky) <= band)
        c[idx] = rng.standard_normal(idx.sum()) + 1j * rng.standard_normal(idx.sum())
        u = Field.from_spectrum(g, c, False)
    return u * (1.0 / sobolev_norm(u, 0))


def resample_to(u, N):
    """Zero-padded spectral interpolation in every dimension."""
    g = u.grid
    c = u.spectrum()
    M = g.num_points
    k = np.fft.fftfreq(M, 1.0 / M).astype(int)
    out = np.zeros((N,) * g.dim, complex)
    ix = np.ix_(*([k % N] * g.dim))
    out[ix] = c
    return Field.from_spectrum(make_grid(N, g.length, g.dim), out, u.is_real)


def mixed_norm(u0, group, p, q, T, M):
    g = u0.grid
    Lam = _symbol(group, g)
    c = np.fft.fftn(u0.values)
    ts = np.linspace(0, T, M)
    qn = np.empty(M)
    for i, t in enumerate(ts):
        v = np.fft.ifftn(np.exp(t * Lam) * c)
        qn[i] = lp_norm(Field(g, v.real if u0.is_real else v, u0.is_real), q)
    return float(trapezoid(qn ** p, ts) ** (1 / p))


def run(ctx, p):
    rng = ctx.rng("data")
    data = [random_data(p["group"], p["N"], p["band"], rng) for _ in range(p["n_samples"])]
    rows = {"sample": [], "ratio": [], "ratio_refined": [], "rel_change": []}
    for i, u in enumerate(data):
        a = mixed_norm(u, p["group"], p["p"], p["q"], p["T"], p["time_samples"])
        b = mixed_norm(resample_to(u, 2 * p["N"]), p["group"], p["p"], p["q"], p["T"],
                       2 * p["time_samples"] - 1)
        rows["sample"].append(i)
        rows["ratio"].append(a)
        rows["ratio_refined"].append(b)
        rows["rel_change"].append(abs(b - a) / a)
    ctx.series("ratios", rows)
    mx, mr = max(rows["ratio"]), max(rows["ratio_refined"])
    ctx.series("summary", {"max_ratio": [mx], "max_ratio_refined": [mr],
                           "median_ratio": [float(np.median(rows["ratio"]))]})
    ctx.check("max_finite", bool(np.isfinite(mx)))
    ctx.check("refinement_stable", abs(mr - mx) / mx <= p["refine_tol"], rel_change=abs(mr - mx) / mx)
    ctx.plot("ratios.svg", "ratios", "sample", ["ratio", "ratio_refined"],
             title=f"{p['group']} L^{p['p']:g}_t L^{p['q']:g}_x / L2", ylabel="ratio")


EXPERIMENT = register(Experiment(
    NAME, "Space-time Lebesgue norms of the free BO or 2-D Schrodinger group over random data",
    {"group": Param("bo", "str", choices=GROUPS), "p": Param(6.0), "q": Param(6.0),
     "T": Param(1.0), "n_samples": Param(50, "int"), "N": Param(256, "int"),
     "band": Param(16, "int"), "time_samples": Param(64, "int"),
     "refine_tol": Param(0.05)},
    run, validate, presets={"quick": {"n_samples": 10}}))
