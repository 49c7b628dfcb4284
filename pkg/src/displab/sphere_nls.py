"""Spherical-harmonic analysis on S^2 and cubic NLS with highest-weight data.

Basis: orthonormal ``Y_l^m = P_l^|m|(cos theta) e^{i m phi}`` with P normalised so that
``2 pi int_{-1}^{1} P^2 dx = 1`` (no Condon-Shortley phase, so ``sin^n theta e^{i n phi}`` has a
positive (n, n) coefficient).  Quadrature: Gauss-Legendre in ``x = cos theta`` times an
equispaced longitude grid.  With ``2B+2`` latitudes and ``4B+2`` longitudes the projection of
a cubic of bandwidth-B fields onto degrees <= B is exact, so the truncated flow conserves
mass exactly.

Coefficients are stored as an array ``c[l, m + B]`` of shape ``(B+1, 2B+1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np

from .evolvers import etdrk4_stepper, BlowUpError

__all__ = [
    "SphereGrid", "SphereField", "HarmonicCoeffs", "HighestWeightParams",
    "legendre_table", "sht_forward", "sht_inverse", "highest_weight", "omega_n",
    "psi_lp_norm", "cubic_decompose", "evolve_sphere_nls", "SphereTrajectory",
    "ansatz_extract", "decoherence_pair", "rotate", "sphere_sobolev_norm",
    "sphere_energy", "h12_coercivity", "run_highest_weight", "phi_n_coeffs",
    "phi_n_coefficient", "laplacian",
]


def legendre_table(m: int, lmax: int, x: np.ndarray) -> np.ndarray:
    """Normalised P_l^m(x) for l = m..lmax, shape (len(x), lmax - m + 1)."""
    x = np.asarray(x, float)
    out = np.zeros((x.size, lmax - m + 1))
    if lmax < m:
        return out
    sin = np.sqrt(np.clip(1 - x * x, 0, None))
    # log-space start avoids underflow of sin^m for large m
    logp = -0.5 * np.log(4 * np.pi)
    for k in range(1, m + 1):
        logp = logp + 0.5 * np.log((2 * k + 1) / (2 * k))
    with np.errstate(divide="ignore"):
        pmm = np.exp(logp + m * np.log(sin)) if m else np.full(x.size, np.exp(logp))
    out[:, 0] = pmm
    if lmax == m:
        return out
    out[:, 1] = np.sqrt(2 * m + 3) * x * pmm
    for l in range(m + 2, lmax + 1):
        a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = np.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
        out[:, l - m] = a * (x * out[:, l - m - 1] - b * out[:, l - m - 2])
    return out


@dataclass(frozen=True)
class SphereGrid:
    B: int
    n_lat: Optional[int] = None
    n_lon: Optional[int] = None

    def __post_init__(self):
        if self.B < 0:
            raise ValueError("bandwidth must be nonnegative")
        object.__setattr__(self, "n_lat", self.n_lat or 2 * self.B + 2)
        object.__setattr__(self, "n_lon", self.n_lon or 4 * self.B + 2)
        if self.n_lat < 2 * self.B + 1:
            raise ValueError("need at least 2B+1 latitude nodes")
        if self.n_lon < 2 * self.B + 1:
            raise ValueError("need at least 2B+1 longitude nodes")

    @property
    def x(self):
        return _gauss(self.n_lat)[0]

    @property
    def weights(self):
        return _gauss(self.n_lat)[1]

    @property
    def theta(self):
        return np.arccos(self.x)

    @property
    def phi(self):
        return 2 * np.pi * np.arange(self.n_lon) / self.n_lon

    @property
    def shape(self):
        return (self.n_lat, self.n_lon)

    def table(self, m):
        return _table(self.B, self.n_lat, abs(int(m)))

    def integrate(self, f):
        """Quadrature of a (lat, lon) array over the sphere."""
        return float(np.real(np.sum(self.weights[:, None] * f)) * 2 * np.pi / self.n_lon)


@lru_cache(maxsize=16)
def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=4096)
def _table(B, n_lat, m):
    return legendre_table(m, B, _gauss(n_lat)[0])


@dataclass(frozen=True, eq=False)
class HarmonicCoeffs:
    B: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, complex)
        if c.shape != (self.B + 1, 2 * self.B + 1):
            raise ValueError("coefficient array has the wrong shape")
        object.__setattr__(self, "c", c)

    @classmethod
    def zeros(cls, B):
        return cls(B, np.zeros((B + 1, 2 * B + 1), complex))

    def get(self, l, m):
        return self.c[l, m + self.B]

    def degrees(self):
        return np.arange(self.B + 1)

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.c) ** 2)))

    def __add__(self, o):
        return HarmonicCoeffs(self.B, self.c + o.c)

    def __sub__(self, o):
        return HarmonicCoeffs(self.B, self.c - o.c)

    def __mul__(self, a):
        return HarmonicCoeffs(self.B, self.c * a)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SphereField:
    grid: SphereGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, complex)
        if v.shape != self.grid.shape:
            raise ValueError("values do not match the grid")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, f):
        th, ph = np.meshgrid(grid.theta, grid.phi, indexing="ij")
        return cls(grid, f(th, ph))

    def l2_norm(self):
        return np.sqrt(self.grid.integrate(np.abs(self.values) ** 2))

    def lp_norm(self, p):
        if np.isinf(p):
            return float(np.abs(self.values).max())
        return self.grid.integrate(np.abs(self.values) ** p) ** (1 / p)

    def __sub__(self, o):
        return SphereField(self.grid, self.values - o.values)


def _check_bandwidth(grid, B):
    if B != grid.B:
        raise ValueError(f"bandwidth mismatch: {B} vs grid {grid.B}")


def sht_forward(u: SphereField) -> HarmonicCoeffs:
    g = u.grid
    B = g.B
    F = np.fft.fft(u.values, axis=1) * (2 * np.pi / g.n_lon)
    out = np.zeros((B + 1, 2 * B + 1), complex)
    w = g.weights
    for m in range(-B, B + 1):
        P = g.table(m)
        out[abs(m):, m + B] = (w * F[:, m % g.n_lon]) @ P
    return HarmonicCoeffs(B, out)


def sht_inverse(c: HarmonicCoeffs, grid: SphereGrid) -> SphereField:
    _check_bandwidth(grid, c.B)
    B = c.B
    F = np.zeros((grid.n_lat, grid.n_lon), complex)
    for m in range(-B, B + 1):
        P = grid.table(m)
        F[:, m % grid.n_lon] = P @ c.c[abs(m):, m + B]
    return SphereField(grid, np.fft.ifft(F, axis=1) * grid.n_lon)


def rotate(c: HarmonicCoeffs, alpha: float) -> HarmonicCoeffs:
    """Pull-back by the rotation phi -> phi + alpha about the polar axis."""
    m = np.arange(-c.B, c.B + 1)
    return HarmonicCoeffs(c.B, c.c * np.exp(1j * m * alpha)[None, :])


def sphere_sobolev_norm(c: HarmonicCoeffs, s: float) -> float:
    l = c.degrees()
    w = (1.0 + l * (l + 1.0)) ** s
    return float(np.sqrt(np.sum(w[:, None] * np.abs(c.c) ** 2)))


def laplacian(c: HarmonicCoeffs) -> HarmonicCoeffs:
    l = c.degrees()
    return HarmonicCoeffs(c.B, -(l * (l + 1.0))[:, None] * c.c)


# ----------------------------------------------------------------------------- highest weight

def highest_weight(n: int, grid: SphereGrid) -> SphereField:
    """psi_n = sin^n(theta) e^{i n phi}, the restriction of (x1 + i x2)^n."""
    if 3 * n > grid.B:
        raise ValueError(f"bandwidth {grid.B} too small for n={n} (need 3n <= B)")
    return SphereField.from_function(grid, lambda th, ph: np.sin(th) ** n * np.exp(1j * n * ph))


def _psi_moments(n, p, nodes=None):
    """int_{S^2} |psi_n|^p exactly by Gauss-Legendre (p even)."""
    deg = p * n
    need = deg // 2 + 1
    nodes = nodes or need
    if 2 * nodes - 1 < deg:
        raise ValueError("insufficient quadrature degree")
    x, w = _gauss(nodes)
    return 2 * np.pi * float(np.sum(w * (1 - x * x) ** (p * n / 2)))


def psi_lp_norm(n: int, p: float) -> float:
    if p == 2 or p == 4 or (float(p).is_integer() and int(p) % 2 == 0):
        return _psi_moments(n, int(p)) ** (1 / p)
    x, w = _gauss(max(64, 4 * n + 8))
    return (2 * np.pi * float(np.sum(w * (1 - x * x) ** (p * n / 2)))) ** (1 / p)


def omega_n(n: int, s: float) -> float:
    """||phi_n||_4^4 / ||phi_n||_2^2 with phi_n = n^(1/4 - s) psi_n."""
    a = n ** (0.25 - s)
    return a ** 2 * _psi_moments(n, 4) / _psi_moments(n, 2)


def phi_n_coefficient(n: int, s: float) -> float:
    """(n, n) coefficient of phi_n in the orthonormal basis."""
    return n ** (0.25 - s) * np.sqrt(_psi_moments(n, 2))


def phi_n_coeffs(n: int, s: float, B: int) -> HarmonicCoeffs:
    c = HarmonicCoeffs.zeros(B)
    c.c[n, n + B] = phi_n_coefficient(n, s)
    return c


def cubic_decompose(n: int, s: float, grid: Optional[SphereGrid] = None):
    """Split |phi_n|^2 phi_n = omega_n phi_n + r_n; returns (omega, r_n coefficients, info)."""
    grid = grid or SphereGrid(3 * n + 2)
    if grid.B < 3 * n:
        raise ValueError("bandwidth must be at least 3n")
    phi = highest_weight(n, grid)
    phi = SphereField(grid, phi.values * n ** (0.25 - s))
    cub = sht_forward(SphereField(grid, np.abs(phi.values) ** 2 * phi.values))
    c0 = phi_n_coefficient(n, s)
    omega = (cub.get(n, n) / c0).real
    r = cub.c.copy()
    r[n, n + grid.B] -= omega * c0
    r = HarmonicCoeffs(grid.B, r)
    low = np.abs(r.c[: n + 1]).max()
    orders = np.nonzero(np.abs(cub.c).max(axis=0) > 1e-12 * np.abs(cub.c).max())[0] - grid.B
    return omega, r, {"low_degree_max": float(low / abs(cub.get(n, n))),
                      "orders": orders.tolist(), "r_l2": r.l2_norm(),
                      "omega_quadrature": omega_n(n, s)}


def h12_coercivity(n: int, B: int) -> bool:
    """Integer check of l(l+1) - n(n+1) >= l for n+1 <= l <= B."""
    return all(l * (l + 1) - n * (n + 1) >= l for l in range(n + 1, B + 1))


# ----------------------------------------------------------------------------- evolution

@dataclass
class SphereTrajectory:
    times: np.ndarray
    coeffs: List[HarmonicCoeffs]
    grid: SphereGrid
    diagnostics: Dict[str, np.ndarray] = field(default_factory=dict)


class _SingleOrder:
    """Nonlinear term when every coefficient has the same order m (an invariant subspace)."""

    def __init__(self, grid, m, sign):
        self.P = grid.table(m)          # (n_lat, B-m+1)
        self.wP = (grid.weights[:, None] * self.P).T * 2 * np.pi
        self.sign = sign

    def __call__(self, v):
        f = self.P @ v
        return -1j * self.sign * (self.wP @ (np.abs(f) ** 2 * f))


class _General:
    def __init__(self, grid, sign):
        self.grid, self.sign = grid, sign

    def __call__(self, v):
        B = self.grid.B
        c = HarmonicCoeffs(B, v.reshape(B + 1, 2 * B + 1))
        u = sht_inverse(c, self.grid).values
        return -1j * self.sign * sht_forward(SphereField(self.grid, np.abs(u) ** 2 * u)).c.ravel()


def _single_order(c: HarmonicCoeffs):
    nz = np.nonzero(np.abs(c.c).max(axis=0))[0]
    return int(nz[0] - c.B) if len(nz) == 1 else None


def sphere_energy(c: HarmonicCoeffs, grid: SphereGrid, sign=1.0) -> float:
    l = c.degrees()
    grad = float(np.sum((l * (l + 1.0))[:, None] * np.abs(c.c) ** 2))
    u = sht_inverse(c, grid).values
    return grad + sign * 0.5 * grid.integrate(np.abs(u) ** 4)


def evolve_sphere_nls(u0: HarmonicCoeffs, T: float, dt: float, sign: str = "defocusing",
                      grid: Optional[SphereGrid] = None, n_frames: int = 21,
                      mu: float = 0.0, nonlinear: bool = True, diagnostics: bool = True):
    """i u_t + Lap u - sign |u|^2 u = 0, Galerkin-truncated at degree B.

    Integrated in the frame w = e^{i mu t} u (exact for the linear part); ``mu`` is a
    free reference frequency and does not change the solution.
    """
    if isinstance(u0, SphereField):
        grid = grid or u0.grid
        u0 = sht_forward(u0)
    grid = grid or SphereGrid(u0.B)
    _check_bandwidth(grid, u0.B)
    sg = 1.0 if sign == "defocusing" else -1.0
    B = u0.B
    l = np.arange(B + 1, dtype=float)
    m = _single_order(u0)
    if m is not None:
        lam = -1j * (l[abs(m):] * (l[abs(m):] + 1) - mu)
        Nl = _SingleOrder(grid, m, sg)
        v = u0.c[abs(m):, m + B].copy()

        def pack(v):
            c = np.zeros((B + 1, 2 * B + 1), complex)
            c[abs(m):, m + B] = v
            return HarmonicCoeffs(B, c)
    else:
        lam = np.broadcast_to((-1j * (l * (l + 1) - mu))[:, None], (B + 1, 2 * B + 1)).ravel()
        Nl = _General(grid, sg)
        v = u0.c.ravel().copy()

        def pack(v):
            return HarmonicCoeffs(B, v.reshape(B + 1, 2 * B + 1))
    if not nonlinear:
        Nl = lambda v: np.zeros_like(v)
    seg = max(n_frames - 1, 1)
    n = max(1, int(np.ceil(T / dt / seg - 1e-9))) * seg
    h = T / n
    every = n // seg
    step = etdrk4_stepper(lam, Nl, h)
    ref = max(np.abs(v).max(), 1e-300)
    frames, times = [pack(v)], [0.0]
    for i in range(1, n + 1):
        v = step(v)
        if i % every == 0:
            if not np.all(np.isfinite(v)) or np.abs(v).max() > 1e6 * ref:
                raise BlowUpError(f"coefficients blew up at t={i * h:.4g}")
            t = i * h
            frames.append(pack(v) * np.exp(-1j * mu * t))
            times.append(t)
    traj = SphereTrajectory(np.array(times), frames, grid)
    if diagnostics:
        traj.diagnostics = {
            "mass": np.array([c.l2_norm() ** 2 for c in frames]),
            "energy": np.array([sphere_energy(c, grid, sg) for c in frames]),
        }
    return traj


# ----------------------------------------------------------------------------- ansatz variables

@dataclass(frozen=True)
class HighestWeightParams:
    n: int = 8
    s: float = 0.2
    kappa: float = 0.5
    beta: float = 0.3
    short_time_eps: float = 0.05

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not 1 / 8 < self.s < 1 / 4:
            raise ValueError("s must lie in (1/8, 1/4)")
        if not 0 < self.kappa <= 1:
            raise ValueError("kappa must lie in (0, 1]")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")

    @property
    def B(self):
        return 3 * self.n + 2

    @property
    def omega(self):
        return omega_n(self.n, self.s)

    @property
    def reference_frequency(self):
        return self.n * (self.n + 1) + self.kappa ** 2 * self.omega

    @property
    def short_time(self):
        """T_n = n^(5s/2 - 3/8 - eps) for the short-time variant."""
        return self.n ** (2.5 * self.s - 0.375 - self.short_time_eps)


def run_highest_weight(p: HighestWeightParams, T=1.0, dt=0.01, n_frames=21, nonlinear=True,
                       kappa=None):
    kappa = p.kappa if kappa is None else kappa
    u0 = phi_n_coeffs(p.n, p.s, p.B) * kappa
    mu = p.n * (p.n + 1) + kappa ** 2 * p.omega
    return evolve_sphere_nls(u0, T, dt, grid=SphereGrid(p.B), n_frames=n_frames, mu=mu,
                             nonlinear=nonlinear)


def ansatz_extract(traj: SphereTrajectory, n: int, s: float, kappa: float):
    """z_n(t) and q_n(t) from u = kappa e^{-it(n(n+1)+kappa^2 omega_n)}((1+z) phi_n + q)."""
    B = traj.grid.B
    c0 = phi_n_coefficient(n, s)
    om = omega_n(n, s)
    nphi2 = c0 ** 2
    l = np.arange(B + 1, dtype=float)
    w12 = np.sqrt(1 + l * (l + 1))
    z, q2, q12, cons = [], [], [], []
    for t, c in zip(traj.times, traj.coeffs):
        ph = np.exp(1j * t * (n * (n + 1) + kappa ** 2 * om)) / kappa
        cc = c.c * ph
        zz = cc[n, n + B] / c0 - 1
        r = cc.copy()
        r[n, n + B] = 0
        a = np.abs(r) ** 2
        qn = np.sqrt(a.sum())
        z.append(zz)
        q2.append(qn)
        q12.append(np.sqrt(np.sum(w12[:, None] * a)))
        cons.append(abs(abs(1 + zz) ** 2 * nphi2 + qn ** 2 - nphi2) / nphi2)
    z = np.array(z)
    out = {"t": traj.times, "z_abs": np.abs(z), "z_arg": np.angle(z), "q_l2": np.array(q2),
           "q_h12": np.array(q12), "mass_identity_error": np.array(cons)}
    if abs(traj.times[0]) == 0 and (abs(z[0]) > 1e-10 or q2[0] > 1e-10 * np.sqrt(nphi2)):
        raise ValueError("trajectory does not start from kappa * phi_n")
    return out


def decoherence_pair(p: HighestWeightParams, T: Optional[float] = None, dt=0.01, n_frames=41):
    """Evolve kappa phi_n and kappa_n phi_n with (kappa^2 - kappa_n^2) omega_n = n^beta."""
    om = p.omega
    kn2 = p.kappa ** 2 - p.n ** p.beta / om
    if kn2 <= 0:
        raise ValueError(f"kappa_n^2 = {kn2:.4g} <= 0: beta too large for n={p.n}, "
                         f"kappa={p.kappa} (omega_n = {om:.4g})")
    kn = np.sqrt(kn2)
    T = T if T is not None else 1.25 * np.pi / p.n ** p.beta
    a = run_highest_weight(p, T, dt, n_frames)
    b = run_highest_weight(p, T, dt, n_frames, kappa=kn)
    norm = p.kappa * sphere_sobolev_norm(phi_n_coeffs(p.n, p.s, p.B), p.s)
    sep = np.array([sphere_sobolev_norm(x - y, p.s) for x, y in zip(a.coeffs, b.coeffs)]) / norm
    t = a.times
    pred = np.abs(np.exp(1j * t * p.n ** p.beta) - 1)
    two_phase = np.abs(p.kappa - kn * np.exp(1j * t * p.n ** p.beta)) / p.kappa
    return {"t": t, "separation": sep, "prediction": pred, "two_phase": two_phase,
            "kappa_n": kn, "first_peak_time": np.pi / p.n ** p.beta,
            "initial_separation": sep[0]}
