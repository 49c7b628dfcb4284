"""Explicit approximate-solution families and their residual certificates.

Large carrier frequencies are handled with :class:`~displab.bands.BandField`, which keeps
the envelopes on a coarse grid and evaluates every multiplier at the true wavenumber.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .bands import BandField, carrier_grid
from .spectral_core import (BumpProfile, Field, TorusGrid, make_grid, sobolev_norm,
                            lp_norm, derivative, hilbert_transform, resample)
from . import evolvers as ev

__all__ = [
    "BurgersFamilyParams", "BOFamilyParams", "NLSConcentrationParams", "ResidualReport",
    "burgers_approx", "burgers_approx_bands", "burgers_residual_norm",
    "bo_grid", "bo_full_grid", "bo_phase_consistency", "loc_ratio_direct", "bo_initial_data", "bo_initial_bands", "bo_low_family", "bo_approx",
    "bo_approx_bands", "bo_high_bands", "bo_residual_decomposition", "loc_ratio",
    "nls_concentrating_data", "semiclassical_energy", "nls_ansatz_error",
    "nls_growth_prediction", "ResolutionGuardError", "concentration_grid",
    "interpolation_slack",
]

DEFAULT_PHI = BumpProfile("compact-polynomial", radius=2.0, plateau=1.0)


class ResolutionGuardError(ValueError):
    """Grid does not resolve the requested construction."""


def _companion(phi, phit):
    return phit if phit is not None else phi.companion()


# ============================================================================ Burgers

@dataclass(frozen=True)
class BurgersFamilyParams:
    omega: float = 1.0
    lam: float = 32.0
    delta: float = 1.2
    s: float = 1.6
    phi: BumpProfile = DEFAULT_PHI
    phit: Optional[BumpProfile] = None

    def __post_init__(self):
        if not self.lam >= 8:
            raise ValueError("lam must be >= 8")
        if not 1 < self.delta < 2:
            raise ValueError("delta must lie in (1, 2)")
        if not self.s > 1.5:
            raise ValueError("s must exceed 3/2")
        object.__setattr__(self, "phit", _companion(self.phi, self.phit))
        if self.phit.plateau < self.phi.radius:
            raise ValueError("companion profile must equal 1 on the support of phi")

    @property
    def amp(self):
        return self.lam ** (-self.delta / 2 - self.s)

    @property
    def width(self):
        return self.lam ** self.delta


def _check_resolved(grid: TorusGrid, lam, support):
    if grid.spacing > 2 * np.pi / (8 * lam):
        raise ResolutionGuardError(
            f"need at least 8 points per wavelength: dx={grid.spacing:.4g}, lam={lam}")
    if grid.length < 2 * support:
        raise ResolutionGuardError("box does not contain the profile support")


def burgers_approx(p: BurgersFamilyParams, t: float, grid: TorusGrid) -> Field:
    """omega/lam phit(x/lam^delta) + lam^{-delta/2-s} phi(x/lam^delta) cos(lam x - omega t),
    sampled with x measured from the box centre."""
    _check_resolved(grid, p.lam, p.phit.radius * p.width)
    y = grid.nodes - grid.length / 2
    v = (p.omega / p.lam * p.phit(y / p.width)
         + p.amp * p.phi(y / p.width) * np.cos(p.lam * y - p.omega * t))
    return Field(grid, v)


def _burgers_box(p, N):
    return carrier_grid(p.lam, 8 * p.phit.radius * p.width, N)


def burgers_approx_bands(p: BurgersFamilyParams, t: float, N: int = 2048):
    g = _burgers_box(p, N)
    y = g.nodes - g.length / 2
    x0 = g.length / 2
    low = BandField.low(g, p.lam, p.omega / p.lam * p.phit(y / p.width))
    high = BandField.wave(g, p.lam, p.amp * p.phi(y / p.width), -p.omega * t - p.lam * x0)
    return low, high


@dataclass
class ResidualReport:
    param_block: dict
    terms: dict
    total: float
    predicted_exponent: float
    fitted_exponent: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def parts_sum(self):
        return float(sum(self.terms.values()))

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, default=float)


def burgers_residual_norm(p: BurgersFamilyParams, t: float, N: int = 2048) -> ResidualReport:
    """L2 norm of u_t + u u_x for the Burgers family, split by low/high interactions."""
    low, high = burgers_approx_bands(p, t, N)
    g = low.grid
    y = g.nodes - g.length / 2
    # d/dt of the high part: omega * amp * phi * sin(lam x - omega t)
    ht = BandField.wave(g, p.lam, p.omega * p.amp * p.phi(y / p.width),
                        -p.omega * t - p.lam * g.length / 2 - np.pi / 2)
    dl, dh = low.derivative(), high.derivative()
    parts = {
        "transport": ht + low * dh,
        "high_low": high * dl,
        "high_high": high * dh,
        "low_low": low * dl,
    }
    total = parts["transport"] + parts["high_low"] + parts["high_high"] + parts["low_low"]
    terms = {k: v.l2_norm() for k, v in parts.items()}
    return ResidualReport(
        {"omega": p.omega, "lam": p.lam, "delta": p.delta, "s": p.s, "t": t},
        terms, total.l2_norm(), -p.s,
        extra={"tail": max(low.tail_fraction(), high.tail_fraction()),
               "hs_norm": (low + high).sobolev_norm(p.s)})


# ============================================================================ Benjamin-Ono

@dataclass(frozen=True)
class BOFamilyParams:
    omega: float = 1.0
    lam: float = 64.0
    delta: float = 0.5
    s: float = 1.0
    phi: BumpProfile = DEFAULT_PHI
    phit: Optional[BumpProfile] = None
    enforce_small_omega: bool = True

    def __post_init__(self):
        if not self.lam >= 8:
            raise ValueError("lam must be >= 8")
        if not self.s > 0:
            raise ValueError("s must be positive")
        if not max(1 - self.s, 0) < self.delta < 1:
            raise ValueError(f"delta must lie in (max(1-s,0), 1), got {self.delta}")
        if self.enforce_small_omega and abs(self.omega) > self.omega_bound:
            raise ValueError(f"|omega| must not exceed 0.1*lam^((1-delta)/2) = {self.omega_bound:.4g}")
        object.__setattr__(self, "phit", _companion(self.phi, self.phit))
        if self.phit.plateau < self.phi.radius:
            raise ValueError("companion profile must equal 1 on the support of phi")

    @property
    def omega_bound(self):
        return 0.1 * self.lam ** ((1 - self.delta) / 2)

    @property
    def omega_small(self) -> bool:
        return abs(self.omega) <= self.omega_bound

    @property
    def amp(self):
        return self.lam ** (-0.5 - self.delta / 2 - self.s)

    @property
    def width(self):
        return self.lam ** (1 + self.delta)

    def with_(self, **kw):
        d = dict(omega=self.omega, lam=self.lam, delta=self.delta, s=self.s, phi=self.phi,
                 phit=self.phit, enforce_small_omega=self.enforce_small_omega)
        d.update(kw)
        return BOFamilyParams(**d)


def bo_box_length(p: BOFamilyParams) -> float:
    return 16 * p.width * p.phit.radius


def bo_grid(p: BOFamilyParams, N: int) -> TorusGrid:
    """Carrier-aligned box of length about 16 lam^(1+delta) R, with N points."""
    return carrier_grid(p.lam, bo_box_length(p), N)


def bo_full_grid(p: BOFamilyParams, N: int) -> TorusGrid:
    """Fine grid over the same carrier-aligned box, for direct evolution."""
    m = int(np.ceil(p.lam * bo_box_length(p) / (2 * np.pi) - 1e-9))
    return make_grid(N, 2 * np.pi * m / p.lam)


def _centred(g):
    return g.nodes - g.length / 2


def bo_initial_data(p: BOFamilyParams, grid: TorusGrid) -> Field:
    _check_resolved(grid, p.lam, p.phit.radius * p.width)
    y = _centred(grid)
    v = -p.omega / p.lam * p.phit(y / p.width) - p.amp * p.phi(y / p.width) * np.cos(p.lam * y)
    return Field(grid, v)


def bo_low_data(p: BOFamilyParams, grid: TorusGrid) -> Field:
    return Field(grid, -p.omega / p.lam * p.phit(_centred(grid) / p.width))


def bo_high_bands(p: BOFamilyParams, grid: TorusGrid, t: float, u_low0=None) -> BandField:
    """-amp phi_lam cos(-lam^2 t + lam y - lam t u_low(0, y)) as a two-band field."""
    y = _centred(grid)
    if u_low0 is None:
        u_low0 = bo_low_data(p, grid).values
    theta = -_wrap(p.lam ** 2 * t) - p.lam * t * u_low0 - _wrap(p.lam * grid.length / 2)
    return BandField.wave(grid, p.lam, -p.amp * p.phi(y / p.width), theta)


def _wrap(a):
    return float(np.mod(a, 2 * np.pi))


def bo_initial_bands(p: BOFamilyParams, grid: TorusGrid) -> BandField:
    return BandField.low(grid, p.lam, bo_low_data(p, grid).values) + bo_high_bands(p, grid, 0.0)


def bo_low_family(p: BOFamilyParams, grid: TorusGrid, T: float = 1.0, dt: float = 0.05,
                  n_frames: int = 21, C: float = 10.0):
    """Evolve BO from the low data; return (trajectory, bound record)."""
    u0 = bo_low_data(p, grid)
    traj = ev.evolve(ev.EquationSpec("bo"), u0, T, ev.StepperSpec(dt=dt), n_frames=n_frames)
    lam, d, w = p.lam, p.delta, abs(p.omega)
    rec = {"t": traj.times.tolist()}
    for k in (0, 1, 2):
        rec[f"dx{k}_l2"] = [lp_norm(derivative(f, k) if k else f, 2) for f in traj.snapshots]
        rec[f"dx{k}_l2_bound"] = C * w * lam ** (-(1 - d) / 2 - k * (1 + d))
    rec["dx_linf"] = [lp_norm(derivative(f), np.inf) for f in traj.snapshots]
    rec["dx_linf_bound"] = C * w * lam ** (-2 - d)
    rec["drift_l2"] = [lp_norm(f - u0, 2) for f in traj.snapshots]
    rec["drift_l2_bound"] = C * w * lam ** (-2 - d)
    viol = []
    for key in ("dx0_l2", "dx1_l2", "dx2_l2", "dx_linf", "drift_l2"):
        if max(rec[key]) > rec[key + "_bound"]:
            viol.append(key)
    rec["violations"] = viol
    return traj, rec


def bo_approx(p: BOFamilyParams, t: float, u_low_t: Field, u_low0: Field) -> Field:
    """u_low(t) - amp phi_lam cos(-lam^2 t + lam y - lam t u_low(0, y)) on the grid of u_low."""
    g = u_low_t.grid
    _check_resolved(g, p.lam, p.phit.radius * p.width)
    y = _centred(g)
    phase = -p.lam ** 2 * t + p.lam * y - p.lam * t * u_low0.values
    return Field(g, u_low_t.values - p.amp * p.phi(y / p.width) * np.cos(phase))


def bo_phase_consistency(p: BOFamilyParams, grid: TorusGrid, t: float) -> bool:
    """On supp phi_lam the modulated phase equals -lam^2 t + lam y + omega t bitwise."""
    y = _centred(grid)
    on = p.phi(y / p.width) != 0
    ul0 = bo_low_data(p, grid).values[on]
    a = -p.lam ** 2 * t + p.lam * y[on] - p.lam * t * ul0
    b = -p.lam ** 2 * t + p.lam * y[on] + p.omega * t
    return bool(np.array_equal(a, b))


def bo_approx_bands(p: BOFamilyParams, t: float, u_low_t: Field, u_low0: Field) -> BandField:
    g = u_low_t.grid
    return BandField.low(g, p.lam, u_low_t.values) + bo_high_bands(p, g, t, u_low0.values)


def _time_derivative(traj, i):
    """Fourth-order finite difference in time at frame i (one-sided near the ends)."""
    U = [f.values for f in traj.snapshots]
    h = traj.times[1] - traj.times[0]
    n = len(U)
    if 2 <= i <= n - 3:
        return (U[i - 2] - 8 * U[i - 1] + 8 * U[i + 1] - U[i + 2]) / (12 * h)
    if i < 2:
        W = _fd_weights(np.arange(5.0), float(i))
        return sum(w * u for w, u in zip(W, U[:5])) / h
    W = _fd_weights(np.arange(5.0), float(i - (n - 5)))
    return sum(w * u for w, u in zip(W, U[n - 5:])) / h


def _fd_weights(nodes, x0):
    """First-derivative weights at x0 of the polynomial interpolant through ``nodes``."""
    m = len(nodes)
    V = np.vander(nodes - x0, m, increasing=True).T
    rhs = np.zeros(m)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def bo_residual_decomposition(p: BOFamilyParams, low_traj: ev.Trajectory, frame: int,
                              resample_to: Optional[int] = None) -> ResidualReport:
    """Named terms of the BO residual of the modulated ansatz at ``low_traj.times[frame]``."""
    t = float(low_traj.times[frame])
    ul = low_traj.snapshots[frame]
    ul0 = low_traj.snapshots[0]
    g = ul.grid
    lam, A = p.lam, p.amp
    y = _centred(g)
    phi_l = p.phi(y / p.width)
    ult = _time_derivative(low_traj, frame)

    L = lambda v: BandField.low(g, lam, v)
    UL = L(ul.values)
    theta = -_wrap(lam ** 2 * t) + p.omega * t - _wrap(lam * g.length / 2)
    cosP = BandField.wave(g, lam, np.ones(g.num_points), theta)
    sinP = BandField.wave(g, lam, np.ones(g.num_points), theta - np.pi / 2)

    # low_residual: residual of the numerically evolved low part
    T1 = L(ult) + UL.hilbert().derivative(2) + UL * UL.derivative()
    # low_transport: -A cos(Phi) d_x(u_low phi_lam)
    T2 = cosP * L(ul.values * phi_l).derivative() * (-A)
    # high_high: u_h d_x u_h, with the modulated phase of the ansatz
    uh = bo_high_bands(p, g, t, ul0.values)
    T3 = uh * uh.derivative()
    # dispersive_commutator: -A [H d_xx, phi_lam] cos(Phi)
    pc = cosP * L(phi_l)
    T4 = (pc.hilbert().derivative(2) + sinP * L(phi_l) * lam ** 2) * (-A)
    # low_drift: A lam phi_lam (u_low(t) - u_low(0)) sin(Phi)
    T5 = sinP * L(phi_l * (ul.values - ul0.values)) * (A * lam)
    # commutator piece of the dispersive term: lam^{(3-delta)/2-s} [H, phi_lam] cos(Phi)
    comm = (pc.hilbert() - cosP.hilbert() * L(phi_l)) * lam ** ((3 - p.delta) / 2 - p.s)

    # direct residual of the ansatz: (d_t + H d_xx) u_ap + u_ap d_x u_ap
    uap = UL + uh
    # d_t of -A phi cos(theta(t) + lam x - lam t ul0) = A phi sin(.) * (-lam^2 - lam ul0)
    dth = -lam ** 2 - lam * ul0.values
    theta_h = -_wrap(lam ** 2 * t) - lam * t * ul0.values - _wrap(lam * g.length / 2)
    uht = BandField.wave(g, lam, A * phi_l * dth, theta_h - np.pi / 2)
    direct = L(ult) + uht + uap.hilbert().derivative(2) + uap * uap.derivative()

    parts = {"low_residual": T1, "low_transport": T2, "high_high": T3,
             "dispersive_commutator": T4, "low_drift": T5}
    terms = {k: v.l2_norm() for k, v in parts.items()}
    summed = T1 + T2 + T3 + T4 + T5
    s, d = p.s, p.delta
    pred = {"low_drift": -1 - 2 * d - s, "dispersive_commutator": -d - s,
            "high_high": (1 - d) / 2 - 2 * s, "low_transport": -(3 + 3 * d) / 2 - s}
    return ResidualReport(
        {"omega": p.omega, "lam": lam, "delta": d, "s": s, "t": t},
        terms, direct.l2_norm(), max(-d - s, (1 - d) / 2 - 2 * s),
        extra={"sum_of_terms": summed.l2_norm(),
               "decomposition_gap": (direct - summed).l2_norm(),
               "commutator": comm.l2_norm(),
               "term_exponents": pred,
               "tail": max(uap.tail_fraction(), T4.tail_fraction())})


# ============================================================================ localised wave norm

def loc_ratio(phi: BumpProfile, s: float, delta: float, alpha: float, lam: float,
              N: int = 1024, box_factor: float = 4.0) -> float:
    """lam^{-(1+delta)/2-s} ||phi(x/lam^(1+delta)) cos(lam x + alpha)||_{H^s}."""
    if s < 0 or not 0 < delta < 1:
        raise ValueError("need s >= 0 and 0 < delta < 1")
    w = lam ** (1 + delta)
    g = carrier_grid(lam, box_factor * phi.radius * w, N)
    y = _centred(g)
    u = BandField.wave(g, lam, phi(y / w), alpha - _wrap(lam * g.length / 2))
    if u.tail_fraction() > 1e-8:
        raise ResolutionGuardError("envelope grid does not resolve the profile")
    return lam ** (-(1 + delta) / 2 - s) * u.sobolev_norm(s)


def loc_ratio_direct(phi: BumpProfile, s, delta, alpha, lam, points_per_wave=16,
                     box_factor=4.0) -> float:
    """Same quantity on a full fine grid (for small lam only)."""
    w = lam ** (1 + delta)
    L0 = box_factor * phi.radius * w
    N = 1 << int(np.ceil(np.log2(points_per_wave * lam * L0 / (2 * np.pi))))
    g = make_grid(N, L0)
    y = _centred(g)
    u = Field(g, phi(y / w) * np.cos(lam * y + alpha))
    return lam ** (-(1 + delta) / 2 - s) * sobolev_norm(u, s)


# ============================================================================ NLS concentration

@dataclass(frozen=True)
class NLSConcentrationParams:
    d: int = 2
    s: float = -0.1
    n: int = 16
    delta1: float = 0.05
    delta2: float = 0.25
    l: int = 2
    phi: BumpProfile = BumpProfile("compact-polynomial", radius=1.0, plateau=0.0)
    kappa: Optional[float] = None

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("n must be an integer >= 2")
        if not self.l > self.d / 2:
            raise ValueError("l must exceed d/2")
        if not 0 < self.delta2 < 1 / (self.l + 1):
            raise ValueError("delta2 must lie in (0, 1/(l+1))")
        if not self.delta1 > 0:
            raise ValueError("delta1 must be positive")
        if self.s > 0 and not self.delta1 < min(self.delta2 / 2, self.s * self.delta2 / (1 + 2 * self.s)):
            raise ValueError("delta1 must be below min(delta2/2, s delta2/(1+2s))")

    @property
    def kappa_n(self):
        return self.kappa if self.kappa is not None else np.log(self.n) ** (-self.delta1)

    @property
    def t_n(self):
        return np.log(self.n) ** self.delta2 * self.n ** (-2 * (self.d / 2 - self.s))

    @property
    def amplitude(self):
        return self.kappa_n * self.n ** (self.d / 2 - self.s)


def concentration_grid(p: NLSConcentrationParams, N: int = 128, box: float = 16.0) -> TorusGrid:
    """Torus of side box*R/n (box >= 16 keeps the data 8 supports away from itself)."""
    return make_grid(N, box * p.phi.radius / p.n, p.d)


def nls_concentrating_data(p: NLSConcentrationParams, grid: TorusGrid) -> Field:
    if grid.dim != p.d:
        raise ValueError("grid dimension does not match d")
    c = grid.length / 2
    r = np.sqrt(sum((x - c) ** 2 for x in grid.mesh()))
    u = Field(grid, p.amplitude * p.phi(p.n * r) + 0j, False)
    _guard_spectrum(u)
    return u


def _guard_spectrum(u, tol=1e-10):
    a = np.abs(u.spectrum())
    k = np.abs(u.grid.abs_wavenumber()) * u.grid.length / (2 * np.pi)
    top = k >= 0.4 * u.grid.num_points
    if a[top].max(initial=0) > tol * a.max():
        raise ResolutionGuardError("grid does not resolve the concentrated profile")


def semiclassical_energy(u: Field, n: float, s: float, l: float) -> float:
    return float(np.sqrt(n ** (2 * s) * sobolev_norm(u, 0) ** 2
                         + n ** (-2 * (l - s)) * sobolev_norm(u, l) ** 2))


def nls_ansatz_error(p: NLSConcentrationParams, times, grid: Optional[TorusGrid] = None,
                     dt: Optional[float] = None, dispersive=True, nonlinear=True):
    """E_n and H^s distance between the focusing NLS solution and the ODE profile."""
    times = np.asarray(times, float)
    if np.any(times > p.t_n * (1 + 1e-12)) or np.any(times < 0):
        raise ValueError("times must lie in [0, t_n]")
    g = grid or concentration_grid(p)
    u0 = nls_concentrating_data(p, g)
    eq = ev.EquationSpec("nls", sign="focusing", dispersive=dispersive, nonlinear=nonlinear)
    T = float(times.max())
    amp = p.amplitude
    if dt is None:
        dt = min(T / 50 if T > 0 else 1.0, 0.05 / amp ** 2) if T > 0 else 1.0
    k = len(times)
    if k > 1 and times[0] == 0 and np.allclose(times, np.linspace(0, T, k), rtol=0, atol=1e-14 * T):
        # equispaced from zero: one trajectory supplies every sample
        snaps = ev.evolve(eq, u0, T, ev.StepperSpec(dt=dt), n_frames=k, diagnostics=False).snapshots
    else:
        snaps = [u0 if t == 0 else ev.evolve(eq, u0, t, ev.StepperSpec(dt=dt), n_frames=2,
                                             diagnostics=False).final() for t in times]
    E, Hs = [], []
    for t, uT in zip(times, snaps):
        w = uT - ev.nls_ode_solution(u0, t)
        E.append(semiclassical_energy(w, p.n, p.s, p.l))
        Hs.append(sobolev_norm(w, p.s))
    return {"t": times, "E_n": np.array(E), "hs_distance": np.array(Hs)}


def nls_growth_prediction(p: NLSConcentrationParams, t: float, grid: Optional[TorusGrid] = None,
                          gate: float = 10.0):
    """Predicted kappa_n (t [kappa_n n^{d/2-s}]^2)^s next to the measured norm of v_n(t)."""
    g = grid or concentration_grid(p, N=256)
    phase = t * p.amplitude ** 2
    pred = p.kappa_n * phase ** p.s
    v = ev.nls_ode_solution(nls_concentrating_data(p, g), t)
    meas = sobolev_norm(v, p.s)
    return {"prediction": pred, "measured": meas, "phase": phase,
            "active": bool(phase > gate), "ok": bool(phase <= gate or meas > pred / 10)}


def interpolation_slack(u, s, k):
    """||u||_{L2}^{(k-s)/k} ||u||_{H^k}^{s/k} - ||u||_{H^s} (nonnegative by Hoelder)."""
    return (sobolev_norm(u, 0) ** ((k - s) / k) * sobolev_norm(u, k) ** (s / k)
            - sobolev_norm(u, s))
