"""Time integration of u_t = Lambda u + N(u) on periodic grids.

Equations (real unless noted), written with the linear symbol ``Lambda(xi)`` such that
``d/dt u_hat = Lambda u_hat + N_hat``:

==================== ================================ =====================================
kind                 Lambda                            N(u)
==================== ================================ =====================================
burgers              0                                 -(u^2/2)_x
burgers-bbm          0                                 -(1 - eps d_xx)^{-1} (u^2/2)_x
burgers-parabolic    -eps xi^4                         -(u^2/2)_x
bo                   -i sign(xi) xi^2                  -(u^2/2)_x          (u_t + H u_xx + u u_x = 0)
kdv                  i xi^3                            -(u^2/2)_x          (u_t + u_xxx + u u_x = 0)
dispersive-gamma     i |xi|^gamma xi                   -(u^2/2)_x          (u_t - L u_x + u u_x = 0)
mkdv                 i xi^3                            -(u^3/3)_x
gauged-mkdv          i xi^3                            -(u^3/3)_x + (int u^2) u_x
nls (complex)        -i |xi|^2                         +-i |u|^2 u         (+ focusing)
ode-model (complex)  0                                 i |u|^2 u
==================== ================================ =====================================
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from .spectral_core import Field, TorusGrid, hilbert_transform, derivative, lp_norm

__all__ = [
    "EquationSpec", "StepperSpec", "Trajectory", "GuardError", "BlowUpError",
    "ResolutionError", "GradientGuardError", "evolve", "conserved_quantities",
    "nls_ode_solution", "gauge_transform_mkdv", "equation_rhs", "pde_residual",
    "phi_functions", "etdrk4_stepper", "write_snapshot", "read_snapshot", "KINDS",
]

KINDS = ("burgers", "burgers-bbm", "burgers-parabolic", "bo", "kdv", "dispersive-gamma",
         "mkdv", "gauged-mkdv", "nls", "ode-model")
_QUADRATIC = {"burgers", "burgers-bbm", "burgers-parabolic", "bo", "kdv", "dispersive-gamma"}


class GuardError(RuntimeError):
    """A runtime guard tripped during time integration."""


class BlowUpError(GuardError):
    pass


class ResolutionError(GuardError):
    pass


class GradientGuardError(GuardError):
    pass


@dataclass(frozen=True)
class EquationSpec:
    kind: str
    eps: float = 0.0
    gamma: float = 2.0
    sign: str = "focusing"
    nonlinear: bool = True
    dispersive: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown equation kind {self.kind!r}")
        if self.kind in ("burgers-bbm", "burgers-parabolic") and not self.eps > 0:
            raise ValueError(f"{self.kind} needs eps > 0")
        if self.kind == "dispersive-gamma" and not 1 <= self.gamma <= 2:
            raise ValueError("gamma must lie in [1, 2]")
        if self.sign not in ("focusing", "defocusing"):
            raise ValueError(f"unknown sign {self.sign!r}")

    @property
    def is_real(self) -> bool:
        return self.kind not in ("nls", "ode-model")

    @property
    def conservative(self) -> bool:
        return self.kind not in ("burgers-parabolic",)

    def linear_symbol(self, *xi):
        k = self.kind
        if not self.dispersive:
            return np.zeros(np.broadcast(*xi).shape, complex)
        if k == "bo":
            x = xi[0]
            return -1j * np.sign(x) * x ** 2
        if k in ("kdv", "mkdv", "gauged-mkdv"):
            return 1j * xi[0] ** 3
        if k == "dispersive-gamma":
            x = xi[0]
            return 1j * np.abs(x) ** self.gamma * x
        if k == "burgers-parabolic":
            return -self.eps * xi[0] ** 4 + 0j
        if k == "nls":
            return -1j * sum(np.asarray(x) ** 2 for x in xi) + 0j
        return np.zeros(np.broadcast(*xi).shape, complex)


@dataclass(frozen=True)
class StepperSpec:
    scheme: str = "etd-rk4"
    dt: float = 1e-3
    dealias: Optional[bool] = None  # None: on, except for the pointwise ODE model
    guards: bool = True
    resolution_tol: float = 1e-6

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.scheme not in ("etd-rk4", "if-rk4", "split-step-strang"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: List[Field]
    diagnostics: Dict[str, np.ndarray] = field(default_factory=dict)
    eq: Optional[EquationSpec] = None

    @property
    def grid(self) -> TorusGrid:
        return self.snapshots[0].grid

    def final(self) -> Field:
        return self.snapshots[-1]

    def to_csv(self, path, sobolev=()):
        from .spectral_core import sobolev_norm
        cols = ["t"] + list(self.diagnostics) + [f"hs_norm(s={s:g})" for s in sobolev]
        rows = []
        for i, t in enumerate(self.times):
            r = [t] + [self.diagnostics[k][i] for k in self.diagnostics]
            r += [sobolev_norm(self.snapshots[i], s) for s in sobolev]
            rows.append(r)
        with open(path, "w") as f:
            f.write(",".join(cols) + "\n")
            for r in rows:
                f.write(",".join(f"{float(v):.17g}" for v in r) + "\n")


# ----------------------------------------------------------------------------- phi functions

def phi_functions(z, contour_points=32, radius=1.0):
    """phi_1, phi_2, phi_3 of z; a contour mean is used where |z| < 0.5."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 0.5

    def direct(w):
        e = np.exp(w)
        return ((e - 1) / w, (e - 1 - w) / w ** 2, (e - 1 - w - w ** 2 / 2) / w ** 3)

    out = [np.empty_like(z) for _ in range(3)]
    big = ~small
    if big.any():
        for o, v in zip(out, direct(z[big])):
            o[big] = v
    if small.any():
        r = radius * np.exp(2j * np.pi * (np.arange(contour_points) + 0.5) / contour_points)
        w = z[small][:, None] + r[None, :]
        for o, v in zip(out, direct(w)):
            o[small] = v.mean(axis=1)
    return tuple(out)


# ----------------------------------------------------------------------------- right-hand sides

class _Operator:
    """Spectral-space right-hand side on a fixed grid."""

    def __init__(self, eq: EquationSpec, grid: TorusGrid, dealias: bool):
        self.eq, self.grid = eq, grid
        N, d = grid.num_points, grid.dim
        self.real = eq.is_real and d == 1
        if eq.is_real and d != 1:
            raise ValueError("real equation kinds are one-dimensional")
        k = 2 * np.pi / grid.length
        if self.real:
            self.xi = (np.arange(N // 2 + 1) * k,)
            ki = (np.arange(N // 2 + 1),)
        else:
            self.xi = grid.wavenumber_mesh()
            ki = tuple(np.rint(x / k).astype(int) for x in self.xi)
        self.Lam = np.broadcast_to(np.asarray(eq.linear_symbol(*self.xi), complex),
                                   self._shape()).copy()
        mask = np.ones(self._shape(), bool)
        if dealias:
            for kk in ki:
                mask &= np.abs(kk) < N / 3
        self.mask = mask
        self.ik = 1j * self.xi[0]
        if self.real:
            self.ik = self.ik.copy()
            self.ik[-1] = 0.0
        if eq.kind == "burgers-bbm":
            self.ik = self.ik / (1 + eq.eps * self.xi[0] ** 2)

    def _shape(self):
        N = self.grid.num_points
        return (N // 2 + 1,) if self.real else self.grid.shape

    def fwd(self, u):
        return np.fft.rfft(u) if self.real else np.fft.fftn(u)

    def inv(self, vh):
        return np.fft.irfft(vh, self.grid.num_points) if self.real else np.fft.ifftn(vh)

    def nonlinear(self, vh):
        eq = self.eq
        if not eq.nonlinear:
            return np.zeros_like(vh)
        u = self.inv(vh)
        k = eq.kind
        if k in _QUADRATIC:
            out = -0.5 * self.ik * self.fwd(u * u)
        elif k == "mkdv":
            out = -self.ik * self.fwd(u ** 3) / 3
        elif k == "gauged-mkdv":
            m2 = np.mean(u * u) * self.grid.length
            out = -self.ik * self.fwd(u ** 3) / 3 + m2 * self.ik * vh
        else:
            s = 1.0 if (k == "ode-model" or eq.sign == "focusing") else -1.0
            out = 1j * s * self.fwd(np.abs(u) ** 2 * u)
        return out * self.mask


def equation_rhs(eq: EquationSpec, u: Field, dealias=False) -> Field:
    op = _Operator(eq, u.grid, dealias)
    vh = op.fwd(u.values)
    r = op.inv(op.Lam * vh + op.nonlinear(vh))
    return Field(u.grid, r, eq.is_real)


# ----------------------------------------------------------------------------- steppers

def _etdrk4(op, h):
    return etdrk4_stepper(op.Lam, op.nonlinear, h)


def etdrk4_stepper(Lam, Nl, h):
    """Cox-Matthews ETDRK4 step for v' = Lam v + Nl(v) with diagonal Lam."""
    z = h * np.asarray(Lam, complex)
    E, E2 = np.exp(z), np.exp(z / 2)
    p1h = phi_functions(z / 2)[0]
    p1, p2, p3 = phi_functions(z)
    Q = h / 2 * p1h
    f1 = h * (p1 - 3 * p2 + 4 * p3)
    f2 = h * 2 * (p2 - 2 * p3)
    f3 = h * (4 * p3 - p2)

    def step(v):
        Nv = Nl(v)
        a = E2 * v + Q * Nv
        Na = Nl(a)
        b = E2 * v + Q * Na
        Nb = Nl(b)
        c = E2 * a + Q * (2 * Nb - Nv)
        Nc = Nl(c)
        return E * v + f1 * Nv + f2 * (Na + Nb) + f3 * Nc

    return step


def _ifrk4(op, h):
    E2 = np.exp(h * op.Lam / 2)
    E = E2 * E2
    Nl = op.nonlinear

    def step(v):
        k1 = h * Nl(v)
        k2 = h * Nl(E2 * (v + k1 / 2))
        k3 = h * Nl(E2 * v + k2 / 2)
        k4 = h * Nl(E * v + E2 * k3)
        return E * (v + k1 / 6) + E2 * (k2 + k3) / 3 + k4 / 6

    return step


def _strang(op, h):
    eq = op.eq
    E2 = np.exp(h * op.Lam / 2)
    s = 1.0 if (eq.kind == "ode-model" or eq.sign == "focusing") else -1.0

    def step(v):
        u = op.inv(E2 * v)
        if eq.nonlinear:
            u = u * np.exp(1j * s * h * np.abs(u) ** 2)
        return E2 * (op.fwd(u) * op.mask)

    return step


def evolve(eq: EquationSpec, u0: Field, T: float, stepper: StepperSpec = StepperSpec(),
           n_frames: int = 11, diagnostics: bool = True) -> Trajectory:
    """Integrate from 0 to T; ``n_frames`` equispaced snapshots including both ends."""
    if eq.is_real and not u0.is_real:
        raise ValueError(f"{eq.kind} needs real data")
    if not np.all(np.isfinite(u0.values)):
        raise ValueError("non-finite initial data")
    if stepper.scheme == "split-step-strang" and eq.kind not in ("nls", "ode-model"):
        raise ValueError("split-step-strang is only valid for NLS kinds")
    dealias = stepper.dealias if stepper.dealias is not None else eq.kind != "ode-model"
    op = _Operator(eq, u0.grid, dealias)
    n_frames = max(int(n_frames), 2)
    seg = n_frames - 1
    n = max(1, int(np.ceil(T / stepper.dt / seg - 1e-9))) * seg if T > 0 else 0
    h = T / n if n else 0.0
    every = n // seg if n else 1
    make = {"etd-rk4": _etdrk4, "if-rk4": _ifrk4, "split-step-strang": _strang}[stepper.scheme]
    step = make(op, h) if n else None

    v = op.fwd(u0.values.astype(complex) if not op.real else u0.values)
    guards = stepper.guards
    ref_inf = max(np.abs(u0.values).max(), 1e-300)
    ref_grad = None
    if guards and eq.kind == "burgers":
        ref_grad = max(np.abs(op.inv(op.ik * v)).max(), 1e-300)
    fields = [_as_field(op, v, u0)]
    times = [0.0]
    check_every = max(1, min(every, 10))
    for i in range(1, n + 1):
        v = step(v)
        if guards and (i % check_every == 0 or i == n):
            # the ODE model is pointwise, so spectral tails say nothing about resolution
            tol = None if eq.kind == "ode-model" else stepper.resolution_tol
            _check(op, v, ref_inf, ref_grad, tol, i * h)
        if i % every == 0:
            fields.append(_as_field(op, v, u0))
            times.append(i * h)
    traj = Trajectory(np.array(times), fields, {}, eq)
    if n == 0:
        traj = Trajectory(np.array([0.0]), fields, {}, eq)
    if diagnostics:
        recs = [conserved_quantities(eq, f) for f in traj.snapshots]
        traj.diagnostics = {k: np.array([r[k] for r in recs]) for k in recs[0]}
    return traj


def _as_field(op, v, like):
    u = op.inv(v)
    return Field(like.grid, u, op.real or op.eq.is_real)


def _check(op, v, ref_inf, ref_grad, tol, t):
    u = op.inv(v)
    if not np.all(np.isfinite(u)) or np.abs(u).max() > 1e6 * ref_inf:
        raise BlowUpError(f"sup norm exceeded 1e6 x initial at t={t:.6g}")
    a = np.abs(v) * op.mask
    peak = a.max()
    if peak > 0 and tol is not None:
        N = op.grid.num_points
        kk = [np.abs(np.rint(x * op.grid.length / (2 * np.pi))) for x in op.xi]
        kmax = max(N / 3 if op.mask.sum() < op.mask.size else N / 2, 1)
        top = np.zeros(a.shape, bool)
        for x in kk:
            top |= x >= 0.8 * kmax
        if a[top].max(initial=0.0) > tol * peak:
            raise ResolutionError(f"spectral tail above {tol:g} of peak at t={t:.6g}")
    if ref_grad is not None:
        g = np.abs(op.inv(op.ik * v)).max()
        if g > 4 * ref_grad:
            raise GradientGuardError(f"gradient quadrupled at t={t:.6g}")


# ----------------------------------------------------------------------------- diagnostics

def conserved_quantities(eq: EquationSpec, u: Field) -> dict:
    g = u.grid
    w = g.spacing ** g.dim
    v = u.values
    mass = float(np.sum(np.abs(v) ** 2) * w)
    out = {"mass": mass}
    k = eq.kind
    if k == "nls" or k == "ode-model":
        c = u.spectrum()
        grad2 = float(g.length ** g.dim * np.sum(g.abs_wavenumber() ** 2 * np.abs(c) ** 2))
        quart = 0.5 * float(np.sum(np.abs(v) ** 4) * w)
        sgn = 1.0 if (k == "nls" and eq.sign == "defocusing") else -1.0
        out["hamiltonian"] = grad2 + sgn * quart if k == "nls" else -quart
    elif eq.is_real:
        ux = derivative(u).values
        out["momentum"] = 0.5 * mass
        out["integral"] = float(np.sum(v) * w)
        if k == "bo":
            hux = hilbert_transform(Field(g, ux)).values
            out["hamiltonian"] = float(np.sum(0.5 * v * hux + v ** 3 / 6) * w)
        elif k in ("kdv", "dispersive-gamma"):
            out["hamiltonian"] = float(np.sum(0.5 * ux ** 2 - v ** 3 / 6) * w)
        elif k in ("mkdv", "gauged-mkdv"):
            out["hamiltonian"] = float(np.sum(0.5 * ux ** 2 - v ** 4 / 12) * w)
    return out


def nls_ode_solution(A: Field, t: float, sign: str = "focusing") -> Field:
    """Closed-form solution A exp(+- i t |A|^2) of i v_t +- |v|^2 v = 0."""
    s = 1.0 if sign == "focusing" else -1.0
    a = A.values
    return Field(A.grid, a * np.exp(1j * s * t * np.abs(a) ** 2), False)


# ----------------------------------------------------------------------------- gauge transform

def _shift_fields(traj, direction):
    g = traj.grid
    if abs(g.length - 1.0) > 1e-12 or g.dim != 1:
        raise ValueError("the gauge transform is defined on the unit-length torus")
    m2 = np.array([lp_norm(f, 2) ** 2 for f in traj.snapshots])
    t = traj.times
    shift = np.concatenate([[0.0], np.cumsum(0.5 * (m2[1:] + m2[:-1]) * np.diff(t))])
    sgn = -1.0 if direction == "from-gauged" else 1.0
    xi = g.wavenumbers
    out = []
    for f, m in zip(traj.snapshots, shift):
        c = np.fft.fft(f.values) * np.exp(1j * sgn * xi * m)
        out.append(Field(g, np.fft.ifft(c).real, True))
    return out


def gauge_transform_mkdv(traj: Trajectory, direction: str) -> Trajectory:
    """from-gauged: v(t,x) = u(t, x - m(t)); to-gauged: u(t,x) = v(t, x + m(t)),
    with m(t) the time integral of the spatial integral of the square."""
    if direction not in ("to-gauged", "from-gauged"):
        raise ValueError(f"unknown direction {direction!r}")
    fields = _shift_fields(traj, direction)
    kind = "mkdv" if direction == "from-gauged" else "gauged-mkdv"
    eq = replace(traj.eq, kind=kind) if traj.eq is not None else EquationSpec(kind)
    recs = [conserved_quantities(eq, f) for f in fields]
    diag = {k: np.array([r[k] for r in recs]) for k in recs[0]}
    return Trajectory(traj.times.copy(), fields, diag, eq)


def pde_residual(eq: EquationSpec, traj: Trajectory) -> np.ndarray:
    """L2 norm of u_t - rhs(u) at interior frames; u_t by 5-point central differences."""
    t = traj.times
    h = np.diff(t)
    if len(t) < 5 or np.ptp(h) > 1e-9 * h.mean():
        raise ValueError("need at least 5 equispaced frames")
    h = h.mean()
    U = [f.values for f in traj.snapshots]
    out = []
    for i in range(2, len(U) - 2):
        ut = (U[i - 2] - 8 * U[i - 1] + 8 * U[i + 1] - U[i + 2]) / (12 * h)
        r = ut - equation_rhs(eq, traj.snapshots[i]).values
        out.append(lp_norm(Field(traj.grid, r, eq.is_real), 2))
    return np.array(out)


# ----------------------------------------------------------------------------- snapshot dumps

_HEADER = struct.Struct("<qdd")


def write_snapshot(path, u: Field, t: float):
    """Binary dump: little-endian header (int64 N, float64 L, float64 t), then complex128 values."""
    with open(path, "wb") as f:
        f.write(_HEADER.pack(u.grid.num_points, u.grid.length, t))
        f.write(np.ascontiguousarray(u.values, dtype="<c16").tobytes())


def read_snapshot(path):
    from .spectral_core import make_grid
    with open(path, "rb") as f:
        N, L, t = _HEADER.unpack(f.read(_HEADER.size))
        v = np.frombuffer(f.read(), dtype="<c16")
    g = make_grid(N, L, round(np.log(v.size) / np.log(N)) if v.size != N else 1)
    v = v.reshape(g.shape)
    real = not np.any(v.imag)
    return Field(g, v.real if real else v, real), t
