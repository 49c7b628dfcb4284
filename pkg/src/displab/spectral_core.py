"""Periodic grids, Fourier multipliers, Sobolev/Lebesgue norms, Littlewood-Paley
pieces, mollifiers and the Kato-Ponce commutator ratio.

Conventions
-----------
Fourier coefficients are ``c_k = fft(u)/N`` (``fftn/N**d`` in d dimensions), so that
``u(x) = sum_k c_k exp(i xi_k x)`` with ``xi_k = 2 pi k / L``.  The Nyquist wavenumber
is stored as ``+N/2``.  The discrete Sobolev norm is

    ||u||_{H^s}^2 = L^d * sum_k (1 + |xi_k|^2)^s |c_k|^2,

which is the Riemann sum of (2 pi)^{-d} int (1+|xi|^2)^s |u_hat|^2 and reduces to the
trapezoidal L^2 norm at s = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

__all__ = [
    "TorusGrid", "Grid1D", "Field", "Field1D", "MultiplierSpec", "BumpProfile",
    "UndefinedRatioError", "make_grid", "apply_multiplier", "hilbert_transform",
    "derivative", "sobolev_norm", "lp_norm", "littlewood_paley_project",
    "dyadic_range", "mollify", "kato_ponce_ratio", "scaling_transform",
    "smooth_cutoff", "register_multiplier", "get_multiplier", "MULTIPLIERS",
    "resample", "bessel", "hilbert", "dyadic", "semigroup",
]


class UndefinedRatioError(ValueError):
    """Raised when a ratio has a vanishing denominator."""


# ----------------------------------------------------------------------------- grids

@dataclass(frozen=True)
class TorusGrid:
    """Equispaced periodic grid on [0, L)^d with N points per axis."""
    num_points: int
    length: float
    dim: int = 1

    def __post_init__(self):
        N = self.num_points
        if int(N) != N or N < 8 or N % 2:
            raise ValueError(f"num_points must be an even integer >= 8, got {N}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be positive, got {self.length}")
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")

    @property
    def spacing(self) -> float:
        return self.length / self.num_points

    @property
    def shape(self):
        return (self.num_points,) * self.dim

    @property
    def size(self) -> int:
        return self.num_points ** self.dim

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.num_points) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        N = self.num_points
        k = np.fft.fftfreq(N, 1.0 / N)
        k[N // 2] = N // 2
        return 2 * np.pi * k / self.length

    @property
    def nyquist(self) -> float:
        return np.pi * self.num_points / self.length

    def mesh(self):
        """Coordinate arrays, one per axis (broadcastable, 'ij' indexing)."""
        x = self.nodes
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij", sparse=True))

    def wavenumber_mesh(self):
        xi = self.wavenumbers
        if self.dim == 1:
            return (xi,)
        return tuple(np.meshgrid(*([xi] * self.dim), indexing="ij", sparse=True))

    def abs_wavenumber(self) -> np.ndarray:
        return np.sqrt(sum(k ** 2 for k in self.wavenumber_mesh()))

    def nyquist_mask(self) -> np.ndarray:
        """Boolean array marking modes on any Nyquist hyperplane."""
        N = self.num_points
        idx = np.arange(N) == N // 2
        if self.dim == 1:
            return idx
        parts = np.meshgrid(*([idx] * self.dim), indexing="ij", sparse=True)
        out = parts[0]
        for p in parts[1:]:
            out = out | p
        return out


Grid1D = TorusGrid


def make_grid(N: int, L: float, dim: int = 1) -> TorusGrid:
    return TorusGrid(int(N), float(L), dim)


# ----------------------------------------------------------------------------- fields

@dataclass(frozen=True, eq=False)
class Field:
    """Sampled state on a torus grid. Real fields carry float64 values."""
    grid: TorusGrid
    values: np.ndarray
    is_real: bool = True

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if self.is_real:
            if np.iscomplexobj(v):
                v = v.real
            v = np.ascontiguousarray(v, dtype=np.float64)
        else:
            v = np.ascontiguousarray(v, dtype=np.complex128)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, f, is_real=True):
        return cls(grid, f(*grid.mesh()) * np.ones(grid.shape), is_real)

    @classmethod
    def zeros(cls, grid, is_real=True):
        return cls(grid, np.zeros(grid.shape), is_real)

    @classmethod
    def from_spectrum(cls, grid, c, is_real=True):
        v = np.fft.ifftn(np.asarray(c) * grid.size)
        return cls(grid, v.real if is_real else v, is_real)

    def spectrum(self) -> np.ndarray:
        return np.fft.fftn(self.values) / self.grid.size

    def copy(self):
        return Field(self.grid, self.values.copy(), self.is_real)

    def conj(self):
        return self if self.is_real else Field(self.grid, self.values.conj(), False)

    def _lift(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values, other.is_real
        return other, not np.iscomplexobj(other)

    def __add__(self, other):
        v, r = self._lift(other)
        return Field(self.grid, self.values + v, self.is_real and r)

    __radd__ = __add__

    def __sub__(self, other):
        v, r = self._lift(other)
        return Field(self.grid, self.values - v, self.is_real and r)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        v, r = self._lift(other)
        return Field(self.grid, self.values * v, self.is_real and r)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / other)

    def __neg__(self):
        return Field(self.grid, -self.values, self.is_real)

    def mean(self):
        return self.values.mean()


Field1D = Field


def resample(u: Field, N: int) -> Field:
    """Spectral interpolation (or truncation) of u onto an N-point grid of equal length."""
    g = make_grid(N, u.grid.length, u.grid.dim)
    M = u.grid.num_points
    if N == M:
        return u
    c = u.spectrum()
    k_old = np.rint(u.grid.wavenumbers * u.grid.length / (2 * np.pi)).astype(int)
    keep = np.abs(k_old) < min(M, N) // 2
    if u.grid.dim != 1:
        raise NotImplementedError("resample is one-dimensional")
    out = np.zeros(N, complex)
    out[k_old[keep] % N] = c[keep]
    return Field.from_spectrum(g, out, u.is_real)


# ----------------------------------------------------------------------------- multipliers

@dataclass(frozen=True)
class MultiplierSpec:
    """Fourier multiplier.  ``symbol`` receives one wavenumber array per axis.

    ``odd`` marks symbols with m(-xi) = -m(xi) (or odd in some axis); their Nyquist
    modes are zeroed.  ``hermitian`` marks m(-xi) = conj(m(xi)), i.e. real-preserving.
    """
    name: str
    symbol: Callable
    odd: bool = False
    hermitian: bool = True

    def __call__(self, *xi):
        return self.symbol(*xi)

    def __mul__(self, other: "MultiplierSpec"):
        a, b = self.symbol, other.symbol
        return MultiplierSpec(f"{self.name}*{other.name}", lambda *xi: a(*xi) * b(*xi),
                              odd=self.odd ^ other.odd,
                              hermitian=self.hermitian and other.hermitian)


def _symbol_values(m: MultiplierSpec, grid: TorusGrid) -> np.ndarray:
    vals = np.broadcast_to(np.asarray(m.symbol(*grid.wavenumber_mesh()), dtype=complex), grid.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"multiplier {m.name!r} is not finite on the grid")
    return vals


def apply_multiplier(u: Field, m: MultiplierSpec) -> Field:
    if not np.all(np.isfinite(u.values)):
        raise ValueError("field has non-finite values")
    vals = _symbol_values(m, u.grid)
    c = np.fft.fftn(u.values) * vals
    if m.odd:
        c[u.grid.nyquist_mask()] = 0
    v = np.fft.ifftn(c)
    real = u.is_real and m.hermitian
    return Field(u.grid, v.real if real else v, real)


def smooth_cutoff(r):
    """C-infinity radial cutoff: 1 on [0,1], 0 on [2, inf), monotone in between."""
    r = np.asarray(r, dtype=float)
    t = np.clip(r - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
        b = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return a / (a + b)


def _radial(*xi):
    return np.sqrt(sum(np.asarray(k, float) ** 2 for k in xi))


def hilbert() -> MultiplierSpec:
    return MultiplierSpec("hilbert", lambda xi: -1j * np.sign(xi), odd=True)


def bessel(s: float) -> MultiplierSpec:
    return MultiplierSpec(f"bessel_{s:g}", lambda *xi: (1 + _radial(*xi) ** 2) ** (s / 2))


def dyadic(N: int) -> MultiplierSpec:
    N = _check_dyadic(N)
    if N == 1:
        return MultiplierSpec("dyadic_1", lambda *xi: smooth_cutoff(_radial(*xi)))
    return MultiplierSpec(
        f"dyadic_{N}",
        lambda *xi: smooth_cutoff(_radial(*xi) / N) - smooth_cutoff(2 * _radial(*xi) / N))


def semigroup(Lambda: Callable, t: float, name="semigroup", hermitian=True) -> MultiplierSpec:
    return MultiplierSpec(f"{name}_{t:g}", lambda *xi: np.exp(t * Lambda(*xi)),
                          hermitian=hermitian)


MULTIPLIERS: Dict[str, Callable[..., MultiplierSpec]] = {}


def register_multiplier(name: str, factory: Callable[..., MultiplierSpec]):
    if name in MULTIPLIERS:
        raise KeyError(f"multiplier {name!r} already registered")
    MULTIPLIERS[name] = factory
    return factory


def get_multiplier(name: str, *args) -> MultiplierSpec:
    return MULTIPLIERS[name](*args)


for _n, _f in (("hilbert", hilbert), ("bessel", bessel), ("dyadic", dyadic),
               ("semigroup", semigroup)):
    register_multiplier(_n, _f)


def hilbert_transform(u: Field) -> Field:
    if u.grid.dim != 1:
        raise ValueError("Hilbert transform is one-dimensional")
    return apply_multiplier(u, hilbert())


def derivative(u: Field, order: int = 1, axis: int = 0) -> Field:
    m = MultiplierSpec(f"d{order}", lambda *xi: (1j * xi[axis]) ** order, odd=bool(order % 2))
    return apply_multiplier(u, m)


# ----------------------------------------------------------------------------- norms

def sobolev_norm(u: Field, s: float) -> float:
    g = u.grid
    c = u.spectrum()
    w = (1 + g.abs_wavenumber() ** 2) ** s
    return float(np.sqrt(g.length ** g.dim * np.sum(w * np.abs(c) ** 2)))


def lp_norm(u: Field, p: float) -> float:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(u.values)
    if np.isinf(p):
        return float(a.max())
    return float((u.grid.spacing ** u.grid.dim * np.sum(a ** p)) ** (1 / p))


# ----------------------------------------------------------------------------- Littlewood-Paley

def _check_dyadic(N) -> int:
    n = int(N)
    if n != N or n < 1 or n & (n - 1):
        raise ValueError(f"dyadic index must be a power of two, got {N}")
    return n


def dyadic_range(grid: TorusGrid):
    """Dyadic indices whose projectors sum to the identity on the grid."""
    top = float(grid.abs_wavenumber().max())
    out = [1]
    while out[-1] < top:
        out.append(2 * out[-1])
    return out


def littlewood_paley_project(u: Field, N: int) -> Field:
    return apply_multiplier(u, dyadic(N))


def mollify(u: Field, eps: float) -> Field:
    """Smooth spectral cutoff rho_hat(eps*xi); rho_hat = 1 for |eps xi| <= 1."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return apply_multiplier(u, MultiplierSpec(f"mollify_{eps:g}",
                                              lambda *xi: smooth_cutoff(eps * _radial(*xi))))


# ----------------------------------------------------------------------------- Kato-Ponce, scaling

def kato_ponce_ratio(f: Field, g: Field, s: float) -> float:
    if not f.is_real:
        raise ValueError("f must be real-valued")
    Ds = bessel(s)
    comm = apply_multiplier(f * g, Ds) - f * apply_multiplier(g, Ds)
    den = (lp_norm(derivative(f), np.inf) * sobolev_norm(g, s - 1)
           + sobolev_norm(f, s) * lp_norm(g, np.inf))
    num = sobolev_norm(comm, 0)
    if den == 0 or not np.isfinite(den):
        raise UndefinedRatioError("Kato-Ponce denominator vanishes")
    return num / den


def scaling_transform(u: Field, lam: float, mode: str) -> Field:
    """Spatial part of the BO scaling.

    bo-forward:  u -> lam*u(lam*x) on a box of length L/lam.
    bo-inverse:  u -> u(x/lam)/lam on a box of length lam*L.
    Nodes map onto nodes, so no interpolation is involved.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    g = u.grid
    if mode == "bo-forward":
        return Field(make_grid(g.num_points, g.length / lam, g.dim), lam * u.values, u.is_real)
    if mode == "bo-inverse":
        return Field(make_grid(g.num_points, g.length * lam, g.dim), u.values / lam, u.is_real)
    raise ValueError(f"unknown scaling mode {mode!r}")


# ----------------------------------------------------------------------------- bump profiles

def _poly_step(t, order):
    """Generalised smoothstep S_k: 0 at t<=0, 1 at t>=1, C^k at both ends."""
    from math import comb
    t = np.clip(t, 0.0, 1.0)
    return t ** (order + 1) * sum(comb(order + j, j) * (1 - t) ** j for j in range(order + 1))


@dataclass(frozen=True)
class BumpProfile:
    """Even profile equal to ``amplitude`` on |x| <= plateau and zero for |x| >= radius.

    kinds: compact-polynomial (C^order taper), cosine-taper (C^1 taper),
    gaussian-truncated (Gaussian flank, below 1e-16 at ``radius``).
    """
    kind: str = "compact-polynomial"
    radius: float = 2.0
    plateau: float = 1.0
    amplitude: float = 1.0
    order: int = 12

    def __post_init__(self):
        if self.kind not in ("compact-polynomial", "cosine-taper", "gaussian-truncated"):
            raise ValueError(f"unknown bump kind {self.kind!r}")
        if not (0 <= self.plateau < self.radius):
            raise ValueError("need 0 <= plateau < radius")

    def __call__(self, x):
        a = np.abs(np.asarray(x, dtype=float))
        w = self.radius - self.plateau
        t = (a - self.plateau) / w
        if self.kind == "compact-polynomial":
            v = 1 - _poly_step(t, self.order)
        elif self.kind == "cosine-taper":
            v = 0.5 * (1 + np.cos(np.pi * np.clip(t, 0, 1)))
        else:
            sig = w / np.sqrt(-np.log(1e-16))
            v = np.exp(-(np.clip(a - self.plateau, 0, None) / sig) ** 2)
        return self.amplitude * np.where(a >= self.radius, 0.0, v)

    def l2_norm(self, n=1 << 15) -> float:
        x = np.linspace(-self.radius, self.radius, n, endpoint=False)
        return float(np.sqrt(np.sum(self(x) ** 2) * (2 * self.radius / n)))

    def lp_norm(self, p, n=1 << 15) -> float:
        x = np.linspace(-self.radius, self.radius, n, endpoint=False)
        return float((np.sum(np.abs(self(x)) ** p) * (2 * self.radius / n)) ** (1 / p))

    def normalized(self) -> "BumpProfile":
        return self.scaled(1.0 / self.l2_norm())

    def scaled(self, a) -> "BumpProfile":
        return BumpProfile(self.kind, self.radius, self.plateau, self.amplitude * a, self.order)

    def companion(self, margin=0.5, taper=0.5) -> "BumpProfile":
        """Unit-height profile that equals 1 on [-radius-margin, radius+margin]."""
        p = self.radius + margin
        return BumpProfile(self.kind, p + taper, p, 1.0, self.order)
