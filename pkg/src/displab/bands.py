"""Multiband representation of high-frequency wave packets.

A field is stored as ``u(x) = sum_j exp(i j lam x) A_j(x)`` with slowly varying envelopes
``A_j`` sampled on a coarse periodic grid of length L.  When ``lam*L/(2 pi)`` is an integer
``m`` and the envelopes are band-limited below ``m/2`` this is an exact encoding of a field
on a virtual fine grid: envelope mode k of band j sits at fine mode ``k + j*m``.  Fourier
multipliers are then evaluated at ``j*lam + xi_k`` and the fine grid never has to exist.
"""
from __future__ import annotations

import numpy as np

from .spectral_core import Field, TorusGrid, make_grid

__all__ = ["BandField", "carrier_grid"]


def carrier_grid(lam: float, length: float, N: int) -> TorusGrid:
    """Coarse grid whose length is the smallest multiple of 2 pi/lam not below ``length``."""
    m = int(np.ceil(lam * length / (2 * np.pi) - 1e-9))
    g = make_grid(N, 2 * np.pi * m / lam)
    if N >= m:
        raise ValueError(f"coarse grid too fine for carrier: N={N} >= m={m}")
    return g


class BandField:
    """Sum of carrier bands ``exp(i j lam x) A_j(x)``; value semantics."""

    def __init__(self, grid: TorusGrid, lam: float, bands: dict):
        self.grid = grid
        self.lam = float(lam)
        m = lam * grid.length / (2 * np.pi)
        if abs(m - round(m)) > 1e-6 * max(1.0, m):
            raise ValueError("lam*L/(2 pi) must be an integer")
        self.m = int(round(m))
        if grid.num_points > self.m:
            raise ValueError("envelope grid would overlap neighbouring bands")
        self.bands = {int(j): np.asarray(a, dtype=complex) for j, a in bands.items()}

    # construction -------------------------------------------------------------
    @classmethod
    def low(cls, grid, lam, values):
        return cls(grid, lam, {0: values})

    @classmethod
    def wave(cls, grid, lam, envelope, phase, j=1):
        """Real field ``envelope * cos(j lam x + phase)``; phase may vary slowly in x."""
        e = np.exp(1j * np.asarray(phase)) * envelope / 2
        e = np.broadcast_to(e, grid.shape)
        return cls(grid, lam, {j: e, -j: np.conj(e)})

    def _new(self, bands):
        return BandField(self.grid, self.lam, bands)

    # algebra ------------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, BandField):
            out = {j: a.copy() for j, a in self.bands.items()}
            for j, a in other.bands.items():
                out[j] = out[j] + a if j in out else a.copy()
            return self._new(out)
        out = {j: a.copy() for j, a in self.bands.items()}
        out[0] = out.get(0, 0) + np.broadcast_to(other, self.grid.shape)
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({j: -a for j, a in self.bands.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, BandField):
            other = np.asarray(other)
            if other.ndim == 0:
                return self._new({j: a * other for j, a in self.bands.items()})
            other = self._new({0: other})
        out = {}
        for j, a in self.bands.items():
            for k, b in other.bands.items():
                p = _dealiased_product(a, b)
                out[j + k] = out[j + k] + p if j + k in out else p
        return self._new(out)

    __rmul__ = __mul__

    # multipliers --------------------------------------------------------------
    def apply(self, symbol, odd=False):
        xi = self.grid.wavenumbers
        N = self.grid.num_points
        out = {}
        for j, a in self.bands.items():
            c = np.fft.fft(a) * symbol(j * self.lam + xi)
            c[N // 2] = 0.0
            out[j] = np.fft.ifft(c)
        return self._new(out)

    def derivative(self, order=1):
        return self.apply(lambda xi: (1j * xi) ** order)

    def hilbert(self):
        return self.apply(lambda xi: -1j * np.sign(xi))

    def bessel(self, s):
        return self.apply(lambda xi: (1 + xi ** 2) ** (s / 2))

    # norms --------------------------------------------------------------------
    def band_spectra(self):
        N = self.grid.num_points
        return {j: np.fft.fft(a) / N for j, a in self.bands.items()}

    def sobolev_norm(self, s) -> float:
        xi = self.grid.wavenumbers
        tot = 0.0
        for j, c in self.band_spectra().items():
            tot += np.sum((1 + (j * self.lam + xi) ** 2) ** s * np.abs(c) ** 2)
        return float(np.sqrt(self.grid.length * tot))

    def l2_norm(self) -> float:
        return self.sobolev_norm(0.0)

    def tail_fraction(self) -> float:
        """Largest envelope coefficient in the top 20% of the coarse band, relative to peak."""
        N = self.grid.num_points
        k = np.abs(np.fft.fftfreq(N, 1.0 / N))
        top = k >= 0.4 * N
        peak, tail = 0.0, 0.0
        for c in self.band_spectra().values():
            a = np.abs(c)
            peak = max(peak, a.max())
            tail = max(tail, a[top].max())
        return tail / peak if peak > 0 else 0.0

    # materialisation ------------------------------------------------------------
    def fine_size(self):
        jmax = max(abs(j) for j in self.bands) if self.bands else 0
        need = 2 * (jmax * self.m + self.grid.num_points // 2) + 2
        return 1 << int(np.ceil(np.log2(max(need, 8))))

    def materialize(self, N=None, is_real=True) -> Field:
        N = N or self.fine_size()
        g = make_grid(N, self.grid.length)
        Nc = self.grid.num_points
        kc = np.fft.fftfreq(Nc, 1.0 / Nc).astype(int)
        out = np.zeros(N, complex)
        for j, c in self.band_spectra().items():
            idx = kc + j * self.m
            if np.any(np.abs(idx) >= N // 2):
                raise ValueError("fine grid too small for the stored bands")
            np.add.at(out, idx % N, c)
        return Field.from_spectrum(g, out, is_real)


def _dealiased_product(a, b):
    """Pointwise product of two periodic envelopes, computed on a 2x padded grid."""
    N = a.size
    if np.ndim(b) == 0:
        return a * b
    A = _pad(np.fft.fft(a), 2 * N)
    B = _pad(np.fft.fft(b), 2 * N)
    p = np.fft.ifft(A) * np.fft.ifft(B) * (2 * N) ** 2 / N ** 2
    P = np.fft.fft(p) / 2
    out = np.concatenate([P[: N // 2], [0.0], P[-N // 2 + 1:]])
    return np.fft.ifft(out)


def _pad(c, M):
    N = c.size
    out = np.zeros(M, complex)
    out[: N // 2] = c[: N // 2]
    out[-N // 2 + 1:] = c[-N // 2 + 1:]
    return out
