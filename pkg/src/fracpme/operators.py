"""Application of the jump operator L to fields.

Three modes:
  spectral_fractional   exact Fourier multiplier |xi|^a (homogeneous kernel)
  kernel_quadrature     truncated singular quadrature of the kernel integral
                        with minimum-image periodic wrap over several box
                        images and an analytic mean-field tail correction
  laplacian             multiplier -|xi|^2 (for the viscous term)

The kernel-quadrature mode uses exact radial cell integrals (zeroth and
first moments) per lattice offset, a Taylor band for the singular core
|y| in (eps1, h/2), and folds image offsets into circular convolution
weights, so one application is a handful of FFTs.  All supported kernels
are even in y, hence the drift compensator for a in [1,2) cancels in the
symmetrized lattice sum.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss

from .grids import Field, Grid, GridError, spectral_gradient, transform_forward
from .kernels import KernelSpec


class OperatorError(ValueError):
    pass


def _radial_moment(kernel: KernelSpec, power: int, lo: float, hi: float) -> float:
    """int_lo^hi r^power * c r^{-1-a} damp(r) dr for the d=1 radial profile."""
    if hi <= lo:
        return 0.0
    if kernel.kind == "tempered":
        gx, gw = leggauss(24)
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        r = mid + half * gx
        return float(np.dot(r**power * kernel.radial(r), gw) * half)
    c, a = kernel.c_eff, kernel.a
    e = power - 1.0 - a
    if abs(e + 1.0) < 1e-14:
        return c * np.log(hi / lo)
    return c * (hi ** (e + 1.0) - lo ** (e + 1.0)) / (e + 1.0)


@dataclass(frozen=True)
class QuadratureWeights:
    """Folded circular weights for one grid (d=1)."""

    w0: np.ndarray        # zeroth cell moments folded to offsets 0..N-1
    w1: np.ndarray        # first (y - y_j) moments, folded, signed
    total: float          # sum of all zeroth moments incl. images
    band_coeff: float     # int_{band} y^2 k dy over eps1 < |y| < h/2
    tail: float           # int_{|y| > Y_max} k dy (mean-field correction)
    bound_K: float        # sup-norm bound of the truncated operator


def _build_weights_1d(grid: Grid, kernel: KernelSpec, eps1: float, images: int = 4) -> QuadratureWeights:
    N, h = grid.N, grid.h
    J = images * N  # offsets out to y = images * L per side
    w0 = np.zeros(N)
    w1 = np.zeros(N)
    total = 0.0
    for j in range(1, J + 1):
        yj = j * h
        lo, hi = max(yj - h / 2, eps1), yj + h / 2
        m0 = _radial_moment(kernel, 0, lo, hi)
        m1 = _radial_moment(kernel, 1, lo, hi) - yj * m0
        r = j % N
        # +y side: contributes at circular offset r; -y side at N - r
        w0[r] += m0
        w1[r] += m1
        w0[(N - r) % N] += m0
        w1[(N - r) % N] -= m1
        total += 2 * m0
    band_coeff = 2.0 * _radial_moment(kernel, 2, eps1, h / 2) if eps1 < h / 2 else 0.0
    y_max = (J + 0.5) * h
    tail = kernel.radial_tail_integral(y_max)
    bound_K = 2.0 * total + tail  # |Lu| <= 2 ||u||_inf * int_{|y|>eps1} k
    return QuadratureWeights(w0=w0, w1=w1, total=total, band_coeff=band_coeff, tail=tail, bound_K=bound_K)


def _build_weights_2d(grid: Grid, kernel: KernelSpec, eps1: float, images: int = 1):
    """Midpoint cell weights on the offset lattice, folded circularly."""
    N, h = grid.N, grid.h
    J = images * N
    idx = np.arange(-J // 2, J // 2)
    yy1, yy2 = np.meshgrid(idx * h, idx * h, indexing="ij")
    r = np.hypot(yy1, yy2)
    w = np.zeros_like(r)
    mask = (r > max(eps1, 1.5 * h)) | ((r > eps1) & (r >= 1.5 * h))
    mask &= r > 0
    w[mask] = kernel.radial(r[mask]) * h * h
    folded = np.zeros((N, N))
    for s1 in range(-(J // 2) // N, (J // 2) // N + 1):
        pass
    # fold by index arithmetic
    fi = (idx[:, None] % N + np.zeros_like(idx)[None, :]) % N
    for i1, k1 in enumerate(idx):
        for _ in ():
            pass
    # vectorized fold
    folded = np.zeros((N, N))
    np.add.at(folded, (idx[:, None] % N, idx[None, :] % N), w)
    total = float(w.sum())
    # Taylor band for the core: angular average gives (Delta u / 4) r^2
    lo = eps1
    hi = 1.5 * h
    band = 0.0
    if lo < hi:
        gx, gw = leggauss(16)
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        rr = mid + half * gx
        band = float(np.dot(rr**2 * kernel.radial(rr) * 2 * np.pi * rr, gw) * half)
    y_max = (J // 2) * h
    tail = kernel.radial_tail_integral(y_max)
    return folded, total, band, tail


@dataclass(frozen=True)
class OperatorHandle:
    mode: str  # 'spectral_fractional' | 'kernel_quadrature' | 'laplacian'
    grid: Grid
    a: float | None = None
    kernel: KernelSpec | None = None
    eps1: float = 0.0

    @cached_property
    def multiplier(self) -> np.ndarray | None:
        if self.mode == "spectral_fractional":
            return self.grid.freq_abs**self.a
        if self.mode == "laplacian":
            return self.grid.freq_abs**2
        return None

    @cached_property
    def _weights(self):
        if self.mode != "kernel_quadrature":
            return None
        if self.grid.d == 1:
            return _build_weights_1d(self.grid, self.kernel, self.eps1)
        return _build_weights_2d(self.grid, self.kernel, self.eps1)

    @cached_property
    def bound_K(self) -> float:
        """Operator-norm bound of the truncated operator on sup-norm."""
        if self.mode == "kernel_quadrature":
            if self.grid.d == 1:
                return self._weights.bound_K
            _, total, _, tail = self._weights
            return 2 * total + tail
        return float(np.max(self.multiplier))


def spectral_fractional(grid: Grid, a: float) -> OperatorHandle:
    if not (0 < a <= 2):
        raise OperatorError(f"spectral order must lie in (0,2], got {a}")
    return OperatorHandle(mode="spectral_fractional", grid=grid, a=a)


def laplacian(grid: Grid) -> OperatorHandle:
    return OperatorHandle(mode="laplacian", grid=grid, a=2.0)


def kernel_quadrature(grid: Grid, kernel: KernelSpec, eps1: float) -> OperatorHandle:
    if eps1 < 0:
        raise OperatorError("eps1 must be nonnegative")
    if kernel.d != grid.d:
        raise OperatorError("kernel dimension does not match grid")
    return OperatorHandle(mode="kernel_quadrature", grid=grid, kernel=kernel, eps1=eps1)


def _check(handle: OperatorHandle, f: Field):
    if f.grid != handle.grid:
        raise GridError("field grid does not match operator grid")
    if not np.all(np.isfinite(f.values)):
        raise GridError("NaN/Inf in operator input")


def _circ_correlate(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """c_i = sum_j u_{i+j} w_j on the circle (any dimension)."""
    return np.real(np.fft.ifftn(np.fft.fftn(u) * np.conj(np.fft.fftn(w))))


def apply(handle: OperatorHandle, f: Field) -> Field:
    """L f (positive-definite sign convention: L = (-Laplacian)^{a/2} kind)."""
    _check(handle, f)
    g = handle.grid
    if handle.mode in ("spectral_fractional", "laplacian"):
        F = np.fft.fftn(f.values)
        out = np.real(np.fft.ifftn(handle.multiplier * F))
        return f.with_values(out)

    u = f.values
    mean = float(np.mean(u))
    if g.d == 1:
        w = handle._weights
        corr0 = _circ_correlate(u, w.w0)
        du = spectral_gradient(f)[0]
        corr1 = _circ_correlate(du, w.w1)
        out = u * w.total - corr0 - corr1
        if w.band_coeff > 0:
            d2u = np.real(np.fft.ifft(-(g.axis_freqs**2) * np.fft.fft(u)))
            out -= 0.5 * w.band_coeff * d2u
        out += (u - mean) * w.tail
    else:
        folded, total, band, tail = handle._weights
        corr0 = _circ_correlate(u, folded)
        out = u * total - corr0
        if band > 0:
            lap = np.real(np.fft.ifftn(-(g.freq_abs**2) * np.fft.fftn(u)))
            out -= 0.25 * band * lap
        out += (u - mean) * tail
    if handle.kernel.kind == "inhomogeneous":
        out = out * np.asarray(handle.kernel.prefactor(g.points[..., 0] if g.d == 1 else g.points))
    return f.with_values(out)


def mass_functional(handle: OperatorHandle, f: Field) -> float:
    """int L f dx; vanishes for symmetric kernels and spectral modes."""
    return apply(handle, f).mass()


def viscous(grid: Grid, f: Field, eps2: float) -> Field:
    """eps2 * Laplacian f by the exact spectral multiplier."""
    if f.grid != grid:
        raise GridError("field grid does not match")
    if eps2 == 0.0:
        return f.with_values(np.zeros_like(f.values))
    F = np.fft.fftn(f.values)
    out = np.real(np.fft.ifftn(-(grid.freq_abs**2) * F)) * eps2
    return f.with_values(out)


def dirichlet_form(handle: OperatorHandle, f: Field, g_field: Field | None = None) -> float:
    """<L f, g> with the grid quadrature weights."""
    gf = g_field if g_field is not None else f
    return float(np.sum(apply(handle, f).values * gf.values) * handle.grid.cell_weight)
