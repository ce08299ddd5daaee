"""Periodic torus grids, discrete Fourier transforms, and field containers.

The torus [-L/2, L/2)^d stands in for R^d; experiments must keep supports
well inside the box (padding rule: support diameter <= L_box/4) so that
wrap-around is negligible.

Transform convention: the forward transform carries the 1/N^d factor and a
phase correction for the grid origin at -L/2, so that for
f(x) = sum_k c_k exp(i xi_k x) the coefficient array holds exactly c_k.
With this normalization ||f||_{L^2}^2 = L^d * sum_k |c_k|^2.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

_MAGIC = b"FPME"
_VERSION = 1


class GridError(ValueError):
    """Invalid grid construction or mismatched grid usage."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [-L_box/2, L_box/2)^d.

    Points per axis: x_k = -L_box/2 + k*L_box/N, k = 0..N-1.
    Frequencies per axis: xi_k = 2*pi*k/L_box, k in {-N/2, ..., N/2-1},
    stored in FFT (wrap-around) order.
    """

    d: int
    N: int
    L_box: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise GridError(f"spatial dimension must be 1 or 2, got {self.d}")
        if not _is_power_of_two(self.N) or self.N < 8:
            raise GridError(f"N must be a power of two >= 8, got {self.N}")
        if not (self.L_box > 0):
            raise GridError(f"L_box must be positive, got {self.L_box}")

    @property
    def h(self) -> float:
        """Cell size per axis."""
        return self.L_box / self.N

    @property
    def cell_weight(self) -> float:
        """Quadrature weight per cell, (L_box/N)^d."""
        return self.h**self.d

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @cached_property
    def axis_points(self) -> np.ndarray:
        return -self.L_box / 2 + self.h * np.arange(self.N)

    @cached_property
    def axis_freqs(self) -> np.ndarray:
        """Angular frequencies 2*pi*k/L in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    @cached_property
    def points(self) -> np.ndarray:
        """Lattice coordinates, shape (*shape, d)."""
        axes = np.meshgrid(*([self.axis_points] * self.d), indexing="ij")
        return np.stack(axes, axis=-1)

    @cached_property
    def freq_mesh(self) -> np.ndarray:
        """Frequency vectors in FFT order, shape (*shape, d)."""
        axes = np.meshgrid(*([self.axis_freqs] * self.d), indexing="ij")
        return np.stack(axes, axis=-1)

    @cached_property
    def freq_abs(self) -> np.ndarray:
        """|xi| on the frequency lattice."""
        return np.sqrt((self.freq_mesh**2).sum(axis=-1))

    @cached_property
    def _forward_phase(self) -> np.ndarray:
        # origin at -L/2: multiply DFT output by exp(-i xi * x0) per axis
        x0 = -self.L_box / 2
        ph = np.exp(-1j * self.axis_freqs * x0)
        out = ph
        for _ in range(self.d - 1):
            out = np.multiply.outer(out, ph)
        return out

    def quadrature(self, values: np.ndarray) -> float:
        """Integral over the torus by the trapezoid-on-torus rule."""
        return float(np.sum(values) * self.cell_weight)

    def lp_norm(self, values: np.ndarray, p: float) -> float:
        if p == np.inf:
            return float(np.max(np.abs(values)))
        return float((np.sum(np.abs(values) ** p) * self.cell_weight) ** (1.0 / p))


def make_grid(d: int, N: int, L_box: float) -> Grid:
    """Construct a periodic grid; rejects non-power-of-two N and d not in {1,2}."""
    return Grid(d=d, N=N, L_box=L_box)


@dataclass(frozen=True)
class Field:
    """Real sampled function on a Grid, optionally time-stamped."""

    grid: Grid
    values: np.ndarray
    time_stamp: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridError(
                f"field shape {v.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise GridError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def norm(self, p: float = 2) -> float:
        return self.grid.lp_norm(self.values, p)

    def mass(self) -> float:
        return self.grid.quadrature(self.values)

    def with_values(self, values: np.ndarray, time_stamp: float | None = None) -> "Field":
        return Field(self.grid, values, self.time_stamp if time_stamp is None else time_stamp)


def transform_forward(f: Field) -> np.ndarray:
    """Spectral coefficients c_k with f(x) = sum_k c_k exp(i xi_k x)."""
    g = f.grid
    return np.fft.fftn(f.values) / g.N**g.d * g._forward_phase


def transform_inverse(coeffs: np.ndarray, grid: Grid, time_stamp: float | None = None) -> Field:
    """Inverse of transform_forward; imaginary residue must be negligible."""
    if coeffs.shape != grid.shape:
        raise GridError(
            f"spectral shape {coeffs.shape} does not match grid shape {grid.shape}"
        )
    vals = np.fft.ifftn(coeffs / grid._forward_phase) * grid.N**grid.d
    return Field(grid, np.real(vals), time_stamp)


def spectral_gradient(f: Field) -> list[np.ndarray]:
    """Componentwise spectral derivative arrays d f / d x_i."""
    g = f.grid
    F = np.fft.fftn(f.values)
    out = []
    for ax in range(g.d):
        shape = [1] * g.d
        shape[ax] = g.N
        k = g.axis_freqs.reshape(shape)
        out.append(np.real(np.fft.ifftn(1j * k * F)))
    return out


def grad_sq(f: Field) -> np.ndarray:
    """|grad f|^2 via spectral differentiation."""
    parts = spectral_gradient(f)
    return sum(p**2 for p in parts)


# --- serialization -----------------------------------------------------------

def save_field(f: Field, path) -> None:
    """Flat binary: header (magic, version, d, N, L_box, has_t, t) + row-major f64."""
    has_t = f.time_stamp is not None
    header = struct.pack(
        "<4sBBIdBd",
        _MAGIC,
        _VERSION,
        f.grid.d,
        f.grid.N,
        f.grid.L_box,
        1 if has_t else 0,
        f.time_stamp if has_t else 0.0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_field(path) -> Field:
    with open(path, "rb") as fh:
        header = fh.read(struct.calcsize("<4sBBIdBd"))
        magic, version, d, N, L_box, has_t, t = struct.unpack("<4sBBIdBd", header)
        if magic != _MAGIC:
            raise GridError(f"bad field file magic {magic!r}")
        if version != _VERSION:
            raise GridError(f"unsupported field file version {version}")
        grid = Grid(d=d, N=N, L_box=L_box)
        raw = fh.read(8 * N**d)
        values = np.frombuffer(raw, dtype="<f8").reshape(grid.shape)
    return Field(grid, values.copy(), float(t) if has_t else None)


def field_to_csv(f: Field, path) -> None:
    """CSV export for small grids: coordinates then value per row."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(f.grid.d)] + ["value"])
        pts = f.grid.points.reshape(-1, f.grid.d)
        vals = f.values.reshape(-1)
        for p, v in zip(pts, vals):
            w.writerow([repr(float(c)) for c in p] + [repr(float(v))])
